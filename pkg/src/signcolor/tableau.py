"""Bit-packed stabilizer tableau with destabilizers and sign colors.

Pauli strings are stored as P = i^phase * prod_s X_s^{x_s} Z_s^{z_s} with the
phase an exponent of i mod 4. Under this convention the product rule is

    (p1, x1, z1) * (p2, x2, z2) = (p1 + p2 + 2*|z1 & x2|, x1^x2, z1^z2)

and a Hermitian string satisfies phase = |x & z| (mod 2); its sign is +1 when
(phase - |x & z|) = 0 (mod 4) and -1 when it is 2.

The tableau keeps n destabilizer rows followed by n stabilizer rows in packed
uint64 arrays and follows the standard destabilizer scheme for measurements;
pivot selection during a measurement is delegated to the sign-color priority
unless the caller asks for plain lowest-index pivoting.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from . import colors as colormod
from ._bits import gf2_rank, n_words, pack_int, popcount, unpack_int
from ._kernels import (apply_xxzz_pairs, expectation_packed, measure_x_layer)

_SITE_CHARS = {(0, 0): "I", (1, 0): "X", (0, 1): "Z", (1, 1): "Y"}
_CHAR_BITS = {v: k for k, v in _SITE_CHARS.items()}


@dataclass
class PauliOperator:
    """A Pauli string on n sites: bitsets x, z and an i-exponent mod 4."""

    n: int
    x: int = 0
    z: int = 0
    phase: int = 0

    def __post_init__(self):
        self.phase %= 4

    @classmethod
    def identity(cls, n: int) -> "PauliOperator":
        return cls(n)

    @classmethod
    def x_at(cls, n: int, site: int, sign: int = 1) -> "PauliOperator":
        return cls(n, x=1 << site, phase=0 if sign > 0 else 2)

    @classmethod
    def z_at(cls, n: int, site: int, sign: int = 1) -> "PauliOperator":
        return cls(n, z=1 << site, phase=0 if sign > 0 else 2)

    @classmethod
    def from_string(cls, text: str) -> "PauliOperator":
        """Parse strings like "+XIZY" or "-iXX" (site 0 leftmost)."""
        phase = 0
        body = text
        if body.startswith(("+", "-")):
            neg = body[0] == "-"
            body = body[1:]
            phase = 2 if neg else 0
        if body.startswith("i"):
            phase += 1
            body = body[1:]
        x = z = 0
        for s, ch in enumerate(body):
            xb, zb = _CHAR_BITS[ch]
            x |= xb << s
            z |= zb << s
        # canonical letters are Hermitian; add the i per Y site
        phase += popcount(x & z)
        return cls(len(body), x, z, phase % 4)

    def __mul__(self, other: "PauliOperator") -> "PauliOperator":
        if self.n != other.n:
            raise ValueError("operator size mismatch")
        phase = self.phase + other.phase + 2 * popcount(self.z & other.x)
        return PauliOperator(self.n, self.x ^ other.x, self.z ^ other.z, phase % 4)

    def commutes_with(self, other: "PauliOperator") -> bool:
        return (popcount(self.x & other.z) + popcount(self.z & other.x)) % 2 == 0

    @property
    def is_identity_string(self) -> bool:
        return self.x == 0 and self.z == 0

    @property
    def is_hermitian(self) -> bool:
        return (self.phase - popcount(self.x & self.z)) % 2 == 0

    @property
    def sign(self) -> int:
        """+1 or -1 for a Hermitian string."""
        d = (self.phase - popcount(self.x & self.z)) % 4
        if d == 0:
            return 1
        if d == 2:
            return -1
        raise ValueError("operator is not Hermitian")

    def __str__(self) -> str:
        body = "".join(
            _SITE_CHARS[((self.x >> s) & 1, (self.z >> s) & 1)] for s in range(self.n)
        )
        d = (self.phase - popcount(self.x & self.z)) % 4
        return ("+", "+i", "-", "-i")[d] + body


class GateKind(enum.Enum):
    TWO_SITE_XXZZ = "xxzz"
    SINGLE_SITE_BASIS_CHANGE = "basis_change"  # reserved


@dataclass(frozen=True)
class CliffordGate:
    kind: GateKind
    sites: tuple

    def __post_init__(self):
        if len(set(self.sites)) != len(self.sites):
            raise ValueError("gate sites must be distinct")
        if any(s < 0 for s in self.sites):
            raise ValueError("gate sites must be nonnegative")


def xxzz_gate(a: int, b: int) -> CliffordGate:
    return CliffordGate(GateKind.TWO_SITE_XXZZ, (a, b))


def _half_rotation_conjugate(axis: PauliOperator, q: PauliOperator) -> PauliOperator:
    """V q V† for V = exp(-i pi/4 axis): q when [q, axis] = 0, else -i axis q."""
    if q.commutes_with(axis):
        return q
    r = axis * q
    return PauliOperator(r.n, r.x, r.z, (r.phase + 3) % 4)


def _build_xxzz_table():
    """Conjugation of the 16 two-site Paulis by exp[-i pi/4 (XX+ZZ)].

    XX and ZZ commute, so the gate factors into the two half rotations and the
    table is their composition. Keys and values pack the bits as
    (xa, za, xb, zb) -> key = xa<<3 | za<<2 | xb<<1 | zb, with a phase delta.
    """
    xx = PauliOperator(2, x=0b11)
    zz = PauliOperator(2, z=0b11)
    bits = np.zeros(16, dtype=np.int64)
    dphase = np.zeros(16, dtype=np.int64)
    for key in range(16):
        xa, za, xb, zb = (key >> 3) & 1, (key >> 2) & 1, (key >> 1) & 1, key & 1
        q = PauliOperator(2, x=xa | (xb << 1), z=za | (zb << 1))
        q = _half_rotation_conjugate(zz, q)
        q = _half_rotation_conjugate(xx, q)
        out_key = (((q.x & 1) << 3) | ((q.z & 1) << 2)
                   | (((q.x >> 1) & 1) << 1) | ((q.z >> 1) & 1))
        bits[key] = out_key
        dphase[key] = q.phase
    return bits, dphase


XXZZ_BITS, XXZZ_PHASE = _build_xxzz_table()


def conjugate_pauli(gate: CliffordGate, p: PauliOperator) -> PauliOperator:
    """U p U† for the two-site gate, via the precomputed table."""
    if gate.kind is not GateKind.TWO_SITE_XXZZ:
        raise NotImplementedError(f"{gate.kind} is not implemented")
    a, b = gate.sites
    key = (((p.x >> a) & 1) << 3 | ((p.z >> a) & 1) << 2
           | ((p.x >> b) & 1) << 1 | ((p.z >> b) & 1))
    out = int(XXZZ_BITS[key])
    x = p.x & ~((1 << a) | (1 << b))
    z = p.z & ~((1 << a) | (1 << b))
    x |= ((out >> 3) & 1) << a | ((out >> 1) & 1) << b
    z |= ((out >> 2) & 1) << a | (out & 1) << b
    return PauliOperator(p.n, x, z, (p.phase + int(XXZZ_PHASE[key])) % 4)


class ColoredTableau:
    """Destabilizer/stabilizer tableau with per-stabilizer sign colors.

    xs, zs: (2n, W) uint64, rows 0..n-1 destabilizers, n..2n-1 stabilizers.
    phases: (2n,) uint8 i-exponents. colors: (n,) int64 tags for the
    stabilizer rows only; destabilizer signs never enter decodability.

    phases_valid / destab_valid record whether a fast evolution path skipped
    the corresponding bookkeeping; sign-reading operations refuse to run on a
    tableau whose signs were not maintained.
    """

    def __init__(self, n: int, xs, zs, phases, colors, n_bits: int = 1):
        self.n = n
        self.W = n_words(n)
        self.xs = xs
        self.zs = zs
        self.phases = phases
        self.colors = colors
        self.n_bits = n_bits
        self.phases_valid = True
        self.destab_valid = True

    @classmethod
    def _empty(cls, n: int, n_bits: int) -> "ColoredTableau":
        W = n_words(n)
        return cls(
            n,
            np.zeros((2 * n, W), dtype=np.uint64),
            np.zeros((2 * n, W), dtype=np.uint64),
            np.zeros(2 * n, dtype=np.uint8),
            np.zeros(n, dtype=np.int64),
            n_bits,
        )

    @classmethod
    def from_rows(cls, destabs, stabs, colors=None, n_bits: int = 1,
                  check: bool = True) -> "ColoredTableau":
        """Build a tableau from explicit destabilizer/stabilizer PauliOperators."""
        n = len(stabs)
        if len(destabs) != n:
            raise ValueError("need one destabilizer per stabilizer")
        t = cls._empty(n, n_bits)
        for i, p in enumerate(destabs):
            t._set_row(i, p)
        for i, p in enumerate(stabs):
            t._set_row(n + i, p)
        if colors is not None:
            t.colors[:] = np.asarray(colors, dtype=np.int64)
        if check:
            t.check_invariants()
        return t

    def copy(self) -> "ColoredTableau":
        t = ColoredTableau(self.n, self.xs.copy(), self.zs.copy(),
                           self.phases.copy(), self.colors.copy(), self.n_bits)
        t.phases_valid = self.phases_valid
        t.destab_valid = self.destab_valid
        return t

    # -- row access -------------------------------------------------------

    def _set_row(self, i: int, p: PauliOperator) -> None:
        self.xs[i] = pack_int(p.x, self.W)
        self.zs[i] = pack_int(p.z, self.W)
        self.phases[i] = p.phase % 4

    def row(self, i: int) -> PauliOperator:
        return PauliOperator(self.n, unpack_int(self.xs[i]),
                             unpack_int(self.zs[i]), int(self.phases[i]))

    def stabilizer(self, i: int) -> PauliOperator:
        return self.row(self.n + i)

    def destabilizer(self, i: int) -> PauliOperator:
        return self.row(i)

    def stabilizers(self):
        return [self.stabilizer(i) for i in range(self.n)]

    def color_state(self) -> colormod.ColorState:
        return colormod.ColorState.from_tags(int(t) for t in self.colors)

    def is_decodable(self) -> bool:
        return colormod.tags_decodable(self.colors, self.n_bits)

    # -- evolution --------------------------------------------------------

    def apply_gate(self, gate: CliffordGate) -> None:
        """Conjugate all rows by the gate; colors are untouched."""
        if gate.kind is not GateKind.TWO_SITE_XXZZ:
            raise NotImplementedError(f"{gate.kind} is not implemented")
        a, b = gate.sites
        if not (0 <= a < self.n and 0 <= b < self.n):
            raise ValueError("gate sites out of range")
        pairs = np.array([[a, b]], dtype=np.int64)
        apply_xxzz_pairs(self.xs, self.zs, self.phases, pairs, True)

    def apply_gate_pairs(self, pairs: np.ndarray, track_phase: bool = True) -> None:
        """Apply one disjoint layer of XXZZ gates given as an (k, 2) array."""
        if pairs.shape[0]:
            apply_xxzz_pairs(self.xs, self.zs, self.phases,
                             np.ascontiguousarray(pairs, dtype=np.int64),
                             track_phase)
        if not track_phase:
            self.phases_valid = False

    def measure(self, site: int, rng: np.random.Generator,
                policy: str = "color") -> int:
        """Projective X measurement returning +1 or -1.

        Deterministic outcomes leave the tableau (and the coloring) unchanged.
        Random outcomes pick the pivot by `policy` ("color" priority or
        "lowest" index), fold it into the other anticommuting rows with full
        phase and color tracking, and install a fresh +-X_site row tagged
        randomized. One fair bit is consumed from rng per call either way.
        """
        if not (0 <= site < self.n):
            raise ValueError("site out of range")
        if not (self.phases_valid and self.destab_valid):
            raise RuntimeError("measure() needs fully tracked signs; "
                               "this tableau came from a fast evolution path")
        outcomes = np.zeros(1, dtype=np.int8)
        sites = np.array([site], dtype=np.int64)
        coins = rng.integers(0, 2, size=1, dtype=np.uint8)
        measure_x_layer(self.xs, self.zs, self.phases, self.colors, sites,
                        coins, _policy_code(policy), True, True, outcomes)
        return int(outcomes[0])

    def measure_layer(self, sites: np.ndarray, coins: np.ndarray,
                      policy: str = "color", track_phase: bool = True,
                      update_destab: bool = True) -> np.ndarray:
        """Measure X on the given sites in array order; returns outcomes.

        Fast callers may switch off phase or destabilizer maintenance when
        the observable they estimate provably never reads them; the tableau
        remembers that its signs are no longer trustworthy.
        """
        outcomes = np.zeros(len(sites), dtype=np.int8)
        if len(sites):
            measure_x_layer(self.xs, self.zs, self.phases, self.colors,
                            np.ascontiguousarray(sites, dtype=np.int64),
                            np.ascontiguousarray(coins, dtype=np.uint8),
                            _policy_code(policy), track_phase, update_destab,
                            outcomes)
            if not track_phase:
                self.phases_valid = False
            if not update_destab:
                self.destab_valid = False
        return outcomes

    def expectation(self, p: PauliOperator) -> int:
        """+1 / -1 when p (must be Hermitian) is in the +-stabilizer group, else 0."""
        if p.n != self.n:
            raise ValueError("operator size mismatch")
        if not p.is_hermitian:
            raise ValueError("expectation of a non-Hermitian string")
        if not (self.phases_valid and self.destab_valid):
            raise RuntimeError("expectation() needs tracked phases and destabilizers")
        return int(expectation_packed(self.xs, self.zs, self.phases, self.n,
                                      pack_int(p.x, self.W),
                                      pack_int(p.z, self.W), p.phase % 4))

    # -- integrity --------------------------------------------------------

    def check_invariants(self) -> None:
        """Debug checker: commutation structure, GF(2) rank, Hermitian signs."""
        n = self.n
        xs_i = [unpack_int(self.xs[i]) for i in range(2 * n)]
        zs_i = [unpack_int(self.zs[i]) for i in range(2 * n)]

        def anti(i, j):
            return (popcount(xs_i[i] & zs_i[j]) + popcount(zs_i[i] & xs_i[j])) % 2

        for i in range(n, 2 * n):
            for j in range(n, 2 * n):
                if anti(i, j):
                    raise AssertionError(f"stabilizers {i-n},{j-n} anticommute")
        for i in range(n):
            for j in range(n, 2 * n):
                expected = 1 if j - n == i else 0
                if anti(i, j) != expected:
                    raise AssertionError(f"destabilizer {i} vs stabilizer {j-n}")
            for j in range(n):
                if anti(i, j):
                    raise AssertionError(f"destabilizers {i},{j} anticommute")
        rank = gf2_rank(xs_i[i] | (zs_i[i] << n) for i in range(2 * n))
        if rank != 2 * n:
            raise AssertionError(f"tableau rank {rank} != {2*n}")
        if self.phases_valid:
            for i in range(n, 2 * n):
                if (int(self.phases[i]) - popcount(xs_i[i] & zs_i[i])) % 2:
                    raise AssertionError(f"stabilizer {i-n} is not Hermitian")
        for t in self.colors:
            if not colormod.is_valid_tag(int(t)):
                raise AssertionError(f"invalid color tag {t}")


def _policy_code(policy: str) -> int:
    if policy == "color":
        return 1
    if policy == "lowest":
        return 0
    raise ValueError(f"unknown pivot policy {policy!r}")


FAMILIES = ("product", "cat", "bell")


def family_bits(family: str) -> int:
    """Number of logical bits the initial-state family encodes."""
    if family in ("product", "cat"):
        return 1
    if family == "bell":
        return 2
    raise ValueError(f"unknown family {family!r}")


def new_initial_state(L: int, family: str, logical: int = 0) -> ColoredTableau:
    """Initial tableau of one of the encoded families.

    product: stabilizers +-X_i (|+>^L or |->^L), every sign correlated(1).
    cat:     Z_i Z_{i+1} trivial plus the global X string correlated(1),
             i.e. (|0...0> +- |1...1>)/sqrt(2).
    bell:    L/2 identical Bell pairs on sites (2k, 2k+1); the Z-pair signs
             follow bit 0 (mask 01) and the X-pair signs bit 1 (mask 10).
    """
    if L < 2:
        raise ValueError("need at least two sites")
    nb = family_bits(family)
    if not 0 <= logical < (1 << nb):
        raise ValueError(f"logical value {logical} out of range for {family}")
    t = ColoredTableau._empty(L, nb)
    sgn = 2 * (logical & 1)
    if family == "product":
        for i in range(L):
            t._set_row(i, PauliOperator(L, z=1 << i))
            t._set_row(L + i, PauliOperator(L, x=1 << i, phase=sgn))
            t.colors[i] = 1
    elif family == "cat":
        all_x = (1 << L) - 1
        for i in range(L - 1):
            t._set_row(i, PauliOperator(L, x=all_x & ~((1 << (i + 1)) - 1)))
            t._set_row(L + i, PauliOperator(L, z=(0b11 << i)))
            t.colors[i] = colormod.TRIVIAL
        t._set_row(L - 1, PauliOperator(L, z=1))
        t._set_row(2 * L - 1, PauliOperator(L, x=all_x, phase=sgn))
        t.colors[L - 1] = 1
    else:  # bell
        if L % 2:
            raise ValueError("bell family needs an even number of sites")
        half = L // 2
        sgn_x = 2 * ((logical >> 1) & 1)
        for k in range(half):
            a = 2 * k
            t._set_row(k, PauliOperator(L, x=1 << a))
            t._set_row(L + k, PauliOperator(L, z=0b11 << a, phase=sgn))
            t.colors[k] = 0b01
            t._set_row(half + k, PauliOperator(L, z=1 << (a + 1)))
            t._set_row(L + half + k, PauliOperator(L, x=0b11 << a, phase=sgn_x))
            t.colors[half + k] = 0b10
    return t
