"""Seeded sampling and replay of the stochastic circuit geometry.

One time step is one candidate-gate layer (a brickwork half-layer in 1D, the
four-sublattice sequence in 2D) followed by one measurement layer; depth T
counts these steps. Gates appear independently with probability p_u on each
candidate bond, measurements with probability p_m on each site, swept in
ascending site order. Boundaries are periodic in both geometries.

Placements derive from (seed, "placements") only; measurement outcomes come
from a separate generator passed to run(), so changing the trajectory index
never changes placements.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Iterable, Iterator, List, Optional, Sequence, Tuple

import numpy as np

from . import colors as colormod
from .seeding import substream
from .tableau import ColoredTableau

GEOMETRIES = ("chain", "square")

RECORD_FORMAT_VERSION = 1


@dataclass(frozen=True)
class DepthRule:
    """Circuit depth as a function of linear size: constant, a*log2(L) or c*L."""

    kind: str
    value: float

    @classmethod
    def constant(cls, T: int) -> "DepthRule":
        return cls("constant", float(T))

    @classmethod
    def log(cls, a: float) -> "DepthRule":
        return cls("log", float(a))

    @classmethod
    def linear(cls, c: float) -> "DepthRule":
        return cls("linear", float(c))

    def depth(self, L: int) -> int:
        if self.kind == "constant":
            d = int(round(self.value))
        elif self.kind == "log":
            d = int(round(self.value * math.log2(L)))
        elif self.kind == "linear":
            d = int(round(self.value * L))
        else:
            raise ValueError(f"unknown depth rule {self.kind!r}")
        return max(1, d)

    @classmethod
    def parse(cls, text: str) -> "DepthRule":
        kind, _, val = text.partition(":")
        kind = {"const": "constant"}.get(kind, kind)
        if kind not in ("constant", "log", "linear") or not val:
            raise ValueError(f"bad depth rule {text!r}; use constant:T, log:a or linear:c")
        return cls(kind, float(val))

    def __str__(self) -> str:
        return f"{self.kind}:{self.value:g}"


def chain_bonds(L: int, step: int) -> np.ndarray:
    """Brickwork candidate bonds for one step; the offset alternates per step."""
    offset = step & 1
    a = np.arange(offset, L, 2, dtype=np.int64)
    return np.stack([a, (a + 1) % L], axis=1)


def square_sublattices(L: int) -> List[np.ndarray]:
    """The four 2D gate sublattices in application order.

    Order: horizontal bonds from even columns, horizontal from odd columns,
    vertical from even rows, vertical from odd rows, all with wrap-around.
    """
    subs = []
    r = np.repeat(np.arange(L, dtype=np.int64), L // 2)
    for parity in (0, 1):
        c = np.tile(np.arange(parity, L, 2, dtype=np.int64), L)
        subs.append(np.stack([r * L + c, r * L + (c + 1) % L], axis=1))
    c = np.tile(np.arange(L, dtype=np.int64), L // 2)
    for parity in (0, 1):
        rr = np.repeat(np.arange(parity, L, 2, dtype=np.int64), L)
        subs.append(np.stack([rr * L + c, ((rr + 1) % L) * L + c], axis=1))
    return subs


def _check_params(geometry: str, L: int, p_u: float, p_m: float) -> None:
    if geometry not in GEOMETRIES:
        raise ValueError(f"unknown geometry {geometry!r}")
    if L % 2 or L < 2:
        raise ValueError("the bond pattern needs even L >= 2")
    if not (0.0 <= p_u <= 1.0 and 0.0 <= p_m <= 1.0):
        raise ValueError("p_u and p_m must lie in [0, 1]")


def _iter_layers(geometry: str, L: int, depth: int, p_u: float, p_m: float,
                 seed: int) -> Iterator[Tuple[List[np.ndarray], np.ndarray]]:
    """Yield (gate sublayers, measured sites) per step from the placement stream."""
    rng = substream(seed, "placements")
    n_sites = L if geometry == "chain" else L * L
    square_subs = square_sublattices(L) if geometry == "square" else None
    for step in range(depth):
        if geometry == "chain":
            candidates = [chain_bonds(L, step)]
        else:
            candidates = square_subs
        gates = []
        for cand in candidates:
            keep = rng.random(len(cand)) < p_u
            gates.append(cand[keep])
        meas = np.flatnonzero(rng.random(n_sites) < p_m).astype(np.int64)
        yield gates, meas


@dataclass
class CircuitRecord:
    """Replayable placement of gates and measurements over `depth` steps."""

    geometry: str
    L: int
    depth: int
    p_u: float
    p_m: float
    seed: int
    gate_layers: List[List[np.ndarray]] = field(default_factory=list)
    meas_layers: List[np.ndarray] = field(default_factory=list)

    @property
    def n_sites(self) -> int:
        return self.L if self.geometry == "chain" else self.L * self.L

    def layers(self) -> Iterator[Tuple[List[np.ndarray], np.ndarray]]:
        return iter(zip(self.gate_layers, self.meas_layers))

    @classmethod
    def sample(cls, geometry: str, L: int, depth_rule: DepthRule, p_u: float,
               p_m: float, seed: int) -> "CircuitRecord":
        _check_params(geometry, L, p_u, p_m)
        depth = depth_rule.depth(L)
        rec = cls(geometry, L, depth, p_u, p_m, seed)
        for gates, meas in _iter_layers(geometry, L, depth, p_u, p_m, seed):
            rec.gate_layers.append(gates)
            rec.meas_layers.append(meas)
        return rec

    def validate(self) -> None:
        for gates in self.gate_layers:
            for sub in gates:
                flat = sub.reshape(-1)
                if len(np.unique(flat)) != len(flat):
                    raise AssertionError("overlapping gate pair within a sublayer")
                if flat.size and (flat.min() < 0 or flat.max() >= self.n_sites):
                    raise AssertionError("gate site out of range")
        for meas in self.meas_layers:
            if np.any(np.diff(meas) <= 0):
                raise AssertionError("measurement sites not strictly ascending")

    def to_json(self, include_body: bool = True) -> str:
        doc = {
            "format": "signcolor-circuit-record",
            "version": RECORD_FORMAT_VERSION,
            "geometry": self.geometry,
            "L": self.L,
            "depth": self.depth,
            "p_u": self.p_u,
            "p_m": self.p_m,
            "seed": self.seed,
        }
        if include_body:
            doc["gate_layers"] = [[sub.tolist() for sub in gates]
                                  for gates in self.gate_layers]
            doc["meas_layers"] = [m.tolist() for m in self.meas_layers]
        return json.dumps(doc)

    @classmethod
    def from_json(cls, text: str) -> "CircuitRecord":
        doc = json.loads(text)
        if doc.get("format") != "signcolor-circuit-record":
            raise ValueError("not a circuit-record document")
        if doc.get("version") != RECORD_FORMAT_VERSION:
            raise ValueError(f"unsupported record version {doc.get('version')}")
        rec = cls(doc["geometry"], doc["L"], doc["depth"], doc["p_u"],
                  doc["p_m"], doc["seed"])
        if "gate_layers" in doc:
            rec.gate_layers = [
                [np.asarray(sub, dtype=np.int64).reshape(-1, 2) for sub in gates]
                for gates in doc["gate_layers"]
            ]
            rec.meas_layers = [np.asarray(m, dtype=np.int64) for m in doc["meas_layers"]]
        else:
            regen = cls.sample(rec.geometry, rec.L, DepthRule.constant(rec.depth),
                               rec.p_u, rec.p_m, rec.seed)
            rec.gate_layers, rec.meas_layers = regen.gate_layers, regen.meas_layers
        return rec


def sample_1d(L: int, depth_rule: DepthRule, p_u: float, p_m: float,
              seed: int) -> CircuitRecord:
    return CircuitRecord.sample("chain", L, depth_rule, p_u, p_m, seed)


def sample_2d(L: int, depth_rule: DepthRule, p_u: float, p_m: float,
              seed: int) -> CircuitRecord:
    return CircuitRecord.sample("square", L, depth_rule, p_u, p_m, seed)


class CircuitStream:
    """Lazy view of a CircuitRecord: same placements, sampled layer by layer.

    Used by the ensemble estimators so trajectories that stop early never pay
    for materializing the full record. CircuitRecord.sample consumes the same
    generator, so stream and record are placement-identical for equal seeds.
    """

    def __init__(self, geometry: str, L: int, depth: int, p_u: float,
                 p_m: float, seed: int):
        _check_params(geometry, L, p_u, p_m)
        self.geometry, self.L, self.depth = geometry, L, depth
        self.p_u, self.p_m, self.seed = p_u, p_m, seed

    @property
    def n_sites(self) -> int:
        return self.L if self.geometry == "chain" else self.L * self.L

    def layers(self) -> Iterator[Tuple[List[np.ndarray], np.ndarray]]:
        return _iter_layers(self.geometry, self.L, self.depth, self.p_u,
                            self.p_m, self.seed)


def resample_measurements(record: CircuitRecord, p_m: float, seed: int) -> CircuitRecord:
    """Same unitary placements, freshly drawn measurement layers at rate p_m."""
    rng = substream(seed, "meas-resample")
    rec = CircuitRecord(record.geometry, record.L, record.depth, record.p_u,
                        p_m, record.seed)
    rec.gate_layers = record.gate_layers
    rec.meas_layers = [
        np.flatnonzero(rng.random(record.n_sites) < p_m).astype(np.int64)
        for _ in range(record.depth)
    ]
    return rec


@dataclass
class TrajectoryOutcome:
    """What one executed trajectory reports back.

    t_r is the first step index whose coloring is no longer decodable
    (colors.NEVER when that never happens within the executed depth);
    decodable_at maps each requested checkpoint depth d to t_r > d, which is
    exact because decodability never returns once lost.
    """

    t_r: float
    depth: int
    decodable_at: Optional[dict] = None
    final: Optional[ColoredTableau] = None
    trace: Optional[List[colormod.ColorState]] = None
    outcomes: Optional[List[np.ndarray]] = None


def run(record, initial: ColoredTableau, rng: np.random.Generator,
        mode: str = "track_colors", *, checkpoints: Optional[Sequence[int]] = None,
        stop_when_undecodable: bool = False, keep_trace: Optional[bool] = None,
        keep_final: Optional[bool] = None, keep_outcomes: bool = False,
        track_phase: bool = True, update_destab: bool = True,
        policy: str = "color") -> TrajectoryOutcome:
    """Execute a (materialized or streamed) record on `initial`, in place.

    track_colors mode records the per-step ColorState trace and t_r; plain
    mode only returns the final tableau. Measurement outcome coins come from
    `rng`, one per measured site, drawn only when phases are tracked (signs
    are unreadable otherwise). Fast callers may disable phase or destabilizer
    maintenance; the tableau then remembers its signs are invalid.
    """
    if mode not in ("track_colors", "plain"):
        raise ValueError(f"unknown run mode {mode!r}")
    if record.n_sites != initial.n:
        raise ValueError(f"record is for {record.n_sites} sites, tableau has {initial.n}")
    track = mode == "track_colors"
    if keep_trace is None:
        keep_trace = track
    if keep_final is None:
        keep_final = not track
    t = initial
    trace = [t.color_state()] if (track and keep_trace) else None
    outcomes_log: Optional[List[np.ndarray]] = [] if keep_outcomes else None
    t_r = colormod.NEVER
    depth_run = 0
    decodable = t.is_decodable() if track else True
    for step, (gates, meas) in enumerate(record.layers()):
        for sub in gates:
            t.apply_gate_pairs(sub, track_phase)
        if track_phase:
            coins = rng.integers(0, 2, size=len(meas), dtype=np.uint8)
        else:
            coins = np.zeros(len(meas), dtype=np.uint8)
        outs = t.measure_layer(meas, coins, policy=policy,
                               track_phase=track_phase,
                               update_destab=update_destab)
        if outcomes_log is not None:
            outcomes_log.append(outs)
        depth_run = step + 1
        if track:
            if trace is not None:
                trace.append(t.color_state())
            if decodable and not t.is_decodable():
                decodable = False
                t_r = float(depth_run)
                if stop_when_undecodable:
                    break
    decodable_at = None
    if checkpoints is not None:
        decodable_at = {int(d): bool(t_r > d) for d in checkpoints}
    return TrajectoryOutcome(
        t_r=t_r if track else colormod.NEVER,
        depth=depth_run,
        decodable_at=decodable_at,
        final=t if keep_final else None,
        trace=trace,
        outcomes=outcomes_log,
    )
