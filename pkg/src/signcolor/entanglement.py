"""Entanglement entropy and tripartite mutual information of tableau states.

For a stabilizer state the entanglement entropy of region R is the GF(2) rank
of the stabilizer rows restricted to R's X|Z columns minus |R|, in bits. The
restriction only zeroes the complement columns (rank is blind to column
position), so it is a word-mask, not a gather.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Tuple

import numpy as np

from ._bits import n_words, pack_int
from ._kernels import gf2_rank_packed
from .tableau import ColoredTableau


@dataclass(frozen=True)
class Region:
    sites: Tuple[int, ...]

    @classmethod
    def from_sites(cls, sites: Iterable[int], L: int) -> "Region":
        ss = tuple(sorted(set(int(s) for s in sites)))
        if ss != tuple(sorted(int(s) for s in sites)):
            raise ValueError("duplicate sites in region")
        if ss and (ss[0] < 0 or ss[-1] >= L):
            raise ValueError("region site out of range")
        return cls(ss)

    @classmethod
    def contiguous(cls, start: int, length: int, L: int) -> "Region":
        return cls.from_sites(range(start, start + length), L)

    def __len__(self) -> int:
        return len(self.sites)

    def mask(self) -> int:
        m = 0
        for s in self.sites:
            m |= 1 << s
        return m


def entropy(t: ColoredTableau, region: Region) -> int:
    """Entanglement entropy of `region` in bits; never mutates the tableau."""
    r = len(region)
    if r == 0 or r == t.n:
        return 0
    W = t.W
    mask_words = pack_int(region.mask(), W)
    restricted = np.empty((t.n, 2 * W), dtype=np.uint64)
    restricted[:, :W] = t.xs[t.n:] & mask_words
    restricted[:, W:] = t.zs[t.n:] & mask_words
    rank = int(gf2_rank_packed(restricted, 2 * 64 * W))
    return rank - r


def half_chain_entropy(t: ColoredTableau) -> int:
    if t.n % 2:
        raise ValueError("half-chain entropy needs even L")
    return entropy(t, Region.contiguous(0, t.n // 2, t.n))


def tripartite_mi(t: ColoredTableau) -> int:
    """I_3 over contiguous quarters A, B, C of the periodic chain, in bits."""
    L = t.n
    if L % 4:
        raise ValueError("tripartite mutual information needs L divisible by 4")
    q = L // 4
    a = Region.contiguous(0, q, L)
    b = Region.contiguous(q, q, L)
    c = Region.contiguous(2 * q, q, L)
    ab = Region.contiguous(0, 2 * q, L)
    bc = Region.contiguous(q, 2 * q, L)
    ac = Region.from_sites(a.sites + c.sites, L)
    abc = Region.contiguous(0, 3 * q, L)
    return (entropy(t, a) + entropy(t, b) + entropy(t, c)
            - entropy(t, ab) - entropy(t, ac) - entropy(t, bc)
            + entropy(t, abc))
