"""Sign-color algebra for dynamic-syndrome decoding.

Each stabilizer row of a tableau carries a tag describing how its sign relates
to the encoded initial state:

* ``TRIVIAL`` (0): the sign is fixed, independent of both the initial state
  and the measurement record.
* correlated mask m (positive int, up to MAX_COLOR_BITS bits): the sign flips
  with the parity ``popcount(m & logical)`` of the encoded bits.
* ``RANDOMIZED`` (-1): the sign depends on measurement outcomes.

Tags are plain ints so the hot kernels can carry them in an int64 array, and
so tag multiplication is branch-light: randomized absorbs, trivial is the
identity, and correlated masks combine by XOR (equal masks cancel to trivial).

A measurement whose outcome is deterministic leaves the tableau, and therefore
the coloring, untouched; this includes the case where the deterministic sign
is a product involving correlated rows (the generators themselves are not
recombined, so no tag changes hands).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Dict, Iterable, Sequence

import numpy as np

from ._bits import gf2_span_rank

TRIVIAL = 0
RANDOMIZED = -1

#: Correlated masks are capped at 16 bits; the circuits studied use 1 or 2.
MAX_COLOR_BITS = 16

#: Returned by randomization_time when the trace never becomes undecodable.
NEVER = math.inf


def is_valid_tag(tag: int) -> bool:
    return tag == RANDOMIZED or 0 <= tag < (1 << MAX_COLOR_BITS)


def multiply_colors(a: int, b: int) -> int:
    """Tag of the product of two stabilizer rows with tags a and b."""
    if a == RANDOMIZED or b == RANDOMIZED:
        return RANDOMIZED
    return a ^ b


def priority_class(tag: int) -> int:
    """Pivot priority: trivial (0) before correlated (1) before randomized (2)."""
    if tag == TRIVIAL:
        return 0
    if tag == RANDOMIZED:
        return 2
    return 1


def select_pivot(tags: Sequence[int]) -> int:
    """Index of the preferred pivot among anticommuting rows.

    Highest available priority class wins; ties break to the lowest index.
    """
    if len(tags) == 0:
        raise ValueError("no anticommuting rows to pivot on")
    best = 0
    best_class = priority_class(tags[0])
    for i in range(1, len(tags)):
        c = priority_class(tags[i])
        if c < best_class:
            best, best_class = i, c
            if c == 0:
                break
    return best


@dataclass
class ColorState:
    """Tag census of one tableau: counts per variant plus the correlated masks."""

    n_trivial: int
    n_randomized: int
    mask_counts: Dict[int, int] = field(default_factory=dict)

    @property
    def n_correlated(self) -> int:
        return sum(self.mask_counts.values())

    @property
    def total(self) -> int:
        return self.n_trivial + self.n_randomized + self.n_correlated

    @classmethod
    def from_tags(cls, tags: Iterable[int]) -> "ColorState":
        n_triv = n_rand = 0
        masks: Dict[int, int] = {}
        for t in tags:
            if t == TRIVIAL:
                n_triv += 1
            elif t == RANDOMIZED:
                n_rand += 1
            else:
                masks[t] = masks.get(t, 0) + 1
        return cls(n_triv, n_rand, masks)


def is_decodable(state: ColorState, n_bits: int) -> bool:
    """True when the correlated masks present span all n_bits logical bits.

    Recovering n encoded bits needs n independent correlated colors; for
    n_bits == 1 any correlated tag suffices.
    """
    if n_bits == 1:
        return bool(state.mask_counts)
    return gf2_span_rank(state.mask_counts.keys()) >= n_bits


def tags_decodable(tags: np.ndarray, n_bits: int) -> bool:
    """Fast-path decodability check on an int64 tag array."""
    if n_bits == 1:
        return bool(np.any(tags > 0))
    present = np.unique(tags[tags > 0])
    return gf2_span_rank(int(m) for m in present) >= n_bits


def randomization_time(trace: Sequence[ColorState], n_bits: int) -> float:
    """First step index at which the trace stops being decodable.

    ``trace[0]`` is the initial coloring and must be decodable. Returns
    ``NEVER`` when decodability survives the whole trace.
    """
    if not trace:
        raise ValueError("empty trace")
    if not is_decodable(trace[0], n_bits):
        raise ValueError("trace does not begin decodable")
    for step, state in enumerate(trace):
        if not is_decodable(state, n_bits):
            return float(step)
    return NEVER
