"""GF(2) helpers on int bitsets and word-packed numpy arrays.

Bit i of a row lives in word i // 64 at position i % 64, matching the
little-endian byte order of a C-contiguous uint64 array, so packed rows and
Python int bitsets convert with tobytes/from_bytes.
"""

from __future__ import annotations

from typing import Iterable, List, Sequence

import numpy as np


def n_words(n_bits: int) -> int:
    return (n_bits + 63) >> 6


def pack_int(value: int, width: int) -> np.ndarray:
    """Pack a nonnegative int bitset into a uint64 word array of `width` words."""
    if value < 0:
        raise ValueError("bitsets are nonnegative")
    return np.frombuffer(value.to_bytes(8 * width, "little"), dtype=np.uint64).copy()


def unpack_int(words: np.ndarray) -> int:
    return int.from_bytes(np.ascontiguousarray(words).tobytes(), "little")


def gf2_rank(rows: Iterable[int]) -> int:
    """Rank of a bit-matrix given as int bitsets, by Gaussian elimination."""
    pivots: List[int] = []
    for row in rows:
        for p in pivots:
            low = p & -p
            if row & low:
                row ^= p
        if row:
            pivots.append(row)
    return len(pivots)


def gf2_rank_dense(matrix: Sequence[Sequence[int]]) -> int:
    """Naive O(n^3) elimination on a 0/1 integer matrix.

    Deliberately kept independent of gf2_rank: it is the oracle the bit-packed
    route is checked against.
    """
    m = [list(row) for row in matrix]
    if not m:
        return 0
    n_rows, n_cols = len(m), len(m[0])
    rank = 0
    for col in range(n_cols):
        pivot = None
        for r in range(rank, n_rows):
            if m[r][col]:
                pivot = r
                break
        if pivot is None:
            continue
        m[rank], m[pivot] = m[pivot], m[rank]
        for r in range(n_rows):
            if r != rank and m[r][col]:
                for c in range(n_cols):
                    m[r][c] ^= m[rank][c]
        rank += 1
        if rank == n_rows:
            break
    return rank


def gf2_span_rank(masks: Iterable[int]) -> int:
    """Rank of the span of small integer masks (n-bit color masks)."""
    return gf2_rank(masks)


def popcount(value: int) -> int:
    return bin(value).count("1")
