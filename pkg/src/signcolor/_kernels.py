"""JIT kernels for the packed stabilizer tableau.

Rows live in C-contiguous uint64 arrays of shape (2n, W): rows 0..n-1 are
destabilizers, rows n..2n-1 stabilizers. Bit s of a row sits in word s >> 6 at
position s & 63. Phases are exponents of i (mod 4) under the convention
P = i^phase * X^x Z^z; colors is the int64 tag array of the stabilizer rows
(0 trivial, -1 randomized, >0 correlated mask).

All arithmetic stays in uint64 on purpose: numba promotes mixed
signed/unsigned expressions to float64.
"""

from __future__ import annotations

import numpy as np
from numba import njit

_U0 = np.uint64(0)
_U1 = np.uint64(1)
_U2 = np.uint64(2)
_U3 = np.uint64(3)
_U4 = np.uint64(4)
_U56 = np.uint64(56)
_M1 = np.uint64(0x5555555555555555)
_M2 = np.uint64(0x3333333333333333)
_M4 = np.uint64(0x0F0F0F0F0F0F0F0F)
_H01 = np.uint64(0x0101010101010101)


@njit(cache=True, inline="always")
def _popcount64(v):
    v = v - ((v >> _U1) & _M1)
    v = (v & _M2) + ((v >> _U2) & _M2)
    v = (v + (v >> _U4)) & _M4
    return (v * _H01) >> _U56


@njit(cache=True)
def apply_xxzz_pairs(xs, zs, phases, pairs, track_phase):
    """Conjugate every row by exp[-i pi/4 (XX+ZZ)] on each (a, b) pair in order.

    Per row the update is c1 = xa^xb, c2 = za^zb; z-bits flip by c1, x-bits by
    c2, and the phase gains c1 + 3*c2 (mod 4). This closed form is checked
    against the generated conjugation table and a dense oracle in the tests.
    """
    rows = xs.shape[0]
    for g in range(pairs.shape[0]):
        a = pairs[g, 0]
        b = pairs[g, 1]
        wa = a >> 6
        wb = b >> 6
        ba = np.uint64(a & 63)
        bb = np.uint64(b & 63)
        for i in range(rows):
            xa = (xs[i, wa] >> ba) & _U1
            za = (zs[i, wa] >> ba) & _U1
            xb = (xs[i, wb] >> bb) & _U1
            zb = (zs[i, wb] >> bb) & _U1
            c1 = xa ^ xb
            c2 = za ^ zb
            zs[i, wa] ^= c1 << ba
            zs[i, wb] ^= c1 << bb
            xs[i, wa] ^= c2 << ba
            xs[i, wb] ^= c2 << bb
            if track_phase:
                phases[i] = (np.uint64(phases[i]) + c1 + _U3 * c2) & _U3
    return


@njit(cache=True)
def measure_x_layer(xs, zs, phases, colors, sites, coins, policy,
                    track_phase, update_destab, outcomes):
    """Measure Pauli X on each site in order, Aaronson-Gottesman style.

    policy 0 picks the lowest-index anticommuting stabilizer row as pivot;
    policy 1 applies the sign-color priority (trivial, correlated, randomized)
    with lowest-index tie-break. coins supplies one fair bit per site; it is
    consumed positionally whether or not the measurement turns out random.

    outcomes receives +1/-1 per site. With track_phase or update_destab off,
    outcomes that would need the skipped bookkeeping are reported as 0.
    """
    n = colors.shape[0]
    W = xs.shape[1]
    for k in range(sites.shape[0]):
        site = sites[k]
        w = site >> 6
        bpos = np.uint64(site & 63)
        pivot = -1
        pivot_class = 3
        for i in range(n, 2 * n):
            if (zs[i, w] >> bpos) & _U1:
                if policy == 0:
                    pivot = i
                    break
                tag = colors[i - n]
                if tag == 0:
                    cls = 0
                elif tag == -1:
                    cls = 2
                else:
                    cls = 1
                if cls < pivot_class:
                    pivot_class = cls
                    pivot = i
                    if cls == 0:
                        break
        if pivot >= 0:
            # random outcome: fold the pivot into every other anticommuting row
            ptag = colors[pivot - n]
            lo = 0 if update_destab else n
            for i in range(lo, 2 * n):
                if i == pivot:
                    continue
                if (zs[i, w] >> bpos) & _U1:
                    if track_phase and i >= n:
                        cross = _U0
                        for ww in range(W):
                            cross += _popcount64(zs[i, ww] & xs[pivot, ww])
                        phases[i] = (np.uint64(phases[i])
                                     + np.uint64(phases[pivot])
                                     + _U2 * cross) & _U3
                    for ww in range(W):
                        xs[i, ww] ^= xs[pivot, ww]
                        zs[i, ww] ^= zs[pivot, ww]
                    if i >= n:
                        t = colors[i - n]
                        if ptag == -1 or t == -1:
                            colors[i - n] = -1
                        else:
                            colors[i - n] = t ^ ptag
            if update_destab:
                d = pivot - n
                for ww in range(W):
                    xs[d, ww] = xs[pivot, ww]
                    zs[d, ww] = zs[pivot, ww]
                phases[d] = phases[pivot]
            for ww in range(W):
                xs[pivot, ww] = _U0
                zs[pivot, ww] = _U0
            xs[pivot, w] = _U1 << bpos
            phases[pivot] = _U2 * np.uint64(coins[k])
            colors[pivot - n] = -1
            outcomes[k] = 1 - 2 * np.int8(coins[k])
        else:
            # X_site is in +-group: state, signs and colors are untouched
            if track_phase and update_destab:
                xacc = np.zeros(W, np.uint64)
                zacc = np.zeros(W, np.uint64)
                pacc = _U0
                for j in range(n):
                    if (zs[j, w] >> bpos) & _U1:
                        row = j + n
                        cross = _U0
                        for ww in range(W):
                            cross += _popcount64(zacc[ww] & xs[row, ww])
                        pacc = (pacc + np.uint64(phases[row]) + _U2 * cross) & _U3
                        for ww in range(W):
                            xacc[ww] ^= xs[row, ww]
                            zacc[ww] ^= zs[row, ww]
                outcomes[k] = 1 if pacc == _U0 else -1
            else:
                outcomes[k] = 0
    return


@njit(cache=True)
def expectation_packed(xs, zs, phases, n, px, pz, pphase):
    """<P> of the stabilized state for P = i^pphase X^px Z^pz: +1, -1 or 0.

    Decomposes P over the stabilizer generators through the destabilizer
    pairing: destabilizer j anticommutes with P exactly when stabilizer j
    enters the product. Requires maintained destabilizers and phases.
    """
    W = xs.shape[1]
    xacc = np.zeros(W, np.uint64)
    zacc = np.zeros(W, np.uint64)
    pacc = _U0
    for j in range(n):
        par = _U0
        for ww in range(W):
            par ^= (px[ww] & zs[j, ww]) ^ (pz[ww] & xs[j, ww])
        if _popcount64(par) & _U1:
            row = j + n
            cross = _U0
            for ww in range(W):
                cross += _popcount64(zacc[ww] & xs[row, ww])
            pacc = (pacc + np.uint64(phases[row]) + _U2 * cross) & _U3
            for ww in range(W):
                xacc[ww] ^= xs[row, ww]
                zacc[ww] ^= zs[row, ww]
    for ww in range(W):
        if xacc[ww] != px[ww] or zacc[ww] != pz[ww]:
            return 0
    d = (np.uint64(pphase) + _U4 - pacc) & _U3
    if d == _U0:
        return 1
    if d == _U2:
        return -1
    return 0


@njit(cache=True)
def expectations_batch(xs, zs, phases, bx, bz, bph, out):
    """expectation_packed for every row of the (m, W) benchmark arrays."""
    for i in range(bx.shape[0]):
        out[i] = expectation_packed(xs, zs, phases, xs.shape[0] // 2,
                                    bx[i], bz[i], bph[i])
    return


@njit(cache=True)
def gf2_rank_packed(mat, n_cols):
    """Rank of a copy-safe packed bit matrix (rows, words) over GF(2)."""
    rows = mat.shape[0]
    W = mat.shape[1]
    rank = 0
    for col in range(n_cols):
        w = col >> 6
        b = np.uint64(col & 63)
        pivot = -1
        for r in range(rank, rows):
            if (mat[r, w] >> b) & _U1:
                pivot = r
                break
        if pivot < 0:
            continue
        if pivot != rank:
            for ww in range(W):
                tmp = mat[rank, ww]
                mat[rank, ww] = mat[pivot, ww]
                mat[pivot, ww] = tmp
        for r in range(rank + 1, rows):
            if (mat[r, w] >> b) & _U1:
                for ww in range(W):
                    mat[r, ww] ^= mat[rank, ww]
        rank += 1
        if rank == rows:
            break
    return rank
