"""Finite-size-scaling data collapse: cost function, windows, minimization.

Points (control, scale, y, d) rescale to x = (control - p_c) * scale^(1/nu).
The collapse cost compares each interior point against the straight line
through its neighbours,

    eps = (1/n_terms) * sum_i (y_i - ybar_i)^2 / Delta_i^2,
    ybar_i    = ((x_{i+1}-x_i) y_{i-1} - (x_{i-1}-x_i) y_{i+1}) / (x_{i+1}-x_{i-1}),
    Delta_i^2 = d_i^2 + ((x_{i+1}-x_i)/(x_{i+1}-x_{i-1}))^2 d_{i-1}^2
                      + ((x_{i-1}-x_i)/(x_{i+1}-x_{i-1}))^2 d_{i+1}^2,

averaged over windows [x_min, x_max] drawn from normal distributions near the
transition. A good collapse sits near eps = 1. Interior points with
x_{i+1} = x_{i-1} are skipped with a warning and removed from the prefactor.

minimize() scans a coarse grid over the search box, refines by Nelder-Mead,
and derives error bars from the connected sublevel set {eps <= 2 eps_min}
traced by lazy flood fill on a refinement grid.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy import optimize

from .seeding import substream


class CollapseError(Exception):
    pass


class WindowTooSmallError(CollapseError):
    pass


class WindowInfeasibleError(CollapseError):
    pass


@dataclass(frozen=True)
class CollapsePoint:
    control: float
    scale: float
    y: float
    d: float

    def __post_init__(self):
        if self.d <= 0:
            raise ValueError("standard error d must be positive")
        if self.scale <= 0:
            raise ValueError("lengthscale must be positive")


@dataclass(frozen=True)
class WindowSpec:
    """Normal distributions for the window endpoints, in rescaled-x units."""

    mu_min: float = -2.2
    sigma_min: float = 0.3
    mu_max: float = 0.1
    sigma_max: float = 0.3


@dataclass
class CollapseResult:
    p_c: float
    nu: float
    p_c_err: float
    nu_err: float
    eps_min: float
    boundary_warning: bool = False

    def as_dict(self) -> dict:
        return {
            "p_c": self.p_c, "nu": self.nu, "p_c_err": self.p_c_err,
            "nu_err": self.nu_err, "eps_min": self.eps_min,
            "boundary_warning": self.boundary_warning,
        }


def rescale(points: Sequence[CollapsePoint], p_c: float, nu: float):
    """Sorted (x, y, d) arrays with x = (control - p_c) * scale^(1/nu)."""
    if nu == 0:
        raise ValueError("nu must be nonzero")
    x = np.array([(p.control - p_c) * p.scale ** (1.0 / nu) for p in points])
    y = np.array([p.y for p in points])
    d = np.array([p.d for p in points])
    order = np.argsort(x, kind="stable")
    return x[order], y[order], d[order]


def _interior_terms(x: np.ndarray, y: np.ndarray, d: np.ndarray) -> np.ndarray:
    """Per-interior-point cost contributions; NaN marks degenerate spacing."""
    n = len(x)
    terms = np.full(n, np.nan)
    if n < 3:
        return terms
    span = x[2:] - x[:-2]
    with np.errstate(divide="ignore", invalid="ignore"):
        wl = (x[2:] - x[1:-1]) / span
        wr = (x[:-2] - x[1:-1]) / span
        ybar = wl * y[:-2] - wr * y[2:]
        delta2 = d[1:-1] ** 2 + wl ** 2 * d[:-2] ** 2 + wr ** 2 * d[2:] ** 2
        vals = (y[1:-1] - ybar) ** 2 / delta2
    vals = np.where(span == 0, np.nan, vals)
    terms[1:-1] = vals
    return terms


def cost(triples, x_min: float, x_max: float) -> float:
    """Windowed collapse cost over sorted triples (x, y, d).

    Raises WindowTooSmallError with fewer than 3 points in [x_min, x_max] and
    CollapseError when every interior point has degenerate spacing.
    """
    x, y, d = triples
    lo = int(np.searchsorted(x, x_min, side="left"))
    hi = int(np.searchsorted(x, x_max, side="right"))
    if hi - lo < 3:
        raise WindowTooSmallError(
            f"only {hi - lo} points in window [{x_min:g}, {x_max:g}]")
    terms = _interior_terms(x[lo:hi], y[lo:hi], d[lo:hi])
    inner = terms[1:-1]
    n_bad = int(np.isnan(inner).sum())
    if n_bad:
        warnings.warn(f"skipped {n_bad} interior points with x_(i+1) = x_(i-1)")
    if n_bad == len(inner):
        raise CollapseError("all interior points degenerate in x")
    return float(np.nanmean(inner))


def draw_windows(window_spec: WindowSpec, n_windows: int, seed: int,
                 max_redraws: int = 100) -> np.ndarray:
    """(n_windows, 2) ordered window endpoints; redraws enforce x_min < x_max."""
    rng = substream(seed, "windows")
    out = np.empty((n_windows, 2))
    for k in range(n_windows):
        for attempt in range(max_redraws + 1):
            lo = rng.normal(window_spec.mu_min, window_spec.sigma_min)
            hi = rng.normal(window_spec.mu_max, window_spec.sigma_max)
            if lo < hi:
                out[k] = (lo, hi)
                break
        else:
            raise WindowInfeasibleError("could not draw an ordered window in "
                                        f"{max_redraws} attempts")
    return out


class _CostTable:
    """Prefix sums of interior contributions at fixed (p_c, nu).

    The points inside any window form a contiguous slice of the sorted arrays,
    and a slice's interior contributions coincide with the global ones, so a
    window evaluation is two searchsorted calls plus two prefix-sum lookups.
    Degenerate terms (NaN) are dropped from both the sum and the count.
    """

    def __init__(self, points: Sequence[CollapsePoint], p_c: float, nu: float):
        x = np.array([(p.control - p_c) * p.scale ** (1.0 / nu) for p in points])
        y = np.array([p.y for p in points])
        d = np.array([p.d for p in points])
        scales = np.array([p.scale for p in points])
        order = np.argsort(x, kind="stable")
        self.x, self.scales = x[order], scales[order]
        terms = _interior_terms(self.x, y[order], d[order])
        good = ~np.isnan(terms)
        vals = np.where(good, terms, 0.0)
        self.cum = np.concatenate([[0.0], np.cumsum(vals)])
        self.cnt = np.concatenate([[0], np.cumsum(good.astype(np.int64))])

    def window_cost(self, x_min: float, x_max: float, min_points: int = 5,
                    min_scales: int = 1) -> float:
        """Mean interior contribution inside [x_min, x_max].

        NaN marks an infeasible window: fewer than min_points points (5 gives
        the spec's three interior points), fewer than min_scales distinct
        lengthscales, or no valid interior term. Stretched rescalings make
        each curve locally linear, so windows holding one curve segment, or
        only a handful of points, score spuriously low; minimize() therefore
        demands every scale plus a larger point quorum per window.
        """
        lo = int(np.searchsorted(self.x, x_min, side="left"))
        hi = int(np.searchsorted(self.x, x_max, side="right"))
        if hi - lo < max(min_points, 5):
            return math.nan
        if min_scales > 1 and len(np.unique(self.scales[lo:hi])) < min_scales:
            return math.nan
        a, b = lo + 1, hi - 1
        n = int(self.cnt[b] - self.cnt[a])
        if n == 0:
            return math.nan
        return float((self.cum[b] - self.cum[a]) / n)


def windowed_cost(points: Sequence[CollapsePoint], p_c: float, nu: float,
                  window_spec: WindowSpec, n_windows: int, seed: int) -> float:
    """Mean single-window cost over freshly drawn windows.

    Windows that end up infeasible at this (p_c, nu) are redrawn up to the cap
    before giving up.
    """
    rng = substream(seed, "windows")
    table = _CostTable(points, p_c, nu)
    total = 0.0
    for _ in range(n_windows):
        for attempt in range(101):
            lo = rng.normal(window_spec.mu_min, window_spec.sigma_min)
            hi = rng.normal(window_spec.mu_max, window_spec.sigma_max)
            if lo >= hi:
                continue
            val = table.window_cost(lo, hi)
            if not math.isnan(val):
                total += val
                break
        else:
            raise WindowInfeasibleError("window infeasible after 100 redraws")
    return total / n_windows


def _mean_cost(table: _CostTable, windows: np.ndarray, min_points: int,
               min_scales: int) -> float:
    """Average over pre-drawn windows; inf unless 3/4 of them are feasible."""
    vals = np.array([table.window_cost(lo, hi, min_points, min_scales)
                     for lo, hi in windows])
    good = ~np.isnan(vals)
    if good.sum() * 4 < len(vals) * 3:
        return math.inf
    return float(vals[good].mean())


class _Evaluator:
    """Vectorized windowed-cost evaluation reused across (p_c, nu) probes."""

    def __init__(self, points: Sequence[CollapsePoint], windows: np.ndarray,
                 min_scales: int, min_points: int, min_span_frac: float = 0.2):
        self.c = np.array([p.control for p in points])
        self.s = np.array([p.scale for p in points])
        self.y = np.array([p.y for p in points])
        self.d = np.array([p.d for p in points])
        self.scale_values = np.unique(self.s)
        self.windows = windows
        self.min_scales = min_scales
        self.min_points = max(min_points, 5)
        self.min_span = min_span_frac * float(self.y.max() - self.y.min())

    def eps(self, p_c: float, nu: float) -> float:
        x = (self.c - p_c) * self.s ** (1.0 / nu)
        o = np.argsort(x, kind="stable")
        x = x[o]
        y = self.y[o]
        terms = _interior_terms(x, y, self.d[o])
        good = ~np.isnan(terms)
        cum = np.concatenate([[0.0], np.cumsum(np.where(good, terms, 0.0))])
        cnt = np.concatenate([[0], np.cumsum(good.astype(np.int64))])
        lo = np.searchsorted(x, self.windows[:, 0], side="left")
        hi = np.searchsorted(x, self.windows[:, 1], side="right")
        feasible = (hi - lo) >= self.min_points
        if self.min_scales > 1:
            s = self.s[o]
            marks = np.concatenate(
                [np.zeros((len(self.scale_values), 1), np.int64),
                 np.cumsum(s[None, :] == self.scale_values[:, None], axis=1)],
                axis=1)
            present = (marks[:, hi] - marks[:, lo]) > 0
            feasible &= present.sum(axis=0) >= self.min_scales
        # the windows live "near the transition": a window where the
        # observable is flat (saturated phase) collapses trivially and must
        # not count as evidence
        if self.min_span > 0 and feasible.any():
            # reduceat over index pairs (lo, hi) spans y[lo:hi]; the pad value
            # keeps hi == len legal and empty windows are masked out anyway
            yp = np.append(y, y[-1])
            idx = np.empty(2 * len(lo), dtype=np.int64)
            idx[0::2] = lo
            idx[1::2] = np.maximum(hi, lo)
            spans = (np.maximum.reduceat(yp, idx)[0::2]
                     - np.minimum.reduceat(yp, idx)[0::2])
            feasible &= spans >= self.min_span
        a = lo + 1
        b = np.maximum(hi - 1, a)
        n_terms = cnt[b] - cnt[a]
        feasible &= n_terms > 0
        if feasible.sum() * 4 < len(self.windows) * 3:
            return math.inf
        eps = (cum[b] - cum[a])[feasible] / n_terms[feasible]
        return float(eps.mean())


def estimate_crossing(points: Sequence[CollapsePoint]) -> float:
    """Median control value where curves of consecutive scales cross.

    Works on the raw (unrescaled) curves: for each pair of adjacent scales the
    y-difference is linearly interpolated over the shared control range and
    every sign change contributes one crossing. Standard anchor for centering
    the p_c search box on the transition.
    """
    by_scale = {}
    for p in points:
        by_scale.setdefault(p.scale, []).append((p.control, p.y))
    scales = sorted(by_scale)
    if len(scales) < 2:
        raise CollapseError("crossing estimate needs at least two scales")
    noise = float(np.median([p.d for p in points]))
    crossings = []   # (significance, control)
    for s1, s2 in zip(scales, scales[1:]):
        a = np.array(sorted(by_scale[s1]))
        b = np.array(sorted(by_scale[s2]))
        lo = max(a[0, 0], b[0, 0])
        hi = min(a[-1, 0], b[-1, 0])
        if lo >= hi:
            continue
        grid = np.linspace(lo, hi, 201)
        diff = (np.interp(grid, a[:, 0], a[:, 1])
                - np.interp(grid, b[:, 0], b[:, 1]))
        flips = np.flatnonzero(np.sign(diff[:-1]) * np.sign(diff[1:]) < 0)
        # noise makes the near-equal tails wiggle through zero; rank each
        # crossing by how far the difference swings on both of its sides
        bounds = np.concatenate([[0], flips + 1, [len(diff)]])
        for j, k in enumerate(flips):
            left = np.abs(diff[bounds[j]:k + 1]).max()
            right = np.abs(diff[k + 1:bounds[j + 2]]).max()
            t = diff[k] / (diff[k] - diff[k + 1])
            crossings.append((min(left, right),
                              grid[k] + t * (grid[k + 1] - grid[k])))
    if not crossings:
        raise CollapseError("no curve crossings found")
    strong = [c for sig, c in crossings if sig >= 3.0 * noise]
    if not strong:
        strong = [max(crossings)[1]]
    return float(np.median(strong))


@dataclass
class CollapseDiagnostics:
    grid_p: np.ndarray
    grid_nu: np.ndarray
    eps_grid: np.ndarray
    region: np.ndarray
    windows: np.ndarray = field(default=None)


def minimize(points: Sequence[CollapsePoint], search_box, window_spec: WindowSpec,
             seed: int, *, n_windows: int = 100, coarse: Tuple[int, int] = (25, 25),
             refine: Tuple[int, int] = (200, 200),
             return_diagnostics: bool = False):
    """Fit (p_c, nu) by minimizing the windowed collapse cost.

    search_box is ((p_c_lo, p_c_hi), (nu_lo, nu_hi)). The same window draws
    are reused for every evaluation, so the landscape is deterministic given
    the seed. Error bars are half-widths of the bounding box of the connected
    {eps <= 2 eps_min} region around the minimum on the refinement grid; a
    region or minimum touching the box edge sets boundary_warning.
    """
    (p_lo, p_hi), (nu_lo, nu_hi) = search_box
    if not (p_lo < p_hi and 0 < nu_lo < nu_hi):
        raise ValueError("invalid search box")
    if len(points) < 5:
        raise ValueError("too few points for a collapse")
    windows = draw_windows(window_spec, n_windows, seed)
    n_scales = len({p.scale for p in points})
    evaluator = _Evaluator(points, windows, n_scales, 2 * n_scales)

    def eps_at(p_c: float, nu: float) -> float:
        if not (p_lo <= p_c <= p_hi and nu_lo <= nu <= nu_hi):
            return math.inf
        return evaluator.eps(p_c, nu)

    ps = np.linspace(p_lo, p_hi, coarse[0])
    nus = np.linspace(nu_lo, nu_hi, coarse[1])
    best = (math.inf, ps[0], nus[0])
    for p in ps:
        for nu in nus:
            e = eps_at(p, nu)
            if e < best[0]:
                best = (e, p, nu)
    if math.isinf(best[0]):
        raise CollapseError("cost is infeasible everywhere in the search box")

    res = optimize.minimize(lambda th: eps_at(th[0], th[1]),
                            np.array(best[1:]), method="Nelder-Mead",
                            options={"xatol": 1e-6, "fatol": 1e-10,
                                     "maxiter": 2000})
    eps_min, p_best, nu_best = float(res.fun), float(res.x[0]), float(res.x[1])
    if best[0] < eps_min:
        eps_min, p_best, nu_best = best

    # lazy flood fill of {eps <= 2 eps_min} on the refinement grid
    gp = np.linspace(p_lo, p_hi, refine[0])
    gnu = np.linspace(nu_lo, nu_hi, refine[1])
    i0 = int(np.clip(np.searchsorted(gp, p_best), 0, refine[0] - 1))
    j0 = int(np.clip(np.searchsorted(gnu, nu_best), 0, refine[1] - 1))
    eps_grid = np.full(refine, np.nan)
    region = np.zeros(refine, dtype=bool)
    threshold = 2.0 * eps_min
    stack = [(i0, j0)]
    visited = {(i0, j0)}
    while stack:
        i, j = stack.pop()
        e = eps_at(gp[i], gnu[j])
        eps_grid[i, j] = e
        if e > threshold:
            continue
        region[i, j] = True
        for di, dj in ((1, 0), (-1, 0), (0, 1), (0, -1)):
            ni, nj = i + di, j + dj
            if 0 <= ni < refine[0] and 0 <= nj < refine[1] and (ni, nj) not in visited:
                visited.add((ni, nj))
                stack.append((ni, nj))

    boundary = (p_best in (p_lo, p_hi) or nu_best in (nu_lo, nu_hi))
    if region.any():
        ii, jj = np.where(region)
        p_err = (gp[ii.max()] - gp[ii.min()]) / 2.0
        nu_err = (gnu[jj.max()] - gnu[jj.min()]) / 2.0
        boundary = boundary or bool(
            ii.min() == 0 or ii.max() == refine[0] - 1
            or jj.min() == 0 or jj.max() == refine[1] - 1)
    else:
        p_err = (p_hi - p_lo) / refine[0]
        nu_err = (nu_hi - nu_lo) / refine[1]
    if boundary:
        warnings.warn("collapse minimum or error region touches the search box")
    result = CollapseResult(p_best, nu_best, p_err, nu_err, eps_min, boundary)
    if return_diagnostics:
        return result, CollapseDiagnostics(gp, gnu, eps_grid, region, windows)
    return result
