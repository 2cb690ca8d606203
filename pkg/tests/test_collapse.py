"""Collapse cost function, windows and minimization."""

import warnings

import numpy as np
import pytest

from signcolor import stochastic as sm
from signcolor.collapse import (CollapsePoint, CollapseResult, WindowSpec,
                                WindowTooSmallError, cost, minimize, rescale,
                                windowed_cost)


def synthetic_points(seed: int, noise: float = 0.01, P_c: float = 0.5,
                     nu: float = 1.0, sizes=(64, 128, 256, 512), n_grid: int = 13):
    """Perfect universal_G master curves at T = log2 L plus Gaussian noise."""
    rng = np.random.default_rng(seed)
    pts = []
    for L in sizes:
        T = int(np.log2(L))
        for P in np.linspace(P_c - 0.22, P_c + 0.12, n_grid):
            y = float(sm.universal_G((P - P_c) * T ** (1.0 / nu), 1.0))
            pts.append(CollapsePoint(control=float(P), scale=float(T),
                                     y=y + rng.normal(0, noise), d=noise))
    return pts


class TestRescale:
    def test_centered_control_gives_zero(self):
        pts = [CollapsePoint(0.3, s, 1.0, 0.1) for s in (2, 4, 8)]
        x, _, _ = rescale(pts, 0.3, 1.7)
        assert np.allclose(x, 0.0)

    def test_arithmetic(self):
        pts = [CollapsePoint(0.4, 2.0, 1.0, 0.1)]
        x, _, _ = rescale(pts, 0.3, 1.0)
        assert x[0] == pytest.approx(0.2)

    def test_sorted_output(self):
        pts = [CollapsePoint(c, 4.0, 0.0, 1.0) for c in (0.9, 0.1, 0.5)]
        x, _, _ = rescale(pts, 0.0, 1.0)
        assert np.all(np.diff(x) > 0)

    def test_validation(self):
        with pytest.raises(ValueError):
            CollapsePoint(0.1, 1.0, 0.0, 0.0)
        with pytest.raises(ValueError):
            CollapsePoint(0.1, 0.0, 0.0, 0.1)


class TestCost:
    def test_constant_data_costs_nothing(self):
        pts = [CollapsePoint(c, 1.0, 2.5, 0.3) for c in np.linspace(0, 1, 9)]
        assert cost(rescale(pts, 0.0, 1.0), -10, 10) == pytest.approx(0.0)

    def test_collinear_data_costs_nothing(self):
        pts = [CollapsePoint(c, 1.0, 3 * c - 1, 0.2) for c in np.linspace(0, 1, 9)]
        assert cost(rescale(pts, 0.0, 1.0), -10, 10) == pytest.approx(0.0)

    def test_noise_at_stated_error_costs_about_one(self):
        rng = np.random.default_rng(8)
        xs = np.linspace(-2, 2, 400)
        master = np.tanh(-xs)
        pts = [CollapsePoint(x, 1.0, m + rng.normal(0, 0.05), 0.05)
               for x, m in zip(xs, master)]
        eps = cost(rescale(pts, 0.0, 1.0), -2.5, 2.5)
        assert 0.75 < eps < 1.3

    def test_window_too_small(self):
        pts = [CollapsePoint(c, 1.0, 0.0, 1.0) for c in (0.0, 0.5, 1.0)]
        with pytest.raises(WindowTooSmallError):
            cost(rescale(pts, 0.0, 1.0), 0.4, 0.6)

    def test_degenerate_x_skipped_with_warning(self):
        pts = [CollapsePoint(c, 1.0, y, 0.5)
               for c, y in [(0.0, 0.0), (0.1, 5.0), (0.1, 1.0), (0.1, 2.0), (0.4, 0.3)]]
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            val = cost(rescale(pts, 0.0, 1.0), -1, 1)
        assert any("skipped" in str(w.message) for w in caught)
        assert np.isfinite(val)

    def test_affine_invariance(self):
        rng = np.random.default_rng(5)
        base = [CollapsePoint(c, 2.0, float(rng.normal()), 0.4)
                for c in np.linspace(0, 1, 20)]
        scaled = [CollapsePoint(p.control, p.scale, 3.0 * p.y + 7.0, 3.0 * p.d)
                  for p in base]
        a = cost(rescale(base, 0.2, 1.3), -5, 5)
        b = cost(rescale(scaled, 0.2, 1.3), -5, 5)
        assert a == pytest.approx(b, rel=1e-12)

    def test_permutation_invariance(self):
        rng = np.random.default_rng(6)
        pts = [CollapsePoint(c, 2.0, float(rng.normal()), 0.4)
               for c in np.linspace(0, 1, 15)]
        shuffled = [pts[i] for i in rng.permutation(len(pts))]
        assert cost(rescale(pts, 0.1, 1.0), -5, 5) == pytest.approx(
            cost(rescale(shuffled, 0.1, 1.0), -5, 5), rel=1e-12)


class TestWindowedCost:
    def test_degenerate_normals_equal_single_window(self):
        pts = synthetic_points(1)
        spec = WindowSpec(-1.5, 0.0, 0.5, 0.0)
        w = windowed_cost(pts, 0.5, 1.0, spec, n_windows=7, seed=3)
        single = cost(rescale(pts, 0.5, 1.0), -1.5, 0.5)
        assert w == pytest.approx(single)

    def test_seed_stability_within_five_percent(self):
        pts = synthetic_points(2)
        spec = WindowSpec(-2.2, 0.3, 0.1, 0.3)
        a = windowed_cost(pts, 0.5, 1.0, spec, n_windows=100, seed=1)
        b = windowed_cost(pts, 0.5, 1.0, spec, n_windows=100, seed=999)
        assert abs(a - b) / a < 0.05


BOX = ((0.40, 0.60), (0.4, 2.5))
SPEC = WindowSpec(-2.2, 0.3, 0.1, 0.3)
# step-shaped decodability curves are constrained through the drop, not the
# plateau, so their windows are centered on the transition
DT_SPEC = WindowSpec(-1.0, 0.3, 1.0, 0.3)


class TestMinimize:
    def test_recovers_planted_parameters(self):
        pts = synthetic_points(11)
        res = minimize(pts, BOX, DT_SPEC, seed=5)
        assert abs(res.p_c - 0.5) <= max(2.0 * res.p_c_err, 0.005)
        assert abs(res.nu - 1.0) <= max(2.0 * res.nu_err, 0.05)
        assert res.eps_min < 3.0

    def test_recovers_other_planted_exponent(self):
        pts = synthetic_points(21, P_c=0.45, nu=1.4)
        res = minimize(pts, ((0.35, 0.55), (0.4, 2.5)), DT_SPEC, seed=2)
        assert abs(res.p_c - 0.45) <= max(2.0 * res.p_c_err, 0.005)
        assert abs(res.nu - 1.4) <= max(2.0 * res.nu_err, 0.1)

    def test_deterministic(self):
        pts = synthetic_points(12)
        a = minimize(pts, BOX, DT_SPEC, seed=7)
        b = minimize(pts, BOX, DT_SPEC, seed=7)
        assert a == b

    def test_boundary_warning(self):
        pts = synthetic_points(13)
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            res = minimize(pts, ((0.52, 0.60), (0.4, 2.5)), DT_SPEC, seed=7)
        assert res.boundary_warning
        assert any("search box" in str(w.message) for w in caught)

    def test_too_few_points_rejected(self):
        with pytest.raises(ValueError):
            minimize(synthetic_points(1)[:4], BOX, DT_SPEC, seed=1)


class TestEstimateCrossing:
    def test_finds_planted_crossing(self):
        from signcolor.collapse import estimate_crossing
        vals = [estimate_crossing(synthetic_points(s)) for s in range(6)]
        assert abs(np.median(vals) - 0.5) < 0.01
        assert all(abs(v - 0.5) < 0.04 for v in vals)

    def test_needs_two_scales(self):
        from signcolor.collapse import CollapseError, estimate_crossing
        pts = [p for p in synthetic_points(3) if p.scale == 6.0]
        with pytest.raises(CollapseError):
            estimate_crossing(pts)
