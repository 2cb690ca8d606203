"""Independent-clock randomization model: closed forms and Monte Carlo.

Every one of L signs independently becomes randomized with probability P per
step and never recovers. The single-sign randomization time is geometric,
the system-level time is its L-th order statistic, and at logarithmic depths
T = a log2 L the decodability 1 - (1 - (1-P)^(T+1))^L sharpens into a step at
P_c = 1 - 2^(-1/a) with correlation-length exponent 1, approaching the
universal profile G[x] = 1 - exp(-2^(-1/a) exp(-2^(1/a) x)) for x = (P-P_c) T.

All closed forms are evaluated through exp/log1p so they stay accurate up to
the L ~ 2^20 sizes used in the convergence studies.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import optimize, special


@dataclass(frozen=True)
class StochasticParams:
    P: float
    L: int
    a: float = 1.0

    def __post_init__(self):
        if not 0.0 <= self.P <= 1.0:
            raise ValueError("P must lie in [0, 1]")
        if self.L < 1:
            raise ValueError("L must be positive")
        if self.a <= 0:
            raise ValueError("log coefficient a must be positive")


def geometric_pdf_cdf(P: float, t: int):
    """PDF and CDF of the single-sign randomization time."""
    if t < 0:
        raise ValueError("t must be a nonnegative integer")
    f = (1.0 - P) ** t * P
    F = -math.expm1((t + 1) * math.log1p(-P)) if P < 1.0 else 1.0
    return f, F


def _cdf_power(P: float, t, L: int):
    """(1 - (1-P)^t)^L, elementwise stable for large L."""
    t = np.asarray(t, dtype=float)
    if P >= 1.0:
        return np.where(t > 0, 1.0, 0.0)
    u = np.exp(t * math.log1p(-P))          # (1-P)^t
    with np.errstate(divide="ignore"):
        out = np.exp(L * np.log1p(-u))
    return np.where(u >= 1.0, 0.0, out)


def order_statistic_pdf(P: float, L: int, t):
    """PDF of the slowest of L independent geometric clocks."""
    t = np.asarray(t)
    if np.any(t < 0):
        raise ValueError("t must be nonnegative")
    return _cdf_power(P, t + 1, L) - _cdf_power(P, t, L)


def closed_form_decodability(P: float, L: int, T) -> np.ndarray:
    """D[T] = 1 - sum_{t<=T} f_os(t) = 1 - (1 - (1-P)^(T+1))^L."""
    T = np.asarray(T)
    if np.any(T < 0):
        raise ValueError("T must be nonnegative")
    return 1.0 - _cdf_power(P, T + 1, L)


def mean_Tr(P: float, L: int, mode: str = "exact_sum") -> float:
    """Expected randomization depth of the whole system.

    exact_sum accumulates E[T] = sum_t P(T_r > t) until the geometric tail
    bound drops below 1e-10; harmonic_approx is H_L / ln(1/(1-P)) - 1/2.
    """
    if P <= 0.0:
        raise ValueError("mean randomization depth diverges at P = 0")
    if mode == "harmonic_approx":
        H_L = float(special.digamma(L + 1) + np.euler_gamma)
        return H_L / math.log(1.0 / (1.0 - P)) - 0.5 if P < 1.0 else 0.0
    if mode != "exact_sum":
        raise ValueError(f"unknown mode {mode!r}")
    if P >= 1.0:
        return 0.0
    total = 0.0
    t = 0
    q = 1.0 - P
    while True:
        surv = float(1.0 - _cdf_power(P, t + 1, L))
        total += surv
        # survival decays at least geometrically with ratio q = 1-P
        if surv * q / (1.0 - q) < 1e-10:
            return total
        t += 1


def critical_params(a: float):
    """Critical clock probability and correlation-length exponent at T = a log2 L."""
    if a <= 0:
        raise ValueError("a must be positive")
    return 1.0 - 2.0 ** (-1.0 / a), 1.0


def universal_G(x, a: float = 1.0):
    """Limit profile of the rescaled decodability, x = (P - P_c) T."""
    x = np.asarray(x, dtype=float)
    out = 1.0 - np.exp(-(2.0 ** (-1.0 / a)) * np.exp(-(2.0 ** (1.0 / a)) * x))
    return out if out.shape else float(out)


def ul_threshold(a: float) -> float:
    """Analytic unknown-location threshold: one undisturbed site survives
    T = a log2 L steps with probability (1-p_u)^(2T) per site."""
    if a <= 0:
        raise ValueError("a must be positive")
    return 1.0 - 2.0 ** (-1.0 / (2.0 * a))


@dataclass
class SimulatedEnsemble:
    """Monte Carlo draw of the model: T_r histogram plus derived estimates."""

    t_r_counts: np.ndarray
    n_samples: int

    @property
    def mean_t_r(self) -> float:
        t = np.arange(len(self.t_r_counts))
        return float((t * self.t_r_counts).sum() / self.n_samples)

    def decodability(self, T: int) -> float:
        return float(self.t_r_counts[T + 1:].sum() / self.n_samples)

    def decodability_stderr(self, T: int) -> float:
        d = self.decodability(T)
        return math.sqrt(max(d * (1.0 - d), 1e-12) / self.n_samples)


def simulate(params: StochasticParams, T: int, n_samples: int,
             seed: int) -> SimulatedEnsemble:
    """Draw L independent geometric clocks per sample; T_r is their maximum."""
    if n_samples < 1:
        raise ValueError("need at least one sample")
    rng = np.random.default_rng(seed)
    if params.P <= 0.0:
        raise ValueError("P = 0 never randomizes; nothing to simulate")
    chunk = max(1, min(n_samples, 10_000_000 // params.L))
    counts = np.zeros(1, dtype=np.int64)
    done = 0
    while done < n_samples:
        m = min(chunk, n_samples - done)
        draws = rng.geometric(params.P, size=(m, params.L)) - 1
        t_r = draws.max(axis=1)
        top = int(t_r.max()) + 1
        if top > len(counts):
            counts = np.concatenate([counts, np.zeros(top - len(counts), np.int64)])
        counts += np.bincount(t_r, minlength=len(counts))
        done += m
    _ = T  # depth only matters to the caller's decodability query
    return SimulatedEnsemble(counts, n_samples)


def log_coefficient_model(p_m, c: float, a: float, beta: float):
    """Fit form c - a / ln(1 - p_m^beta) for the log-depth coefficient."""
    p_m = np.asarray(p_m, dtype=float)
    if np.any(p_m <= 0.0) or np.any(p_m > 1.0):
        raise ValueError("the fit form lives on p_m in (0, 1]")
    with np.errstate(divide="ignore"):
        denom = np.log1p(-np.power(p_m, beta))
    out = np.where(denom == -np.inf, c, c - a / denom)
    return out if out.shape else float(out)


def fit_log_coefficient(p_m, values, sigma=None, seed: int = 0):
    """Least-squares (c, a, beta) for the log-coefficient curve.

    Derivative-free simplex with a few deterministic multistarts; returns the
    best (c, a, beta) triple.
    """
    p_m = np.asarray(p_m, dtype=float)
    values = np.asarray(values, dtype=float)
    w = 1.0 / np.asarray(sigma, dtype=float) if sigma is not None else np.ones_like(values)

    def loss(theta):
        c, a, beta = theta
        if a <= 0 or beta <= 0 or beta > 8:
            return 1e12
        resid = (log_coefficient_model(p_m, c, a, beta) - values) * w
        return float((resid ** 2).sum())

    rng = np.random.default_rng(seed)
    best = None
    c0 = float(values.min())
    a0 = max(float(values.max() - values.min()), 0.1)
    for k in range(8):
        start = np.array([c0, a0, 1.0])
        if k:
            start *= rng.uniform(0.5, 1.8, size=3)
            start[2] = rng.uniform(0.4, 2.5)
        res = optimize.minimize(loss, start, method="Nelder-Mead",
                                options={"maxiter": 4000, "xatol": 1e-8, "fatol": 1e-12})
        if best is None or res.fun < best.fun:
            best = res
    return tuple(float(v) for v in best.x)
