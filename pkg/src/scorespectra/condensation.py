"""Positional random-energy quantities for the linear-manifold model.

The empirical mixture behaves like a random energy model with inverse
temperature 1/t whose energy levels depend on the state x. This module
computes the finite-d moment generating function of those energies, the
condensation time below which Boltzmann weights concentrate on few patterns
(both the exact root condition and the closed-form approximation), and the
derived occupancy quantities: participation ratio and effective sample count.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .linear_model import Dataset, ManifoldSpec, as_state, norm_moments, variance_density
from .score_engine import log_partition

__all__ = [
    "PhiValue",
    "CondensationProfile",
    "BracketError",
    "zeta",
    "zeta_prime",
    "tc_exact",
    "tc_approx",
    "tc_approx_from_alpha",
    "phi",
    "effective_n",
    "participation_ratio",
    "expected_participation",
    "condensation_profile",
]

TC_BRACKET = (1e-8, 1e6)
TC_SCAN_POINTS = 120
TC_MAX_ITER = 300
TC_RESIDUAL_TOL = 1e-12


class BracketError(ValueError):
    """Raised when the condensation condition has no sign change in the bracket."""


def _zeta_terms(spec: ManifoldSpec, x, t: float, lam: float):
    if t <= 0.0:
        raise ValueError(f"t must be > 0, got {t}")
    xv = as_state(x, spec.ambient_dim)
    sigma2 = spec.variance_vector()
    denom = 1.0 + lam * sigma2 / t
    if np.any(denom <= 0.0):
        raise ValueError(
            f"log-domain violation: 1 + lambda sigma^2 / t must stay positive (lambda={lam}, t={t})"
        )
    return xv, sigma2, denom


def zeta(spec: ManifoldSpec, x, t: float, lam: float) -> float:
    """Finite-d moment generating function of the pattern energies.

    (1/d) [ -1/2 sum log(1 + lam sigma_i^2/t)
            + lam^2/(2 t^2) sum x_i^2 sigma_i^2 / (1 + lam sigma_i^2/t) ]

    zeta(0) = 0 by construction.
    """
    xv, sigma2, denom = _zeta_terms(spec, x, t, lam)
    d = spec.ambient_dim
    log_term = -0.5 * np.sum(np.log(denom))
    quad_term = (lam * lam) / (2.0 * t * t) * np.sum(xv * xv * sigma2 / denom)
    return float((log_term + quad_term) / d)


def zeta_prime(spec: ManifoldSpec, x, t: float, lam: float) -> float:
    """Derivative of :func:`zeta` in lambda (closed form, three terms)."""
    xv, sigma2, denom = _zeta_terms(spec, x, t, lam)
    d = spec.ambient_dim
    x2s2 = xv * xv * sigma2
    term1 = -np.sum(sigma2 / denom) / (2.0 * t)
    term2 = lam / (t * t) * np.sum(x2s2 / denom)
    term3 = -(lam * lam) / (2.0 * t**3) * np.sum(x2s2 * sigma2 / denom**2)
    return float((term1 + term2 + term3) / d)


def _condensation_gap(spec: ManifoldSpec, x, alpha: float, t: float) -> float:
    return alpha + zeta(spec, x, t, 1.0) - zeta_prime(spec, x, t, 1.0)


def _solve_tc(spec: ManifoldSpec, x, alpha: float):
    """Bisection for the root of alpha + zeta(1) - zeta'(1) over a log-scanned bracket.

    Scans TC_BRACKET on a log grid for the leftmost sign change (so if several
    roots ever exist the smallest is returned), then bisects until the residual
    or the interval width is exhausted. Returns (root, residual, iterations).
    """
    if alpha <= 0.0:
        raise ValueError(f"alpha must be > 0, got {alpha}")
    grid = np.geomspace(TC_BRACKET[0], TC_BRACKET[1], TC_SCAN_POINTS)
    values = [_condensation_gap(spec, x, alpha, t) for t in grid]
    lo = hi = None
    for i in range(len(grid) - 1):
        if values[i] == 0.0:
            return float(grid[i]), 0.0, 0
        if values[i] * values[i + 1] < 0.0:
            lo, hi = grid[i], grid[i + 1]
            g_lo = values[i]
            break
    else:
        if values[-1] == 0.0:
            return float(grid[-1]), 0.0, 0
        raise BracketError(
            f"no sign change in bracket [{TC_BRACKET[0]:g}, {TC_BRACKET[1]:g}] "
            f"for alpha={alpha}"
        )
    mid = 0.5 * (lo + hi)
    g_mid = _condensation_gap(spec, x, alpha, mid)
    for it in range(1, TC_MAX_ITER + 1):
        if abs(g_mid) <= TC_RESIDUAL_TOL or (hi - lo) <= 1e-16 * max(1.0, mid):
            break
        if g_lo * g_mid < 0.0:
            hi = mid
        else:
            lo, g_lo = mid, g_mid
        mid = 0.5 * (lo + hi)
        g_mid = _condensation_gap(spec, x, alpha, mid)
    return float(mid), float(g_mid), it


def tc_exact(spec: ManifoldSpec, x, alpha: float) -> float:
    """Condensation time solving alpha + zeta(1; t) - zeta'(1; t) = 0 by bisection.

    Raises :class:`BracketError` when the condition does not change sign in
    ``TC_BRACKET`` -- reported, never guessed.
    """
    root, _, _ = _solve_tc(spec, x, alpha)
    return root


def tc_approx_from_alpha(spec: ManifoldSpec, x, alpha: float) -> float:
    """Closed-form condensation time sqrt((r4/2 + omega^2(x)) / (2 alpha))."""
    if alpha <= 0.0:
        raise ValueError(f"alpha must be > 0, got {alpha}")
    _, r4 = norm_moments(spec)
    return math.sqrt((0.5 * r4 + variance_density(spec, x)) / (2.0 * alpha))


def tc_approx(spec: ManifoldSpec, x, N: int) -> float:
    """Closed-form condensation time with alpha = log(N) / d."""
    if N < 2:
        raise ValueError(f"N must be >= 2 (alpha = log N / d would vanish), got {N}")
    return tc_approx_from_alpha(spec, x, math.log(N) / spec.ambient_dim)


def phi(t: float, tc: float, N: int) -> float:
    """Condensation strength max(1/N, 1/t - 1/tc); the 1/N floor keeps it finite-N aware."""
    if t <= 0.0 or tc <= 0.0:
        raise ValueError(f"t and tc must be > 0, got t={t}, tc={tc}")
    if N < 1:
        raise ValueError(f"N must be >= 1, got {N}")
    return max(1.0 / N, 1.0 / t - 1.0 / tc)


def effective_n(t: float, tc: float, N: int) -> float:
    """Effective number of patterns feeding the score: min(N, tc / (tc - t)), capped at N.

    Tends to 1 as t -> 0 (full memorization) and saturates at N for t >= tc
    (self-averaging phase).
    """
    if t <= 0.0 or tc <= 0.0:
        raise ValueError(f"t and tc must be > 0, got t={t}, tc={tc}")
    if N < 1:
        raise ValueError(f"N must be >= 1, got {N}")
    if t >= tc:
        return float(N)
    return float(min(float(N), tc / (tc - t)))


def participation_ratio(dataset: Dataset, x, t: float) -> float:
    """Z(2 beta) / Z(beta)^2 at beta = 1/t; equals the summed squared weights."""
    if t <= 0.0:
        raise ValueError(f"t must be > 0, got {t}")
    beta = 1.0 / t
    return math.exp(log_partition(dataset, x, 2.0 * beta) - 2.0 * log_partition(dataset, x, beta))


def expected_participation(t: float, tc: float) -> float:
    """Asymptotic participation ratio 1 - t/tc in the condensed phase (0 < t <= tc)."""
    if t <= 0.0 or tc <= 0.0:
        raise ValueError(f"t and tc must be > 0, got t={t}, tc={tc}")
    if t > tc:
        raise ValueError(
            f"expected participation is defined for t <= tc, got t={t} > tc={tc}; clamp first"
        )
    return 1.0 - t / tc


@dataclass(frozen=True)
class PhiValue:
    """phi evaluated at one (t, x); carries the state for provenance."""

    t: float
    x: tuple
    value: float

    def __post_init__(self):
        if self.value < 0.0:
            raise ValueError(f"phi values are nonnegative, got {self.value}")


@dataclass(frozen=True, eq=False)
class CondensationProfile:
    """Exact and approximate condensation times at one state, with solver metadata."""

    x: np.ndarray
    alpha: float
    t_c_exact: float | None
    t_c_approx: float
    bracket: tuple[float, float]
    residual: float | None
    iterations: int
    message: str = ""

    def __post_init__(self):
        if self.t_c_approx <= 0.0 or not math.isfinite(self.t_c_approx):
            raise ValueError(f"t_c_approx must be positive and finite, got {self.t_c_approx}")
        if self.t_c_exact is not None and (
            self.t_c_exact <= 0.0 or not math.isfinite(self.t_c_exact)
        ):
            raise ValueError(f"t_c_exact must be positive and finite, got {self.t_c_exact}")


def condensation_profile(spec: ManifoldSpec, x, alpha: float) -> CondensationProfile:
    """Both condensation times at x; a failed root search is recorded, not raised."""
    xv = as_state(x, spec.ambient_dim)
    approx = tc_approx_from_alpha(spec, xv, alpha)
    try:
        root, residual, iterations = _solve_tc(spec, xv, alpha)
        return CondensationProfile(
            x=xv, alpha=alpha, t_c_exact=root, t_c_approx=approx,
            bracket=TC_BRACKET, residual=residual, iterations=iterations,
        )
    except BracketError as exc:
        return CondensationProfile(
            x=xv, alpha=alpha, t_c_exact=None, t_c_approx=approx,
            bracket=TC_BRACKET, residual=None, iterations=0, message=str(exc),
        )
