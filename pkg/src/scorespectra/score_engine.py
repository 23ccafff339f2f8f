"""Score oracles for the linear-manifold model.

Four interchangeable sources of ``s(x, t)`` sit behind one contract:

* exact score of the marginal Normal(0, diag(sigma^2) + t I),
* empirical score of the finite mixture over training points (softmax
  weights, evaluated in log space so small t cannot underflow),
* active-sample approximation that averages posterior draws,
* file-backed scores that only replay stored evaluations.

Also here: pattern energies and the log partition function that the
condensation module builds on, plus the estimator-variance diagnostic.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass

import numpy as np
from scipy.special import logsumexp

from .linear_model import Dataset, ManifoldSpec, as_state, posterior_moments, posterior_sample

__all__ = [
    "ScoreOracle",
    "ExactScore",
    "EmpiricalScore",
    "ActiveSampleScore",
    "FileBackedScore",
    "EnergyLevels",
    "exact_score",
    "exact_normalized_jacobian",
    "empirical_log_weights",
    "empirical_score",
    "energy_levels",
    "log_partition",
    "log_mixture_density",
    "active_sample_score",
    "estimator_variance",
]

# Cap on elements of a (probes x patterns) distance block; larger requests are chunked.
_CHUNK_ELEMS = 2**25


def _require_time(t: float) -> float:
    if t <= 0.0 or not math.isfinite(t):
        raise ValueError(f"t must be a positive finite real, got {t}")
    return float(t)


class ScoreOracle:
    """Evaluation contract shared by all score sources.

    ``evaluate`` is deterministic for exact/empirical/file_backed oracles;
    the active-sample oracle is deterministic given its construction seed.
    Instances are immutable after construction and safe to share across
    threads.
    """

    descriptor: str = "abstract"

    def evaluate(self, x, t: float) -> np.ndarray:
        raise NotImplementedError

    def evaluate_batch(self, X: np.ndarray, t: float) -> np.ndarray:
        """Scores for each row of X, shape (n, d); default loops over rows."""
        return np.stack([self.evaluate(row, t) for row in np.asarray(X, dtype=float)])


def exact_score(spec: ManifoldSpec, x, t: float) -> np.ndarray:
    """Score of Normal(0, diag(sigma^2) + t I): coordinate-wise -x_i / (sigma_i^2 + t)."""
    t = _require_time(t)
    xv = as_state(x, spec.ambient_dim)
    return -xv / (spec.variance_vector() + t)


def exact_normalized_jacobian(spec: ManifoldSpec, t: float) -> np.ndarray:
    """t times the Jacobian of the exact score: diag(-t / (sigma_i^2 + t)).

    Negative semi-definite; its singular values t / (sigma_i^2 + t) are 1 in
    zero-variance directions and shrink with variance, so the sorted spectrum
    has its large jump at index d - m.
    """
    t = _require_time(t)
    return np.diag(-t / (spec.variance_vector() + t))


class ExactScore(ScoreOracle):
    descriptor = "exact"

    def __init__(self, spec: ManifoldSpec):
        self.spec = spec
        self._sigma2 = spec.variance_vector()

    def evaluate(self, x, t: float) -> np.ndarray:
        return exact_score(self.spec, x, t)

    def evaluate_batch(self, X: np.ndarray, t: float) -> np.ndarray:
        t = _require_time(t)
        X = np.asarray(X, dtype=float)
        return -X / (self._sigma2 + t)


def _chunked_sq_dists(X: np.ndarray, Y: np.ndarray):
    """Yield (slice, squared-distance block) for rows of X against all rows of Y.

    Computed from explicit differences, not the expanded-square identity,
    because at small t the weights need the tiny relative differences that
    cancellation would destroy.
    """
    n, d = X.shape
    chunk = max(1, _CHUNK_ELEMS // max(1, Y.shape[0] * d))
    for start in range(0, n, chunk):
        block = X[start : start + chunk]
        diff = block[:, None, :] - Y[None, :, :]
        yield slice(start, start + block.shape[0]), np.einsum("ijk,ijk->ij", diff, diff)


def empirical_log_weights(dataset: Dataset, x, t: float) -> np.ndarray:
    """Log posterior weights of each pattern given x: softmax of -||x - y||^2 / 2t."""
    t = _require_time(t)
    xv = as_state(x, dataset.spec.ambient_dim)
    diff = dataset.points - xv
    logits = -np.einsum("ij,ij->i", diff, diff) / (2.0 * t)
    return logits - logsumexp(logits)


def empirical_score(dataset: Dataset, x, t: float) -> np.ndarray:
    """Weighted pattern pull: sum_mu w_mu (y^mu - x) / t, the gradient of the log mixture."""
    t = _require_time(t)
    xv = as_state(x, dataset.spec.ambient_dim)
    w = np.exp(empirical_log_weights(dataset, xv, t))
    return (w @ dataset.points - xv) / t


class EmpiricalScore(ScoreOracle):
    descriptor = "empirical"

    def __init__(self, dataset: Dataset):
        self.dataset = dataset

    def evaluate(self, x, t: float) -> np.ndarray:
        return empirical_score(self.dataset, x, t)

    def evaluate_batch(self, X: np.ndarray, t: float) -> np.ndarray:
        t = _require_time(t)
        X = np.asarray(X, dtype=float)
        Y = self.dataset.points
        out = np.empty_like(X)
        for sl, sq in _chunked_sq_dists(X, Y):
            logits = -sq / (2.0 * t)
            logw = logits - logsumexp(logits, axis=1, keepdims=True)
            out[sl] = (np.exp(logw) @ Y - X[sl]) / t
        return out


@dataclass(frozen=True, eq=False)
class EnergyLevels:
    """Pattern energies at a state; Boltzmann weights are softmax(-E / t)."""

    energies: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.energies, dtype=float)
        if not np.all(np.isfinite(arr)):
            raise ValueError("energies must be finite")
        object.__setattr__(self, "energies", arr)


def energy_levels(dataset: Dataset, x) -> EnergyLevels:
    """E_mu(x) = ||y^mu||^2 / 2 - x . y^mu.

    This equals ||x - y^mu||^2 / 2 minus the pattern-independent ||x||^2 / 2,
    so softmax(-E / t) reproduces :func:`empirical_log_weights` exactly.
    """
    xv = as_state(x, dataset.spec.ambient_dim)
    Y = dataset.points
    return EnergyLevels(0.5 * np.einsum("ij,ij->i", Y, Y) - Y @ xv)


def log_partition(dataset: Dataset, x, beta: float) -> float:
    """log sum_mu exp(-beta E_mu(x)) at inverse temperature beta = 1/t."""
    if beta <= 0.0 or not math.isfinite(beta):
        raise ValueError(f"beta must be a positive finite real, got {beta}")
    return float(logsumexp(-beta * energy_levels(dataset, x).energies))


def log_mixture_density(dataset: Dataset, x, t: float) -> float:
    """Log density of the N-point Gaussian mixture with bandwidth t at x."""
    t = _require_time(t)
    xv = as_state(x, dataset.spec.ambient_dim)
    d = dataset.spec.ambient_dim
    norm = -math.log(dataset.n) - 0.5 * d * math.log(2.0 * math.pi * t)
    return log_partition(dataset, xv, 1.0 / t) - float(xv @ xv) / (2.0 * t) + norm


def active_sample_score(
    spec: ManifoldSpec, x, t: float, n_active: int, seed: int
) -> np.ndarray:
    """Average pull of ``n_active`` posterior draws: (1/n) sum (y - x) / t.

    Unbiased for the exact score; per-coordinate variance is
    t sigma_i^2 / (sigma_i^2 + t) / (n_active t^2).
    """
    t = _require_time(t)
    if n_active < 1:
        raise ValueError(f"n_active must be >= 1, got {n_active}")
    xv = as_state(x, spec.ambient_dim)
    draws = posterior_sample(spec, xv, t, n_active, seed)
    return (draws.mean(axis=0) - xv) / t


class ActiveSampleScore(ScoreOracle):
    """Stochastic oracle averaging posterior draws; per-call seed is derived
    from (base seed, x, t) so repeated evaluation at the same state is
    reproducible while distinct states get independent draws."""

    descriptor = "active_sample"

    def __init__(self, spec: ManifoldSpec, n_active: int, seed: int):
        if n_active < 1:
            raise ValueError(f"n_active must be >= 1, got {n_active}")
        self.spec = spec
        self.n_active = n_active
        self.seed = seed

    def _call_seed(self, x: np.ndarray, t: float) -> int:
        h = hashlib.blake2b(digest_size=8)
        h.update(str(self.seed).encode())
        h.update(np.ascontiguousarray(x).tobytes())
        h.update(np.float64(t).tobytes())
        return int.from_bytes(h.digest(), "little")

    def evaluate(self, x, t: float) -> np.ndarray:
        xv = as_state(x, self.spec.ambient_dim)
        return active_sample_score(self.spec, xv, t, self.n_active, self._call_seed(xv, t))


class FileBackedScore(ScoreOracle):
    """Replays stored score vectors; refuses to interpolate.

    Evaluation succeeds only at an exactly stored (state, t) pair; anything
    else raises LookupError rather than inventing a value.
    """

    descriptor = "file_backed"

    def __init__(self, scores: np.ndarray, t: float, states: np.ndarray | None = None):
        scores = np.asarray(scores, dtype=float)
        if scores.ndim != 2:
            raise ValueError(f"scores must be a (K, d) matrix, got shape {scores.shape}")
        if states is not None:
            states = np.asarray(states, dtype=float)
            if states.shape != scores.shape:
                raise ValueError(
                    f"states shape {states.shape} must match scores shape {scores.shape}"
                )
        self.scores = scores
        self.states = states
        self.t = float(t)

    def evaluate(self, x, t: float) -> np.ndarray:
        xv = as_state(x, self.scores.shape[1])
        if self.states is None:
            raise LookupError("file-backed oracle stores no probe states; cannot evaluate")
        if t != self.t:
            raise LookupError(f"file-backed oracle holds scores at t={self.t}, not t={t}")
        match = np.flatnonzero(np.all(self.states == xv, axis=1))
        if match.size == 0:
            raise LookupError("state not stored; file-backed oracle does not interpolate")
        return self.scores[match[0]].copy()


def estimator_variance(spec: ManifoldSpec, x, t: float, n_eff: float) -> np.ndarray:
    """Approximate per-coordinate variance of the empirical score estimator.

    Posterior variance divided by the effective sample count, with the 1/t^2
    factor from the (y - x)/t score scaling made explicit.
    """
    t = _require_time(t)
    if n_eff < 1.0:
        raise ValueError(f"n_eff must be >= 1, got {n_eff}")
    _, post_var = posterior_moments(spec, x, t)
    return post_var / (n_eff * t * t)
