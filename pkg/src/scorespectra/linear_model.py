"""Linear-manifold Gaussian data model.

Data live on an m-dimensional linear subspace of R^d: each coordinate is an
independent centered normal whose variance comes from a block of the spec
(coordinates not covered by any block, or covered by a zero-variance block,
are exactly zero). This is the diagonalized form of ``x = F z`` with ``z``
standard normal; the block variances are the eigenvalues of ``F^T F``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "ManifoldSpec",
    "Dataset",
    "as_state",
    "sample_dataset",
    "variance_density",
    "norm_moments",
    "posterior_sample",
    "posterior_moments",
    "write_dataset_csv",
    "read_points_csv",
    "dataset_from_csv",
]


def as_state(x, d: int, name: str = "x") -> np.ndarray:
    """Coerce ``x`` to a finite float vector of length ``d`` or raise ValueError."""
    arr = np.asarray(x, dtype=float)
    if arr.shape != (d,):
        raise ValueError(f"{name} must have shape ({d},), got {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} must have finite entries")
    return arr


@dataclass(frozen=True)
class ManifoldSpec:
    """Ambient dimension plus ordered (block_dim, variance) subspace blocks.

    Blocks are canonicalized to descending variance. Coordinates beyond the
    blocks are zero-variance. The manifold dimension is the total dimension
    of blocks with strictly positive variance.
    """

    ambient_dim: int
    blocks: tuple[tuple[int, float], ...]

    def __post_init__(self):
        if not isinstance(self.ambient_dim, int) or self.ambient_dim < 1:
            raise ValueError(f"ambient_dim must be a positive integer, got {self.ambient_dim}")
        canon = []
        for b in self.blocks:
            if len(b) != 2:
                raise ValueError(f"each block must be (dim, variance), got {b!r}")
            dim, var = int(b[0]), float(b[1])
            if dim < 1:
                raise ValueError(f"block dimension must be positive, got {dim}")
            if var < 0.0 or not math.isfinite(var):
                raise ValueError(f"block variance must be finite and >= 0, got {var}")
            canon.append((dim, var))
        canon.sort(key=lambda b: -b[1])
        if sum(dim for dim, _ in canon) > self.ambient_dim:
            raise ValueError("block dimensions exceed ambient dimension")
        if not any(var > 0.0 for _, var in canon):
            raise ValueError("at least one block must have positive variance")
        object.__setattr__(self, "blocks", tuple(canon))

    @property
    def manifold_dim(self) -> int:
        return sum(dim for dim, var in self.blocks if var > 0.0)

    def variance_vector(self) -> np.ndarray:
        """Per-coordinate variances sigma_i^2, length ``ambient_dim``."""
        out = np.zeros(self.ambient_dim)
        i = 0
        for dim, var in self.blocks:
            out[i : i + dim] = var
            i += dim
        return out

    @classmethod
    def from_projection(cls, F) -> "ManifoldSpec":
        """Spec whose variances are the eigenvalues of ``F^T F`` for a d x m projection."""
        F = np.asarray(F, dtype=float)
        if F.ndim != 2:
            raise ValueError(f"projection must be a 2-d matrix, got shape {F.shape}")
        d, m = F.shape
        if m > d:
            raise ValueError(f"projection has more columns ({m}) than rows ({d})")
        eigs = np.linalg.eigvalsh(F.T @ F)
        eigs = np.clip(eigs, 0.0, None)
        return cls(ambient_dim=d, blocks=tuple((1, float(v)) for v in eigs[::-1]))


@dataclass(frozen=True, eq=False)
class Dataset:
    """N sampled points from a :class:`ManifoldSpec`, with the generation seed."""

    spec: ManifoldSpec
    points: np.ndarray
    seed: int

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        if pts.ndim != 2 or pts.shape[1] != self.spec.ambient_dim:
            raise ValueError(
                f"points must have shape (N, {self.spec.ambient_dim}), got {pts.shape}"
            )
        if pts.shape[0] < 1:
            raise ValueError("dataset must contain at least one point")
        if not np.all(np.isfinite(pts)):
            raise ValueError("points must be finite")
        zero_dirs = self.spec.variance_vector() == 0.0
        if np.any(pts[:, zero_dirs] != 0.0):
            raise ValueError("points must be exactly zero in zero-variance directions")
        object.__setattr__(self, "points", pts)

    @property
    def n(self) -> int:
        return self.points.shape[0]


def sample_dataset(spec: ManifoldSpec, N: int, seed: int) -> Dataset:
    """Draw N i.i.d. points; coordinate i ~ Normal(0, sigma_i^2). Deterministic in seed."""
    if N < 1:
        raise ValueError(f"N must be >= 1, got {N}")
    rng = np.random.default_rng(seed)
    sigma2 = spec.variance_vector()
    live = sigma2 > 0.0
    points = np.zeros((N, spec.ambient_dim))
    points[:, live] = rng.standard_normal((N, int(live.sum()))) * np.sqrt(sigma2[live])
    return Dataset(spec=spec, points=points, seed=seed)


def variance_density(spec: ManifoldSpec, x) -> float:
    """Variance density along x: d^-1 sum_i x_i^2 sigma_i^2."""
    xv = as_state(x, spec.ambient_dim)
    return float(np.dot(xv * xv, spec.variance_vector()) / spec.ambient_dim)


def norm_moments(spec: ManifoldSpec) -> tuple[float, float]:
    """Coordinate-averaged moments (r2, r4) = (d^-1 sum sigma_i^2, d^-1 sum sigma_i^4)."""
    sigma2 = spec.variance_vector()
    d = spec.ambient_dim
    return float(sigma2.sum() / d), float((sigma2**2).sum() / d)


def posterior_moments(spec: ManifoldSpec, x, t: float) -> tuple[np.ndarray, np.ndarray]:
    """Mean and variance of the Gaussian posterior p(x0 | x; t), coordinate-wise.

    Conjugacy of Normal(0, sigma_i^2) prior with Normal(x0, t) observation gives
    mean sigma_i^2 x_i / (sigma_i^2 + t) and variance t sigma_i^2 / (sigma_i^2 + t).
    """
    if t <= 0.0:
        raise ValueError(f"t must be > 0, got {t}")
    xv = as_state(x, spec.ambient_dim)
    sigma2 = spec.variance_vector()
    mean = sigma2 * xv / (sigma2 + t)
    var = t * sigma2 / (sigma2 + t)
    return mean, var


def posterior_sample(spec: ManifoldSpec, x, t: float, count: int, seed: int) -> np.ndarray:
    """Draw ``count`` posterior samples as a (count, d) matrix; exact zeros off-manifold."""
    if count < 1:
        raise ValueError(f"count must be >= 1, got {count}")
    mean, var = posterior_moments(spec, x, t)
    live = spec.variance_vector() > 0.0
    rng = np.random.default_rng(seed)
    out = np.zeros((count, spec.ambient_dim))
    out[:, live] = mean[live] + rng.standard_normal((count, int(live.sum()))) * np.sqrt(var[live])
    return out


def write_dataset_csv(dataset: Dataset, path) -> None:
    """One point per row, `repr` floats for exact round-trip, with a metadata header."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"# d={dataset.spec.ambient_dim} N={dataset.n} seed={dataset.seed}\n")
        for row in dataset.points:
            fh.write(",".join(repr(float(v)) for v in row) + "\n")


def read_points_csv(path) -> tuple[np.ndarray, dict]:
    """Read a dataset CSV; returns (points, header metadata dict, possibly empty)."""
    meta: dict = {}
    rows = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                for tok in line[1:].split():
                    if "=" in tok:
                        key, val = tok.split("=", 1)
                        meta[key] = int(val)
                continue
            try:
                rows.append([float(v) for v in line.split(",")])
            except ValueError as exc:
                raise ValueError(f"{path}: bad float on line {lineno}") from exc
    if not rows:
        raise ValueError(f"{path}: no data rows")
    points = np.asarray(rows, dtype=float)
    widths = {len(r) for r in rows}
    if len(widths) != 1:
        raise ValueError(f"{path}: inconsistent row widths {sorted(widths)}")
    if "d" in meta and points.shape[1] != meta["d"]:
        raise ValueError(f"{path}: header says d={meta['d']} but rows have {points.shape[1]}")
    if "N" in meta and points.shape[0] != meta["N"]:
        raise ValueError(f"{path}: header says N={meta['N']} but file has {points.shape[0]} rows")
    return points, meta


def dataset_from_csv(path, spec: ManifoldSpec) -> Dataset:
    """Rebuild a Dataset from a CSV written by :func:`write_dataset_csv`."""
    points, meta = read_points_csv(path)
    return Dataset(spec=spec, points=points, seed=int(meta.get("seed", 0)))
