"""Local covariance estimation and degree-equalizing point generation.

The number of points to draw around x_i is bounded below and above by

    det(I + Sigma_i / (2 sigma^2))^(1/2) * (max_d - d_i) / (d_i + 1) - 1
    det(I + Sigma_i / (2 sigma^2))^(1/2) * (max_d - d_i)

and the level used is the rounded mean of the two bounds, clamped at 0.
Points at maximal degree therefore generate nothing.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dataset_io import psd_sqrt
from .kernel import DegreeProfile, pairwise_sq_dist


@dataclass(frozen=True)
class LocalCovarianceSet:
    """One D x D neighborhood covariance per point, plus the jitter applied."""

    covariances: np.ndarray
    k: int
    jitter: np.ndarray

    def __post_init__(self):
        cov = np.asarray(self.covariances, dtype=float)
        jit = np.atleast_1d(np.asarray(self.jitter, dtype=float))
        if cov.ndim != 3 or cov.shape[1] != cov.shape[2]:
            raise ValueError("covariances must be an N x D x D array")
        if jit.shape != (cov.shape[0],):
            raise ValueError("jitter must hold one value per point")
        if jit.min() < 0:
            raise ValueError("jitter must be >= 0")
        asym = np.abs(cov - np.transpose(cov, (0, 2, 1))).max() if cov.size else 0.0
        if asym > 1e-12 * max(1.0, np.abs(cov).max()):
            raise ValueError(f"covariances asymmetric by {asym:.3e}")
        for arr in (cov, jit):
            arr.setflags(write=False)
        object.__setattr__(self, "covariances", cov)
        object.__setattr__(self, "jitter", jit)

    @property
    def n(self) -> int:
        return self.covariances.shape[0]

    @property
    def dim(self) -> int:
        return self.covariances.shape[1]


@dataclass(frozen=True)
class GenerationPlan:
    """Per-point generation levels with their lower/upper bounds."""

    levels: np.ndarray
    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        levels = np.asarray(self.levels, dtype=np.int64)
        lower = np.asarray(self.lower, dtype=float)
        upper = np.asarray(self.upper, dtype=float)
        if not (levels.shape == lower.shape == upper.shape):
            raise ValueError("plan vectors must share one length")
        if np.any(lower > upper + 1e-9):
            raise ValueError("lower bounds must not exceed upper bounds")
        if levels.min(initial=0) < 0:
            raise ValueError("levels must be nonnegative")
        for arr in (levels, lower, upper):
            arr.setflags(write=False)
        object.__setattr__(self, "levels", levels)
        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "upper", upper)

    @property
    def total(self) -> int:
        return int(self.levels.sum())


@dataclass(frozen=True)
class GeneratedBatch:
    """Raw generated points and the index of the point each was drawn around."""

    points: np.ndarray
    origin: np.ndarray

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        origin = np.asarray(self.origin, dtype=np.int64)
        if pts.ndim != 2:
            raise ValueError("points must be an M x D matrix")
        if origin.shape != (pts.shape[0],):
            raise ValueError("origin must map each generated point to a source")
        for arr in (pts, origin):
            arr.setflags(write=False)
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "origin", origin)

    @property
    def m(self) -> int:
        return self.points.shape[0]


def local_covariances(x, k: int, jitter: float | None = None) -> LocalCovarianceSet:
    """Covariance of the k nearest neighbors around each point.

    Each covariance is centered on the point itself (the mean of the
    generating Gaussian), not on the neighbor mean.  ``jitter`` is added
    to the diagonal; None picks a relative floor of 1e-12 tr(Sigma)/D per
    point so rank-deficient directions stay sampleable.
    """
    pts = np.asarray(x, dtype=float)
    if pts.ndim != 2:
        raise ValueError("x must be an N x D matrix")
    n, dim = pts.shape
    if not 1 <= k < n:
        raise ValueError(f"need 1 <= k < N, got k={k}, N={n}")
    if jitter is not None and jitter < 0:
        raise ValueError("jitter must be >= 0")
    d2 = pairwise_sq_dist(pts, pts)
    np.fill_diagonal(d2, np.inf)
    neighbors = np.argsort(d2, axis=1, kind="stable")[:, :k]
    covs = np.empty((n, dim, dim))
    eps = np.empty(n)
    for i in range(n):
        diff = pts[neighbors[i]] - pts[i]
        sigma = (diff.T @ diff) / k
        sigma = 0.5 * (sigma + sigma.T)
        eps[i] = jitter if jitter is not None else 1e-12 * np.trace(sigma) / dim
        covs[i] = sigma + eps[i] * np.eye(dim)
    return LocalCovarianceSet(covs, k=k, jitter=eps)


def generation_bounds(d: DegreeProfile, cov: LocalCovarianceSet, sigma2: float) -> GenerationPlan:
    """Generation levels from the degree-equalization bounds.

    The determinant factor is computed from the eigenvalues of each PSD
    covariance; the level is the half-up-rounded mean of the bounds,
    clamped at zero.
    """
    if sigma2 <= 0:
        raise ValueError("sigma2 must be positive")
    if d.n != cov.n:
        raise ValueError(f"profile has {d.n} points but covariances have {cov.n}")
    eigvals = np.linalg.eigvalsh(cov.covariances)
    scale = max(1.0, float(np.abs(eigvals).max(initial=0.0)))
    if eigvals.min(initial=0.0) < -1e-10 * scale:
        raise ValueError("covariances must be positive semidefinite")
    eigvals = np.clip(eigvals, 0.0, None)
    det_term = np.sqrt(np.prod(1.0 + eigvals / (2.0 * sigma2), axis=1))
    gap = d.degrees.max() - d.degrees
    upper = det_term * gap
    lower = det_term * gap / (d.degrees + 1.0) - 1.0
    levels = np.maximum(0, np.floor((lower + upper) / 2.0 + 0.5)).astype(np.int64)
    return GenerationPlan(levels=levels, lower=lower, upper=upper)


def _seed_key(seed) -> tuple[int, ...]:
    key = (seed,) if np.isscalar(seed) else tuple(seed)
    out = []
    for part in key:
        part = int(part)
        if part < 0:
            raise ValueError("seed components must be nonnegative integers")
        out.append(part)
    return tuple(out)


def sample_batch(x, cov: LocalCovarianceSet, plan: GenerationPlan, seed) -> GeneratedBatch:
    """Draw levels[i] Gaussian points around each x_i.

    Each point uses its own substream keyed by (seed, i), so the batch is
    identical however the per-point work is scheduled.
    """
    pts = np.asarray(x, dtype=float)
    n, dim = pts.shape
    if cov.n != n or plan.levels.shape[0] != n:
        raise ValueError("x, covariances, and plan must share one length")
    key = _seed_key(seed)
    total = plan.total
    out = np.empty((total, dim))
    origin = np.repeat(np.arange(n), plan.levels)
    pos = 0
    for i in np.nonzero(plan.levels)[0]:
        count = int(plan.levels[i])
        rng = np.random.default_rng(np.random.SeedSequence(key + (int(i),)))
        root = psd_sqrt(cov.covariances[i])
        z = rng.standard_normal((count, dim))
        out[pos : pos + count] = pts[i] + z @ root.T
        pos += count
    return GeneratedBatch(points=out, origin=origin)
