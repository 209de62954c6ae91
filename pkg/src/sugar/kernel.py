"""Gaussian affinities, bandwidth selection, degrees, and row normalization.

The affinity between two points is exp(-||x_i - x_j||^2 / (2 sigma^2)).
Bandwidths come in four flavors: a fixed sigma^2; the max-min rule
(C times the largest nearest-neighbor squared distance, which forces
every point to keep at least one strong edge but is very sensitive to
outliers and gaps); the med-min rule (C times the median instead, a
robust local scale); and per-point adaptive scales (L1 distance to the
r-th nearest neighbor).  Adaptive kernels use the symmetric product
form exp(-d^2 / (2 sigma_i sigma_j)).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _parallel

SYMMETRY_TOL = 1e-12


@dataclass(frozen=True)
class BandwidthSpec:
    """Bandwidth rule: fixed(sigma2), maxmin(c), medmin(c), or adaptive(r)."""

    mode: str
    sigma2: float = 0.0
    c: float = 2.0
    r: int = 10

    def __post_init__(self):
        if self.mode == "fixed":
            if not self.sigma2 > 0:
                raise ValueError("fixed bandwidth needs sigma2 > 0")
        elif self.mode in ("maxmin", "medmin"):
            if not 2.0 <= self.c <= 3.0:
                raise ValueError(f"{self.mode} constant must be in [2, 3], got {self.c}")
        elif self.mode == "adaptive":
            if self.r < 1:
                raise ValueError(f"adaptive rank must be >= 1, got {self.r}")
        else:
            raise ValueError(f"unknown bandwidth mode {self.mode!r}")

    @classmethod
    def fixed(cls, sigma2: float) -> "BandwidthSpec":
        return cls("fixed", sigma2=float(sigma2))

    @classmethod
    def maxmin(cls, c: float = 2.0) -> "BandwidthSpec":
        return cls("maxmin", c=float(c))

    @classmethod
    def medmin(cls, c: float = 2.0) -> "BandwidthSpec":
        return cls("medmin", c=float(c))

    @classmethod
    def adaptive(cls, r: int = 10) -> "BandwidthSpec":
        return cls("adaptive", r=int(r))

    @classmethod
    def parse(cls, text: str) -> "BandwidthSpec":
        """Parse "fixed:0.5", "maxmin:2.0", "medmin:2.0", or "adaptive:10"."""
        mode, _, arg = text.partition(":")
        mode = mode.strip().lower()
        if mode == "fixed":
            return cls.fixed(float(arg))
        if mode == "maxmin":
            return cls.maxmin(float(arg) if arg else 2.0)
        if mode == "medmin":
            return cls.medmin(float(arg) if arg else 2.0)
        if mode == "adaptive":
            return cls.adaptive(int(arg) if arg else 10)
        raise ValueError(f"cannot parse bandwidth spec {text!r}")

    def describe(self) -> str:
        if self.mode == "fixed":
            return f"fixed:{self.sigma2!r}"
        if self.mode in ("maxmin", "medmin"):
            return f"{self.mode}:{self.c!r}"
        return f"adaptive:{self.r}"


@dataclass(frozen=True)
class ResolvedBandwidth:
    """A BandwidthSpec after resolution against concrete data."""

    spec: BandwidthSpec
    sigma2: float | None = None
    row_scales: np.ndarray | None = None
    col_scales: np.ndarray | None = None


@dataclass(frozen=True)
class KernelMatrix:
    """Nonnegative affinity matrix with its bandwidth provenance."""

    values: np.ndarray
    bandwidth: ResolvedBandwidth
    square: bool = True

    def __post_init__(self):
        arr = np.asarray(self.values, dtype=float)
        if arr.ndim != 2:
            raise ValueError("kernel values must be a matrix")
        if not np.isfinite(arr).all():
            raise ValueError("kernel values must be finite")
        if arr.min() < 0:
            raise ValueError("kernel values must be nonnegative")
        if self.square:
            if arr.shape[0] != arr.shape[1]:
                raise ValueError("square kernel must have equal dimensions")
            asym = np.abs(arr - arr.T).max() if arr.size else 0.0
            if asym > SYMMETRY_TOL:
                raise ValueError(f"square kernel asymmetric by {asym:.3e}")
        arr.setflags(write=False)
        object.__setattr__(self, "values", arr)

    @property
    def n(self) -> int:
        return self.values.shape[0]


@dataclass(frozen=True)
class DegreeProfile:
    """Per-point degrees, their reciprocals, and the diffusion measure."""

    degrees: np.ndarray
    sparsities: np.ndarray
    measure: np.ndarray

    def __post_init__(self):
        for name in ("degrees", "sparsities", "measure"):
            arr = np.asarray(getattr(self, name), dtype=float)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        if not (self.degrees > 0).all():
            raise ValueError("degrees must be positive")
        prod = self.degrees * self.sparsities
        if np.abs(prod - 1.0).max() > 1e-12:
            raise ValueError("sparsities must be reciprocal degrees")

    @property
    def n(self) -> int:
        return self.degrees.shape[0]


@dataclass(frozen=True)
class DiffusionOperator:
    """Row-stochastic transition matrix with its diffusion time."""

    values: np.ndarray
    time: int = 0

    def __post_init__(self):
        arr = np.asarray(self.values, dtype=float)
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
            raise ValueError("diffusion operator must be square")
        if arr.min() < 0:
            raise ValueError("diffusion operator entries must be nonnegative")
        row_err = np.abs(arr.sum(axis=1) - 1.0).max()
        if row_err > 1e-10:
            raise ValueError(f"rows must sum to 1 (max error {row_err:.3e})")
        if self.time < 0:
            raise ValueError("diffusion time must be >= 0")
        arr.setflags(write=False)
        object.__setattr__(self, "values", arr)

    @property
    def n(self) -> int:
        return self.values.shape[0]


def _points(x) -> np.ndarray:
    arr = np.asarray(x, dtype=float)
    if arr.ndim == 1:
        arr = arr[:, None]
    if arr.ndim != 2:
        raise ValueError(f"expected a point matrix, got shape {arr.shape}")
    return arr


def pairwise_sq_dist(a, b) -> np.ndarray:
    """Squared Euclidean distances between the rows of a and b."""
    a_arr, b_arr = _points(a), _points(b)
    if a_arr.shape[1] != b_arr.shape[1]:
        raise ValueError(
            f"dimension mismatch: {a_arr.shape[1]} vs {b_arr.shape[1]} columns"
        )
    same = a_arr is b_arr or np.array_equal(a_arr, b_arr)
    a_sq = np.einsum("ij,ij->i", a_arr, a_arr)
    b_sq = a_sq if same else np.einsum("ij,ij->i", b_arr, b_arr)
    bt = np.ascontiguousarray(b_arr.T)
    out = np.empty((a_arr.shape[0], b_arr.shape[0]))

    def block(lo, hi):
        d = a_sq[lo:hi, None] + b_sq[None, :] - 2.0 * (a_arr[lo:hi] @ bt)
        return np.clip(d, 0.0, None)

    _parallel.map_row_blocks(block, a_arr.shape[0], out)
    if same:
        out = 0.5 * (out + out.T)
        np.fill_diagonal(out, 0.0)
    return out


def _pairwise_l1(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    out = np.empty((a.shape[0], b.shape[0]))

    def block(lo, hi):
        return np.abs(a[lo:hi, None, :] - b[None, :, :]).sum(axis=2)

    return _parallel.map_row_blocks(block, a.shape[0], out)


def _nearest_sq_dists(x) -> np.ndarray:
    pts = _points(x)
    if pts.shape[0] < 2:
        raise ValueError("bandwidth selection needs at least 2 points")
    d2 = pairwise_sq_dist(pts, pts)
    np.fill_diagonal(d2, np.inf)
    return d2.min(axis=1)


def maxmin_bandwidth(x, c: float = 2.0) -> float:
    """C times the largest nearest-neighbor squared distance."""
    if not 2.0 <= c <= 3.0:
        raise ValueError(f"maxmin constant must be in [2, 3], got {c}")
    return float(c * _nearest_sq_dists(x).max())


def median_min_bandwidth(x, c: float = 2.0) -> float:
    """C times the median nearest-neighbor squared distance.

    Same shape as the max-min rule but robust: one straggler or one
    unusually wide gap no longer dictates the global scale.
    """
    if not 2.0 <= c <= 3.0:
        raise ValueError(f"medmin constant must be in [2, 3], got {c}")
    sigma2 = float(c * np.median(_nearest_sq_dists(x)))
    if sigma2 <= 0:
        raise ValueError("median nearest-neighbor distance is zero (duplicates?)")
    return sigma2


def adaptive_bandwidths(x, r: int) -> np.ndarray:
    """Per-point scale: L1 distance from each point to its r-th nearest neighbor."""
    pts = _points(x)
    n = pts.shape[0]
    if not 1 <= r < n:
        raise ValueError(f"neighbor rank must satisfy 1 <= r < N, got r={r}, N={n}")
    d1 = _pairwise_l1(pts, pts)
    np.fill_diagonal(d1, np.inf)
    d1.sort(axis=1)
    scales = d1[:, r - 1]
    if scales.min() <= 0:
        where = int(np.argmin(scales))
        raise ValueError(
            f"degenerate zero bandwidth at point {where} (duplicated point?); "
            "deduplicate the data or use a larger rank"
        )
    return scales


def _resolve(a_arr, b_arr, bw: BandwidthSpec, row_scales, col_scales, same: bool):
    if bw.mode in ("fixed", "maxmin", "medmin"):
        if row_scales is not None or col_scales is not None:
            raise ValueError("per-point scales only apply to adaptive bandwidths")
        if bw.mode == "fixed":
            sigma2 = bw.sigma2
        else:
            basis = a_arr if same else np.vstack([a_arr, b_arr])
            rule = maxmin_bandwidth if bw.mode == "maxmin" else median_min_bandwidth
            sigma2 = rule(basis, bw.c)
        if not sigma2 > 0:
            raise ValueError(f"resolved bandwidth must be positive, got {sigma2}")
        return ResolvedBandwidth(bw, sigma2=float(sigma2))
    rows = np.asarray(row_scales, dtype=float) if row_scales is not None else None
    cols = np.asarray(col_scales, dtype=float) if col_scales is not None else None
    if rows is None:
        rows = adaptive_bandwidths(a_arr, bw.r)
    if cols is None:
        cols = rows if same else adaptive_bandwidths(b_arr, bw.r)
    if rows.shape != (a_arr.shape[0],) or cols.shape != (b_arr.shape[0],):
        raise ValueError("scale vectors must match the point counts")
    if rows.min() <= 0 or cols.min() <= 0:
        raise ValueError("adaptive scales must be strictly positive")
    return ResolvedBandwidth(bw, row_scales=rows, col_scales=cols)


def gaussian_kernel(a, b, bw: BandwidthSpec, *, row_scales=None, col_scales=None) -> KernelMatrix:
    """Gaussian affinity matrix between the rows of a and b.

    Fixed, maxmin, and medmin modes use one global sigma^2; adaptive
    mode uses exp(-d^2 / (2 sigma_i sigma_j)) with per-point scales,
    which may also be supplied explicitly.
    """
    a_arr, b_arr = _points(a), _points(b)
    if a_arr.shape[1] != b_arr.shape[1]:
        raise ValueError(
            f"dimension mismatch: {a_arr.shape[1]} vs {b_arr.shape[1]} columns"
        )
    same = a_arr is b_arr or np.array_equal(a_arr, b_arr)
    resolved = _resolve(a_arr, b_arr, bw, row_scales, col_scales, same)
    d2 = pairwise_sq_dist(a_arr, b_arr)
    if resolved.sigma2 is not None:
        k = np.exp(-d2 / (2.0 * resolved.sigma2))
    else:
        denom = 2.0 * np.outer(resolved.row_scales, resolved.col_scales)
        k = np.exp(-d2 / denom)
    if same:
        k = 0.5 * (k + k.T)
    return KernelMatrix(k, resolved, square=same)


def degrees(k: KernelMatrix) -> DegreeProfile:
    """Row sums of a square kernel, their reciprocals, and the default measure."""
    if not k.square:
        raise ValueError("degrees require a square kernel")
    d = k.values.sum(axis=1)
    if d.min() <= 0:
        where = int(np.argmin(d))
        raise ValueError(f"zero degree at point {where} (isolated under underflow)")
    s = 1.0 / d
    return DegreeProfile(degrees=d, sparsities=s, measure=s)


def row_normalize(k: KernelMatrix) -> DiffusionOperator:
    """Divide each row by its sum, yielding a Markov transition matrix."""
    if not k.square:
        raise ValueError("row normalization requires a square kernel")
    sums = k.values.sum(axis=1)
    if sums.min() <= 0:
        where = int(np.argmin(sums))
        raise ValueError(f"zero row sum at point {where}")
    return DiffusionOperator(k.values / sums[:, None], time=0)
