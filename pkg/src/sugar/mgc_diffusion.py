"""Measure-weighted correlation kernel over generated points and diffusion.

The affinity between two generated points is a measure-weighted sum over
two-hop paths through the reference points:

    khat(y_i, y_j) = sum_r K(y_i, x_r) K(x_r, y_j) mu(r)

With the sparsity measure mu = 1/degree, paths through undersampled
references weigh more, so row-normalized diffusion pulls new points
toward sparse regions of the structure.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from . import _parallel
from .dataset_io import DataMatrix
from .kernel import BandwidthSpec, gaussian_kernel


@dataclass(frozen=True)
class MgcKernel:
    """Symmetric affinity matrix over generated points, with its measure."""

    values: np.ndarray
    references: np.ndarray
    measure: np.ndarray

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        refs = np.asarray(self.references, dtype=float)
        mu = np.asarray(self.measure, dtype=float)
        if vals.ndim != 2 or vals.shape[0] != vals.shape[1]:
            raise ValueError("kernel must be square")
        if vals.size and vals.min() < 0:
            raise ValueError("kernel entries must be nonnegative")
        asym = np.abs(vals - vals.T).max() if vals.size else 0.0
        if asym > 1e-10 * max(1.0, vals.max(initial=0.0)):
            raise ValueError(f"kernel asymmetric by {asym:.3e}")
        if mu.shape != (refs.shape[0],):
            raise ValueError("measure must hold one weight per reference point")
        for arr in (vals, refs, mu):
            arr.setflags(write=False)
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "references", refs)
        object.__setattr__(self, "measure", mu)

    @property
    def m(self) -> int:
        return self.values.shape[0]


def _point_matrix(obj) -> np.ndarray:
    if hasattr(obj, "points"):
        return np.asarray(obj.points, dtype=float)
    return np.asarray(obj, dtype=float)


def mgc_kernel(y, x, measure, bw: BandwidthSpec, *, row_scales=None, col_scales=None) -> MgcKernel:
    """Build the measure-weighted kernel A diag(mu) A^T with A(i,r) = K(y_i, x_r)."""
    y_arr, x_arr = _point_matrix(y), _point_matrix(x)
    mu = np.asarray(measure, dtype=float)
    if y_arr.shape[1] != x_arr.shape[1]:
        raise ValueError(
            f"dimension mismatch: {y_arr.shape[1]} vs {x_arr.shape[1]} columns"
        )
    if mu.shape != (x_arr.shape[0],):
        raise ValueError("measure length must match the reference count")
    if mu.size and mu.min() <= 0:
        raise ValueError("measure entries must be positive")
    cross = gaussian_kernel(y_arr, x_arr, bw, row_scales=row_scales, col_scales=col_scales)
    weighted = cross.values * np.sqrt(mu)
    khat = _parallel.matmul(weighted, weighted.T)
    khat = 0.5 * (khat + khat.T)
    return MgcKernel(khat, references=x_arr, measure=mu)


def diffuse(khat: MgcKernel, y0, t: int) -> DataMatrix:
    """Row-normalize the kernel and apply it t times to the generated points."""
    if t < 0:
        raise ValueError("diffusion time must be >= 0")
    pts = _point_matrix(y0)
    if pts.shape[0] != khat.m:
        raise ValueError(
            f"kernel is {khat.m} x {khat.m} but there are {pts.shape[0]} points"
        )
    names = y0.col_names if isinstance(y0, DataMatrix) else None
    if t == 0 or khat.m == 0:
        return DataMatrix(pts.copy(), names)
    sums = khat.values.sum(axis=1)
    if sums.min() <= 0:
        where = int(np.argmin(sums))
        raise ValueError(
            f"generated point {where} has zero affinity to every reference; "
            "the diffusion bandwidth is too small"
        )
    op = khat.values / sums[:, None]
    out = pts
    for _ in range(int(t)):
        out = _parallel.matmul(op, out)
    return DataMatrix(out, names)


def rescale(yt, x) -> DataMatrix:
    """Match each column's scale to the originals.

    Column j is multiplied by percentile(X[:, j], 99) / max(Y[:, j]);
    a column whose maximum is zero is left as is, with a warning.
    """
    y_arr = _point_matrix(yt).copy()
    x_arr = _point_matrix(x)
    if y_arr.shape[1] != x_arr.shape[1]:
        raise ValueError(
            f"dimension mismatch: {y_arr.shape[1]} vs {x_arr.shape[1]} columns"
        )
    names = yt.col_names if isinstance(yt, DataMatrix) else None
    if y_arr.shape[0] == 0:
        return DataMatrix(y_arr, names)
    targets = np.percentile(x_arr, 99, axis=0)
    for j in range(y_arr.shape[1]):
        peak = y_arr[:, j].max()
        if peak == 0.0:
            warnings.warn(
                f"column {j} has zero maximum; leaving it unscaled", RuntimeWarning
            )
            continue
        y_arr[:, j] *= targets[j] / peak
    return DataMatrix(y_arr, names)
