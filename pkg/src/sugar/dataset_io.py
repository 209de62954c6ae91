"""Data containers, CSV persistence, and seeded synthetic generators."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

TAU_LO = 3.0 * math.pi / 2.0
TAU_HI = 9.0 * math.pi / 2.0


def _frozen_array(values, dtype=float, ndim=None) -> np.ndarray:
    arr = np.array(values, dtype=dtype)
    if ndim is not None and arr.ndim != ndim:
        raise ValueError(f"expected {ndim}-dimensional array, got shape {arr.shape}")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class DataMatrix:
    """An N x D point set, optionally with column names.

    Rows are points.  Values must be finite.  N = 0 is permitted so an
    empty generated set is representable; D must be at least 1.
    """

    values: np.ndarray
    col_names: tuple[str, ...] | None = None

    def __post_init__(self):
        arr = _frozen_array(self.values, ndim=2)
        object.__setattr__(self, "values", arr)
        if arr.shape[1] < 1:
            raise ValueError("DataMatrix needs at least one column")
        if not np.isfinite(arr).all():
            raise ValueError("DataMatrix values must be finite (no NaN/Inf)")
        if self.col_names is not None:
            names = tuple(str(c) for c in self.col_names)
            if len(names) != arr.shape[1]:
                raise ValueError(
                    f"{len(names)} column names for {arr.shape[1]} columns"
                )
            object.__setattr__(self, "col_names", names)

    @property
    def rows(self) -> int:
        return self.values.shape[0]

    @property
    def cols(self) -> int:
        return self.values.shape[1]

    def __array__(self, dtype=None, copy=None):
        if dtype is not None:
            return self.values.astype(dtype)
        return self.values

    def with_values(self, values) -> "DataMatrix":
        """Same column names, new values."""
        return DataMatrix(values, self.col_names)


@dataclass(frozen=True)
class LabeledDataset:
    """Points plus an integer class label per point.

    Labels must be 0..C-1 with every class present.
    """

    data: DataMatrix
    labels: np.ndarray

    def __post_init__(self):
        labels = _frozen_array(self.labels, dtype=np.int64, ndim=1)
        object.__setattr__(self, "labels", labels)
        if labels.shape[0] != self.data.rows:
            raise ValueError(
                f"{labels.shape[0]} labels for {self.data.rows} data rows"
            )
        if labels.size:
            if labels.min() < 0:
                raise ValueError("labels must be nonnegative")
            present = np.unique(labels)
            if not np.array_equal(present, np.arange(labels.max() + 1)):
                missing = sorted(set(range(labels.max() + 1)) - set(present.tolist()))
                raise ValueError(f"labels must cover 0..C-1; missing {missing}")

    @property
    def n_classes(self) -> int:
        return int(self.labels.max()) + 1 if self.labels.size else 0


@dataclass(frozen=True)
class SwissRollSpec:
    """Parameters for the rolled-sheet generator.

    theta_bias controls how strongly the angular density decays toward
    high angles (0 = uniform); h is drawn uniformly from h_range.
    """

    n: int
    theta_range: tuple[float, float] = (TAU_LO, TAU_HI)
    theta_bias: float = 1.0
    h_range: tuple[float, float] = (0.0, 20.0)
    seed: int = 0

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("n must be >= 1")
        if not self.theta_range[1] > self.theta_range[0]:
            raise ValueError("theta_range must have positive width")
        if not self.h_range[1] > self.h_range[0]:
            raise ValueError("h_range must have positive width")
        if self.theta_bias < 0:
            raise ValueError("theta_bias must be >= 0")


def _format_cell(v: float) -> str:
    # repr round-trips exactly; integral values print without the ".0"
    if v == int(v) and abs(v) < 1e16:
        return str(int(v))
    return repr(float(v))


def save_csv(m: DataMatrix, path) -> None:
    """Write ``m`` as comma-separated values, header first when named."""
    path = Path(path)
    try:
        with path.open("w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            if m.col_names is not None:
                writer.writerow(m.col_names)
            for row in m.values:
                writer.writerow([_format_cell(v) for v in row])
    except OSError as err:
        raise OSError(f"cannot write CSV to {path}: {err}") from err


def load_csv(path, has_header: bool = False) -> DataMatrix:
    """Read a rectangular numeric CSV into a DataMatrix.

    Malformed cells are reported with their 1-based row and column.
    """
    path = Path(path)
    with path.open("r", newline="") as fh:
        reader = csv.reader(fh)
        rows = [row for row in reader if row]
    if not rows:
        raise ValueError(f"{path}: empty file")
    names: tuple[str, ...] | None = None
    start = 0
    if has_header:
        names = tuple(rows[0])
        start = 1
    width = len(rows[start]) if start < len(rows) else len(names or ())
    if width < 1:
        raise ValueError(f"{path}: no columns")
    data = np.empty((len(rows) - start, width))
    for i, row in enumerate(rows[start:], start=start + 1):
        if len(row) != width:
            raise ValueError(
                f"{path}: ragged row {i} has {len(row)} cells, expected {width}"
            )
        for j, cell in enumerate(row):
            try:
                v = float(cell)
            except ValueError as err:
                raise ValueError(
                    f"{path}: row {i}, column {j + 1}: cannot parse {cell!r}"
                ) from err
            if not math.isfinite(v):
                raise ValueError(f"{path}: row {i}, column {j + 1}: non-finite value")
            data[i - start - 1, j] = v
    return DataMatrix(data, names)


def decay_warp(u, bias: float) -> np.ndarray:
    """Map |u| in [0, 1] to [0, 1] so the output density decays exponentially.

    The warped density is proportional to exp(-log(1 + bias) * w), so the
    density ratio between the two ends is exactly 1 + bias and stays
    bounded for every bias; bias = 0 is the identity (uniform output).
    """
    u = np.abs(np.asarray(u, dtype=float))
    if bias < 0:
        raise ValueError("bias must be >= 0")
    if bias == 0:
        return u
    beta = math.log1p(bias)
    return -np.log1p(-u * (1.0 - math.exp(-beta))) / beta


def gen_circle(n: int, bias: float = 0.0, seed: int = 0) -> DataMatrix:
    """n points on the unit circle, densest at angle 0 when bias > 0.

    Angles come from warping a uniform variable u on (-1, 1) through
    angle = pi * sign(u) * decay_warp(|u|, bias); the angular density is
    highest at 0 and decays with |angle| down to 1/(1 + bias) of the
    peak, and bias = 0 yields uniform angles.
    """
    if n < 3:
        raise ValueError("n must be >= 3")
    rng = np.random.default_rng(seed)
    u = rng.uniform(-1.0, 1.0, size=n)
    angles = math.pi * np.sign(u) * decay_warp(u, bias)
    pts = np.column_stack([np.cos(angles), np.sin(angles)])
    return DataMatrix(pts, ("x", "y"))


def gen_swiss_roll(spec: SwissRollSpec) -> DataMatrix:
    """Roll a sheet into 3-D: rows are (6*theta*cos(theta), h, 6*theta*sin(theta)).

    theta uses the same one-sided decay warp as the circle generator, so
    its density falls by a factor of 1 + theta_bias across theta_range.
    """
    rng = np.random.default_rng(spec.seed)
    lo, hi = spec.theta_range
    theta = lo + (hi - lo) * decay_warp(rng.uniform(0.0, 1.0, size=spec.n), spec.theta_bias)
    h = rng.uniform(spec.h_range[0], spec.h_range[1], size=spec.n)
    pts = np.column_stack([6.0 * theta * np.cos(theta), h, 6.0 * theta * np.sin(theta)])
    return DataMatrix(pts, ("x", "y", "z"))


def swiss_roll_points(theta, h) -> np.ndarray:
    """The rolling map itself, exposed for construction checks."""
    theta = np.asarray(theta, dtype=float)
    h = np.asarray(h, dtype=float)
    return np.column_stack([6.0 * theta * np.cos(theta), h, 6.0 * theta * np.sin(theta)])


def _as_covariance(cov, dim: int) -> np.ndarray:
    cov = np.asarray(cov, dtype=float)
    if cov.ndim == 0:
        cov = float(cov) * np.eye(dim)
    elif cov.ndim == 1:
        if cov.shape[0] != dim:
            raise ValueError("diagonal covariance length must match mean length")
        cov = np.diag(cov)
    if cov.shape != (dim, dim):
        raise ValueError(f"covariance shape {cov.shape} does not match dimension {dim}")
    if not np.allclose(cov, cov.T, atol=1e-12):
        raise ValueError("covariance must be symmetric")
    eigvals = np.linalg.eigvalsh(cov)
    if eigvals.min() < -1e-10 * max(1.0, abs(eigvals.max())):
        raise ValueError("covariance must be positive semidefinite")
    return cov


def psd_sqrt(cov: np.ndarray) -> np.ndarray:
    """Symmetric PSD square root; tiny negative eigenvalues clipped to 0."""
    w, u = np.linalg.eigh(np.asarray(cov, dtype=float))
    return (u * np.sqrt(np.clip(w, 0.0, None))) @ u.T


def gen_gaussian_mixture(
    components: Sequence[tuple], n: int, seed: int = 0
) -> LabeledDataset:
    """Sample n points from a Gaussian mixture; labels record the component.

    Each component is (mean, covariance, weight, label); covariance may be
    a scalar, a diagonal vector, or a full symmetric PSD matrix.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if not components:
        raise ValueError("at least one component required")
    means, covs, weights, labels = [], [], [], []
    dim = len(np.atleast_1d(components[0][0]))
    for mean, cov, weight, label in components:
        mean = np.atleast_1d(np.asarray(mean, dtype=float))
        if mean.shape != (dim,):
            raise ValueError("all component means must share one dimension")
        if weight <= 0:
            raise ValueError("component weights must be positive")
        means.append(mean)
        covs.append(_as_covariance(cov, dim))
        weights.append(float(weight))
        labels.append(int(label))
    weights = np.array(weights) / sum(weights)
    rng = np.random.default_rng(seed)
    counts = rng.multinomial(n, weights)
    points = np.empty((n, dim))
    out_labels = np.empty(n, dtype=np.int64)
    pos = 0
    for mean, cov, count, label in zip(means, covs, counts, labels):
        root = psd_sqrt(cov)
        z = rng.standard_normal((count, dim))
        points[pos : pos + count] = mean + z @ root.T
        out_labels[pos : pos + count] = label
        pos += count
    order = rng.permutation(n)
    names = tuple(f"f{j}" for j in range(dim))
    return LabeledDataset(DataMatrix(points[order], names), out_labels[order])
