"""Statistical and machine-learning evaluation utilities.

Everything here is self-contained so results can double as oracles:
the K-S statistic is the exact sup over the empirical CDF, the Rand
index is pair counting, k-means is plain Lloyd iteration with
greedy++ seeding, and mutual information is the histogram plug-in.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .dataset_io import DataMatrix, LabeledDataset
from .kernel import BandwidthSpec, degrees, gaussian_kernel, pairwise_sq_dist


@dataclass(frozen=True)
class KsResult:
    statistic: float
    p_value: float
    n: int

    def __post_init__(self):
        if not 0.0 <= self.statistic <= 1.0:
            raise ValueError("K-S statistic must lie in [0, 1]")
        if not 0.0 <= self.p_value <= 1.0:
            raise ValueError("p-value must lie in [0, 1]")


@dataclass(frozen=True)
class ClassificationReport:
    """Per-class one-vs-rest precision/recall with their macro averages."""

    precision: np.ndarray
    recall: np.ndarray
    acp: float
    acr: float
    confusion: np.ndarray

    def __post_init__(self):
        for name in ("precision", "recall", "confusion"):
            arr = np.asarray(getattr(self, name))
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)


def kolmogorov_sf(lam: float) -> float:
    """Survival function of the Kolmogorov distribution, 2 sum (-1)^(j-1) exp(-2 j^2 lam^2)."""
    if lam < 1e-8:
        return 1.0
    total = 0.0
    sign = 1.0
    for j in range(1, 100001):
        term = math.exp(-2.0 * j * j * lam * lam)
        total += sign * term
        if term < 1e-10:
            break
        sign = -sign
    return min(1.0, max(0.0, 2.0 * total))


def ks_uniform_test(v, rng: tuple[float, float]) -> KsResult:
    """One-sample K-S test of v against the uniform distribution on rng.

    The statistic is the exact supremum gap between the empirical CDF and
    the uniform CDF; the p-value uses the asymptotic series with the
    (sqrt(n) + 0.12 + 0.11/sqrt(n)) small-sample scaling.
    """
    lo, hi = float(rng[0]), float(rng[1])
    if not hi > lo:
        raise ValueError("range must have positive width")
    x = np.sort(np.asarray(v, dtype=float))
    n = x.shape[0]
    if n < 1:
        raise ValueError("need at least one observation")
    if x[0] < lo or x[-1] > hi:
        raise ValueError(f"values outside the range [{lo}, {hi}]")
    cdf = (x - lo) / (hi - lo)
    steps = np.arange(1, n + 1) / n
    d_plus = float((steps - cdf).max())
    d_minus = float((cdf - (steps - 1.0 / n)).max())
    stat = max(d_plus, d_minus, 0.0)
    root_n = math.sqrt(n)
    p = kolmogorov_sf((root_n + 0.12 + 0.11 / root_n) * stat)
    return KsResult(statistic=stat, p_value=p, n=n)


def degree_variance(x, bw: BandwidthSpec, relative: bool = False) -> float:
    """Sample variance of the Gaussian-kernel degrees under bw.

    With relative=True the degrees are divided by their mean first,
    which makes spreads comparable between point sets whose sizes (and
    hence degree levels) differ.
    """
    pts = np.asarray(x, dtype=float)
    if pts.shape[0] < 2:
        raise ValueError("degree variance needs at least 2 points")
    d = degrees(gaussian_kernel(pts, pts, bw)).degrees
    if relative:
        d = d / d.mean()
    return float(np.var(d, ddof=1))


def _plus_plus_seeding(pts: np.ndarray, k: int, rng) -> np.ndarray:
    n = pts.shape[0]
    centers = [int(rng.integers(n))]
    d2 = pairwise_sq_dist(pts, pts[centers[-1]][None, :])[:, 0]
    for _ in range(k - 1):
        total = d2.sum()
        if total > 0:
            probs = np.cumsum(d2) / total
            idx = int(np.searchsorted(probs, rng.random(), side="right"))
            idx = min(idx, n - 1)
        else:
            remaining = np.setdiff1d(np.arange(n), centers)
            idx = int(remaining[rng.integers(remaining.shape[0])])
        centers.append(idx)
        d2 = np.minimum(d2, pairwise_sq_dist(pts, pts[idx][None, :])[:, 0])
    return pts[centers].copy()


def _lloyd(pts: np.ndarray, centers: np.ndarray, max_iter: int = 300):
    """Lloyd iterations; returns (labels, centers, per-iteration WCSS)."""
    labels = np.full(pts.shape[0], -1, dtype=np.int64)
    history = []
    for _ in range(max_iter):
        d2 = pairwise_sq_dist(pts, centers)
        new_labels = d2.argmin(axis=1)
        dist_to_own = d2[np.arange(pts.shape[0]), new_labels]
        for c in range(centers.shape[0]):
            if not np.any(new_labels == c):
                # revive an empty cluster at the worst-assigned point
                far = int(dist_to_own.argmax())
                new_labels[far] = c
                dist_to_own[far] = 0.0
        history.append(float(d2[np.arange(pts.shape[0]), new_labels].sum()))
        if np.array_equal(new_labels, labels):
            break
        labels = new_labels
        centers = np.stack([pts[labels == c].mean(axis=0) for c in range(centers.shape[0])])
    wcss = float(
        ((pts - centers[labels]) ** 2).sum()
    )
    return labels, centers, wcss, history


def kmeans(x, k: int, seed: int = 0, restarts: int = 8) -> np.ndarray:
    """Cluster labels from the best of ``restarts`` seeded Lloyd runs."""
    pts = np.asarray(x, dtype=float)
    n = pts.shape[0]
    if not 1 <= k <= n:
        raise ValueError(f"need 1 <= k <= N, got k={k}, N={n}")
    if restarts < 1:
        raise ValueError("restarts must be >= 1")
    best_labels, best_wcss = None, np.inf
    for attempt in range(restarts):
        rng = np.random.default_rng(np.random.SeedSequence((int(seed), attempt)))
        centers = _plus_plus_seeding(pts, k, rng)
        labels, _, wcss, _ = _lloyd(pts, centers)
        if wcss < best_wcss:
            best_labels, best_wcss = labels, wcss
    return best_labels


def rand_index(a, b) -> float:
    """Fraction of point pairs on which two partitions agree."""
    a = np.asarray(a)
    b = np.asarray(b)
    if a.shape != b.shape:
        raise ValueError("label vectors must have equal length")
    n = a.shape[0]
    if n < 2:
        raise ValueError("Rand index needs at least 2 points")
    _, ai = np.unique(a, return_inverse=True)
    _, bi = np.unique(b, return_inverse=True)
    table = np.zeros((ai.max() + 1, bi.max() + 1), dtype=np.int64)
    np.add.at(table, (ai, bi), 1)

    def pairs(counts):
        counts = counts.astype(np.float64)
        return float((counts * (counts - 1) / 2).sum())

    total = n * (n - 1) / 2
    together = pairs(table.ravel())
    agreements = total + 2 * together - pairs(table.sum(axis=1)) - pairs(table.sum(axis=0))
    return agreements / total


def knn_classify(train: LabeledDataset, test, k: int) -> np.ndarray:
    """Majority vote over the k nearest training points (L2 distance).

    Distance ties keep the lower training index; vote ties go to the
    class of the nearest neighbor among the tied classes.
    """
    pts = np.asarray(test, dtype=float)
    n_train = train.data.rows
    if not 1 <= k <= n_train:
        raise ValueError(f"need 1 <= k <= train size, got k={k}, N={n_train}")
    d2 = pairwise_sq_dist(pts, train.data.values)
    order = np.argsort(d2, axis=1, kind="stable")[:, :k]
    votes = train.labels[order]
    n_classes = train.n_classes
    out = np.empty(pts.shape[0], dtype=np.int64)
    for i in range(pts.shape[0]):
        counts = np.bincount(votes[i], minlength=n_classes)
        top = counts.max()
        tied = np.nonzero(counts == top)[0]
        if tied.shape[0] == 1:
            out[i] = tied[0]
        else:
            for lab in votes[i]:
                if lab in tied:
                    out[i] = lab
                    break
    return out


def classification_report(y_true, y_pred) -> ClassificationReport:
    """Confusion matrix plus macro-averaged class precision and recall."""
    y_true = np.asarray(y_true, dtype=np.int64)
    y_pred = np.asarray(y_pred, dtype=np.int64)
    if y_true.shape != y_pred.shape:
        raise ValueError("label vectors must have equal length")
    if y_true.min(initial=0) < 0 or y_pred.min(initial=0) < 0:
        raise ValueError("labels must be nonnegative")
    n_classes = int(max(y_true.max(initial=-1), y_pred.max(initial=-1))) + 1
    confusion = np.zeros((n_classes, n_classes), dtype=np.int64)
    np.add.at(confusion, (y_true, y_pred), 1)
    tp = np.diag(confusion).astype(float)
    predicted = confusion.sum(axis=0).astype(float)
    support = confusion.sum(axis=1).astype(float)
    precision = np.divide(tp, predicted, out=np.zeros(n_classes), where=predicted > 0)
    recall = np.divide(tp, support, out=np.zeros(n_classes), where=support > 0)
    return ClassificationReport(
        precision=precision,
        recall=recall,
        acp=float(precision.mean()),
        acr=float(recall.mean()),
        confusion=confusion,
    )


def smote(data: LabeledDataset, k: int = 5, target_ratio: float = 1.0, seed: int = 0) -> LabeledDataset:
    """Oversample minority classes along segments between same-class neighbors.

    Synthetic points are x + u (x_nn - x) with u uniform on [0, 1] and
    x_nn one of the k nearest same-class neighbors, generated until each
    class reaches target_ratio times the majority count.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    if not 0 < target_ratio <= 1.0:
        raise ValueError("target_ratio must be in (0, 1]")
    labels = data.labels
    counts = np.bincount(labels)
    majority = int(counts.max())
    new_points, new_labels = [], []
    for c in range(counts.shape[0]):
        need = int(round(target_ratio * majority)) - int(counts[c])
        if need <= 0:
            continue
        if counts[c] < 2:
            raise ValueError(f"class {c} has a single point; cannot interpolate")
        members = data.data.values[labels == c]
        k_eff = min(k, members.shape[0] - 1)
        d2 = pairwise_sq_dist(members, members)
        np.fill_diagonal(d2, np.inf)
        neighbors = np.argsort(d2, axis=1, kind="stable")[:, :k_eff]
        rng = np.random.default_rng(np.random.SeedSequence((int(seed), c)))
        base = rng.integers(members.shape[0], size=need)
        pick = rng.integers(k_eff, size=need)
        u = rng.random(size=need)
        anchors = members[base]
        partners = members[neighbors[base, pick]]
        new_points.append(anchors + u[:, None] * (partners - anchors))
        new_labels.append(np.full(need, c, dtype=np.int64))
    if not new_points:
        return data
    stacked = np.vstack([data.data.values] + new_points)
    out_labels = np.concatenate([labels] + new_labels)
    return LabeledDataset(DataMatrix(stacked, data.data.col_names), out_labels)


def mutual_information(u, v, bins: int | None = None) -> float:
    """Histogram plug-in mutual information in nats, equal-width bins."""
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    if u.shape != v.shape or u.ndim != 1:
        raise ValueError("inputs must be equal-length vectors")
    n = u.shape[0]
    if bins is None:
        bins = max(2, math.ceil(math.sqrt(n / 5)))
    if bins < 2:
        raise ValueError("bins must be >= 2")
    for name, w in (("u", u), ("v", v)):
        if w.max() - w.min() <= 0:
            raise ValueError(f"{name} has zero-width range")
    joint, _, _ = np.histogram2d(u, v, bins=bins)
    p = joint / n
    pu = p.sum(axis=1)
    pv = p.sum(axis=0)
    mask = p > 0
    ratio = p[mask] / np.outer(pu, pv)[mask]
    return float((p[mask] * np.log(ratio)).sum())


def kfold_indices(n: int, folds: int, seed: int = 0) -> list[np.ndarray]:
    """Shuffled plain split of range(n) into ``folds`` test index blocks."""
    if not 2 <= folds <= n:
        raise ValueError(f"need 2 <= folds <= n, got folds={folds}, n={n}")
    perm = np.random.default_rng(seed).permutation(n)
    return [np.sort(chunk) for chunk in np.array_split(perm, folds)]
