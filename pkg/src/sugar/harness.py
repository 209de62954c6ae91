"""Comparison harnesses: density-equalized vs. plain vs. segment-oversampled.

Classification runs k-fold cross-validation where only the training
fold is ever augmented; test folds contain original points only, so no
synthetic point is ever scored.  The synthesis-based augmentation works
class by class: each class's point cloud is equalized along its own
geometry and the synthetic pool is drawn from until class counts match
the majority, which makes the comparison with segment oversampling
head-to-head.
"""

from __future__ import annotations

from dataclasses import replace

import numpy as np

from .dataset_io import DataMatrix, LabeledDataset
from .evaluation import (
    classification_report,
    kfold_indices,
    kmeans,
    knn_classify,
    rand_index,
    smote,
)
from .kernel import BandwidthSpec, gaussian_kernel, pairwise_sq_dist
from .pipeline import SugarConfig, sugar
from .spectral import connected_components


def augment_labeled(train: LabeledDataset, cfg: SugarConfig, vote_k: int = 1) -> LabeledDataset:
    """Equalize the whole training set; new points vote for a label
    among their vote_k nearest original points."""
    result = sugar(train.data, cfg)
    if result.generated.rows == 0:
        return train
    d2 = pairwise_sq_dist(result.generated.values, train.data.values)
    if vote_k == 1:
        labels_new = train.labels[d2.argmin(axis=1)]
    else:
        order = np.argsort(d2, axis=1, kind="stable")[:, :vote_k]
        votes = train.labels[order]
        labels_new = np.array([np.bincount(v).argmax() for v in votes])
    labels = np.concatenate([train.labels, labels_new])
    return LabeledDataset(result.combined, labels)


def _class_config(cfg: SugarConfig, n_cls: int) -> SugarConfig:
    # per-class runs can be small; clamp ranks to stay valid
    r = min(cfg.diffusion_bandwidth.r, n_cls - 1)
    return replace(
        cfg,
        diffusion_bandwidth=BandwidthSpec.adaptive(max(1, r))
        if cfg.diffusion_bandwidth.mode == "adaptive" else cfg.diffusion_bandwidth,
        k_cov=min(cfg.k_cov, n_cls - 1),
    )


def balance_with_sugar(train: LabeledDataset, cfg: SugarConfig, max_rounds: int = 3) -> LabeledDataset:
    """Top every class up to the majority count with synthesized points.

    Each minority class is equalized along its own geometry, repeatedly
    if one pass does not produce enough points; the synthetic pool is
    subsampled (seeded) when it overshoots the balance target.
    """
    counts = np.bincount(train.labels)
    target = int(counts.max())
    parts_x, parts_y = [train.data.values], [train.labels]
    for c in range(counts.shape[0]):
        need = target - int(counts[c])
        if need <= 0:
            continue
        current = train.data.values[train.labels == c]
        pool: list[np.ndarray] = []
        for _ in range(max_rounds):
            res = sugar(current, _class_config(cfg, len(current)))
            if res.generated.rows == 0:
                break
            pool.append(res.generated.values)
            current = res.combined.values
            if sum(len(p) for p in pool) >= need:
                break
        if not pool:
            continue
        synth = np.vstack(pool)
        if len(synth) > need:
            pick = np.random.default_rng(
                np.random.SeedSequence((cfg.seed, c))
            ).choice(len(synth), size=need, replace=False)
            synth = synth[np.sort(pick)]
        parts_x.append(synth)
        parts_y.append(np.full(len(synth), c, dtype=np.int64))
    if len(parts_x) == 1:
        return train
    stacked = DataMatrix(np.vstack(parts_x), train.data.col_names)
    return LabeledDataset(stacked, np.concatenate(parts_y))


def _fold_dataset(data: LabeledDataset, idx: np.ndarray) -> LabeledDataset:
    labels = data.labels[idx]
    missing = sorted(set(range(data.n_classes)) - set(np.unique(labels).tolist()))
    if missing:
        raise ValueError(
            f"fold leaves classes {missing} without training support; use fewer folds"
        )
    return LabeledDataset(DataMatrix(data.data.values[idx], data.data.col_names), labels)


def crossval_compare(
    data: LabeledDataset,
    folds: int = 5,
    knn_k: int = 15,
    cfg: SugarConfig | None = None,
    smote_k: int = 5,
    smote_ratio: float = 1.0,
    seed: int = 0,
) -> dict:
    """Pooled k-fold k-NN reports for plain, SMOTE, and equalized training sets.

    Test folds are drawn from the original points only; each method sees
    the same folds.
    """
    cfg = cfg or SugarConfig()
    n = data.data.rows
    support = np.bincount(data.labels)
    if folds > support.min():
        raise ValueError(
            f"fold count {folds} exceeds the smallest class support {support.min()}"
        )
    preds = {name: np.empty(n, dtype=np.int64) for name in ("orig", "smote", "sugar")}
    for test_idx in kfold_indices(n, folds, seed):
        train_idx = np.setdiff1d(np.arange(n), test_idx)
        train = _fold_dataset(data, train_idx)
        test_points = data.data.values[test_idx]
        variants = {
            "orig": train,
            "smote": smote(train, k=smote_k, target_ratio=smote_ratio, seed=cfg.seed),
            "sugar": balance_with_sugar(train, cfg),
        }
        for name, variant in variants.items():
            preds[name][test_idx] = knn_classify(variant, test_points, knn_k)
    out: dict = {"folds": folds, "knn_k": knn_k}
    for name in ("orig", "smote", "sugar"):
        report = classification_report(data.labels, preds[name])
        out[f"acp_{name}"] = report.acp
        out[f"acr_{name}"] = report.acr
        out[f"report_{name}"] = report
    return out


def clustering_compare(
    data: LabeledDataset,
    k: int,
    cfg: SugarConfig | None = None,
    threshold: float = 0.1,
    kernel_bw: BandwidthSpec | None = None,
    seed: int = 0,
    restarts: int = 8,
) -> dict:
    """k-means Rand index and component counts, before vs. after equalization.

    Components are counted on a locally-scaled (adaptive) kernel, where
    undersampling stretches the scales of sparse regions until separate
    groups chain together; equalizing restores the local neighborhoods.
    The Rand index is always computed on the original points only; after
    augmentation their labels come from clustering the combined set.
    """
    cfg = cfg or SugarConfig()
    kernel_bw = kernel_bw or BandwidthSpec.adaptive(20)
    x = data.data
    n = x.rows
    comp_orig, _ = connected_components(gaussian_kernel(x.values, x.values, kernel_bw), threshold)
    labels_orig = kmeans(x.values, k, seed=seed, restarts=restarts)
    ri_orig = rand_index(labels_orig, data.labels)

    combined = sugar(x, cfg).combined
    comp_sugar, _ = connected_components(
        gaussian_kernel(combined.values, combined.values, kernel_bw), threshold
    )
    labels_combined = kmeans(combined.values, k, seed=seed, restarts=restarts)
    ri_sugar = rand_index(labels_combined[:n], data.labels)
    return {
        "k": k,
        "threshold": threshold,
        "components_orig": comp_orig,
        "components_sugar": comp_sugar,
        "ri_orig": float(ri_orig),
        "ri_sugar": float(ri_sugar),
    }
