"""End-to-end synthesis: estimate degrees, generate, diffuse, rescale.

One pass works through the seven stages in order: Gaussian kernel and
degrees on the input, sparsities, local covariances, the generation
plan with its sampled batch, the sparsity-measured two-hop kernel,
powered diffusion of the raw batch, and per-column rescaling.  The
iterated variant reapplies the pass to the running combined set and
records a degree-variance / K-S history.

Two scale choices matter for stability.  The degree bandwidth defaults
to the robust median rule and, when iterating, is resolved once on the
original input and then held fixed: re-resolving it on the growing
combined set lets freshly generated clusters shrink the scale, which
inflates the degree gaps and makes the next round's generation plan
balloon.  The diffusion kernel's adaptive scales are computed on the
union of the input and the raw draws, so the averaging reach reflects
spacing after generation; scales taken from the sparse input would let
sparse-region draws average across half the structure and collapse
inward.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .dataset_io import DataMatrix
from .evaluation import degree_variance, ks_uniform_test
from .generation import generation_bounds, local_covariances, sample_batch
from .kernel import (
    BandwidthSpec,
    adaptive_bandwidths,
    degrees,
    gaussian_kernel,
    maxmin_bandwidth,
)
from .mgc_diffusion import diffuse, mgc_kernel, rescale

Extractor = Callable[[np.ndarray], np.ndarray]

# A generated batch of M points implies M x M kernel work downstream;
# past this size the desk-scale dense path would exhaust memory, and a
# plan this large means the degree-equalization dynamics are diverging
# (each round chases the maximum of increasingly noisy degrees).
MAX_BATCH = 20_000


class PipelineError(RuntimeError):
    """A stage failure, tagged with the stage that raised it."""

    def __init__(self, step: int, name: str, cause: Exception):
        super().__init__(f"step {step} ({name}): {cause}")
        self.step = step
        self.name = name
        self.cause = cause


@dataclass(frozen=True)
class SugarConfig:
    """Knobs for one synthesis pass and the outer iteration loop."""

    degree_bandwidth: BandwidthSpec = field(default_factory=lambda: BandwidthSpec.medmin(2.0))
    diffusion_bandwidth: BandwidthSpec = field(default_factory=lambda: BandwidthSpec.adaptive(10))
    k_cov: int = 5
    t: int = 1
    rescale: bool = True
    seed: int = 0
    max_iters: int = 1
    ks_target_p: float | None = None

    def __post_init__(self):
        if self.t < 0:
            raise ValueError("t must be >= 0")
        if self.k_cov < 1:
            raise ValueError("k_cov must be >= 1")
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")
        if self.seed < 0:
            raise ValueError("seed must be >= 0")
        if self.ks_target_p is not None and not 0.0 < self.ks_target_p < 1.0:
            raise ValueError("ks_target_p must lie in (0, 1)")
        if self.degree_bandwidth.mode == "adaptive":
            raise ValueError(
                "degree bandwidth must resolve to a single scale (fixed or maxmin); "
                "the generation bounds are defined for one sigma^2"
            )

    def to_dict(self) -> dict:
        return {
            "degree_bandwidth": self.degree_bandwidth.describe(),
            "diffusion_bandwidth": self.diffusion_bandwidth.describe(),
            "k_cov": self.k_cov,
            "t": self.t,
            "rescale": self.rescale,
            "seed": self.seed,
            "max_iters": self.max_iters,
            "ks_target_p": self.ks_target_p,
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "SugarConfig":
        kwargs = dict(doc)
        for key in ("degree_bandwidth", "diffusion_bandwidth"):
            if key in kwargs and isinstance(kwargs[key], str):
                kwargs[key] = BandwidthSpec.parse(kwargs[key])
        unknown = set(kwargs) - set(cls.__dataclass_fields__)
        if unknown:
            raise ValueError(f"unknown config fields: {sorted(unknown)}")
        return cls(**kwargs)

    @classmethod
    def from_json(cls, path) -> "SugarConfig":
        with open(path) as fh:
            return cls.from_dict(json.load(fh))


@dataclass(frozen=True)
class IterationRecord:
    """One pass's bookkeeping.

    The variance figures are relative degree variances (degrees divided
    by their mean) of the input and the combined set, both measured with
    one structure-scale ruler: a kernel whose bandwidth is the max-min
    scale of the pass's input.  A fixed common ruler is what makes the
    before/after comparison meaningful once the point count grows.
    """

    iteration: int
    n_input: int
    m_generated: int
    degree_variance_before: float
    degree_variance_after: float
    ks_p: float | None = None

    def to_dict(self) -> dict:
        return {
            "iteration": self.iteration,
            "n_input": self.n_input,
            "m_generated": self.m_generated,
            "degree_variance_before": self.degree_variance_before,
            "degree_variance_after": self.degree_variance_after,
            "ks_p": self.ks_p,
        }


@dataclass(frozen=True)
class AugmentedDataset:
    """Original points, everything generated, and their union."""

    original: DataMatrix
    generated: DataMatrix
    combined: DataMatrix
    history: tuple[IterationRecord, ...]

    def __post_init__(self):
        if not (self.original.cols == self.generated.cols == self.combined.cols):
            raise ValueError("original, generated, and combined must share columns")
        if self.combined.rows != self.original.rows + self.generated.rows:
            raise ValueError("combined must stack original and generated rows")
        object.__setattr__(self, "history", tuple(self.history))


def _as_matrix(x) -> DataMatrix:
    if isinstance(x, DataMatrix):
        return x
    return DataMatrix(np.asarray(x, dtype=float))


def _stage(step: int, name: str, fn, *args, **kwargs):
    try:
        return fn(*args, **kwargs)
    except PipelineError:
        raise
    except Exception as err:
        raise PipelineError(step, name, err) from err


def _ks_probe(values: np.ndarray, eval_coord, eval_range) -> float | None:
    if eval_coord is None:
        return None
    if eval_range is None:
        raise ValueError("eval_range is required when eval_coord is given")
    return ks_uniform_test(eval_coord(values), eval_range).p_value


def _degree_spec(cfg: SugarConfig, sigma2: float | None) -> BandwidthSpec:
    return cfg.degree_bandwidth if sigma2 is None else BandwidthSpec.fixed(sigma2)


def _sugar_once(x: DataMatrix, cfg: SugarConfig, seed_key, iteration: int,
                eval_coord, eval_range, degree_sigma2: float | None = None) -> AugmentedDataset:
    n = x.rows
    if n < max(cfg.k_cov + 1, 2):
        raise ValueError(f"need at least {max(cfg.k_cov + 1, 2)} points, got {n}")

    degree_bw = _degree_spec(cfg, degree_sigma2)
    kern = _stage(1, "degree kernel", gaussian_kernel, x.values, x.values, degree_bw)
    profile = _stage(1, "degree kernel", degrees, kern)
    sigma2 = kern.bandwidth.sigma2
    ruler = BandwidthSpec.fixed(maxmin_bandwidth(x.values, 2.0))
    var_before = degree_variance(x.values, ruler, relative=True)

    covs = _stage(3, "local covariances", local_covariances, x.values, cfg.k_cov)
    plan = _stage(4, "generation plan", generation_bounds, profile, covs, sigma2)
    batch = _stage(4, "sampling", sample_batch, x.values, covs, plan, seed_key)

    if batch.m == 0:
        generated = DataMatrix(np.empty((0, x.cols)), x.col_names)
        record = IterationRecord(
            iteration=iteration,
            n_input=n,
            m_generated=0,
            degree_variance_before=var_before,
            degree_variance_after=var_before,
            ks_p=_ks_probe(x.values, eval_coord, eval_range),
        )
        return AugmentedDataset(x, generated, x, (record,))

    if cfg.diffusion_bandwidth.mode == "adaptive":
        # scales from the union: averaging reach must match spacing
        # after generation, not the sparse input's spacing
        union = np.vstack([x.values, batch.points])
        scales = _stage(
            5, "mgc kernel", adaptive_bandwidths, union, cfg.diffusion_bandwidth.r
        )
        khat = _stage(
            5, "mgc kernel", mgc_kernel,
            batch.points, x.values, profile.sparsities, cfg.diffusion_bandwidth,
            row_scales=scales[n:], col_scales=scales[:n],
        )
    else:
        khat = _stage(
            5, "mgc kernel", mgc_kernel,
            batch.points, x.values, profile.sparsities, cfg.diffusion_bandwidth,
        )
    diffused = _stage(6, "diffusion", diffuse, khat, batch, cfg.t)
    if cfg.rescale:
        final = _stage(7, "rescaling", rescale, diffused, x.values)
    else:
        final = diffused

    generated = DataMatrix(final.values, x.col_names)
    combined = DataMatrix(np.vstack([x.values, generated.values]), x.col_names)
    record = IterationRecord(
        iteration=iteration,
        n_input=n,
        m_generated=batch.m,
        degree_variance_before=var_before,
        degree_variance_after=degree_variance(combined.values, ruler, relative=True),
        ks_p=_ks_probe(combined.values, eval_coord, eval_range),
    )
    return AugmentedDataset(x, generated, combined, (record,))


def _check_eval_args(eval_coord, eval_range) -> None:
    if eval_coord is not None and eval_range is None:
        raise ValueError("eval_range is required when eval_coord is given")


def sugar(x, cfg: SugarConfig | None = None, eval_coord: Extractor | None = None,
          eval_range: tuple[float, float] | None = None) -> AugmentedDataset:
    """One full synthesis pass over x."""
    cfg = cfg or SugarConfig()
    _check_eval_args(eval_coord, eval_range)
    return _sugar_once(_as_matrix(x), cfg, cfg.seed, 1, eval_coord, eval_range)


def sugar_iterate(x, cfg: SugarConfig | None = None, eval_coord: Extractor | None = None,
                  eval_range: tuple[float, float] | None = None) -> AugmentedDataset:
    """Apply passes to the running combined set, up to cfg.max_iters.

    The degree scale is resolved once on the original input and reused
    every round, so rounds stay comparable as the set grows.  Stops
    early once the recorded K-S p-value reaches cfg.ks_target_p.
    """
    cfg = cfg or SugarConfig()
    _check_eval_args(eval_coord, eval_range)
    original = _as_matrix(x)
    kern = _stage(1, "degree kernel", gaussian_kernel,
                  original.values, original.values, cfg.degree_bandwidth)
    sigma2 = kern.bandwidth.sigma2
    current = original
    history: list[IterationRecord] = []
    for j in range(1, cfg.max_iters + 1):
        seed_key = cfg.seed if j == 1 else (cfg.seed, j - 1)
        result = _sugar_once(current, cfg, seed_key, j, eval_coord, eval_range,
                             degree_sigma2=sigma2)
        history.extend(result.history)
        current = result.combined
        p = history[-1].ks_p
        if cfg.ks_target_p is not None and p is not None and p >= cfg.ks_target_p:
            break
    generated = DataMatrix(current.values[original.rows:], original.col_names)
    return AugmentedDataset(original, generated, current, tuple(history))
