"""Density-equalizing data synthesis along a learned manifold geometry.

The library estimates how densely each point's neighborhood is sampled,
draws new points around undersampled ones, and pulls the draws onto the
data's structure with a measure-weighted diffusion operator, so the
combined set covers the manifold uniformly.
"""

from .dataset_io import (
    DataMatrix,
    LabeledDataset,
    SwissRollSpec,
    gen_circle,
    gen_gaussian_mixture,
    gen_swiss_roll,
    load_csv,
    save_csv,
)
from .evaluation import (
    ClassificationReport,
    KsResult,
    classification_report,
    degree_variance,
    kmeans,
    knn_classify,
    ks_uniform_test,
    mutual_information,
    rand_index,
    smote,
)
from .generation import (
    GeneratedBatch,
    GenerationPlan,
    LocalCovarianceSet,
    generation_bounds,
    local_covariances,
    sample_batch,
)
from .harness import (
    augment_labeled,
    balance_with_sugar,
    clustering_compare,
    crossval_compare,
)
from .kernel import (
    median_min_bandwidth,
    BandwidthSpec,
    DegreeProfile,
    DiffusionOperator,
    KernelMatrix,
    adaptive_bandwidths,
    degrees,
    gaussian_kernel,
    maxmin_bandwidth,
    pairwise_sq_dist,
    row_normalize,
)
from .mgc_diffusion import MgcKernel, diffuse, mgc_kernel, rescale
from .pipeline import AugmentedDataset, PipelineError, SugarConfig, sugar, sugar_iterate
from .spectral import (
    EigenDecomposition,
    Embedding,
    connected_components,
    diffusion_map,
    laplacian_spectrum,
    sym_eigendecomp,
)

__version__ = "0.1.0"

__all__ = [
    "AugmentedDataset",
    "BandwidthSpec",
    "ClassificationReport",
    "DataMatrix",
    "DegreeProfile",
    "DiffusionOperator",
    "EigenDecomposition",
    "Embedding",
    "GeneratedBatch",
    "GenerationPlan",
    "KernelMatrix",
    "KsResult",
    "LabeledDataset",
    "LocalCovarianceSet",
    "MgcKernel",
    "PipelineError",
    "SugarConfig",
    "SwissRollSpec",
    "adaptive_bandwidths",
    "augment_labeled",
    "balance_with_sugar",
    "classification_report",
    "clustering_compare",
    "connected_components",
    "crossval_compare",
    "degree_variance",
    "degrees",
    "diffuse",
    "diffusion_map",
    "gaussian_kernel",
    "gen_circle",
    "gen_gaussian_mixture",
    "gen_swiss_roll",
    "generation_bounds",
    "kmeans",
    "knn_classify",
    "ks_uniform_test",
    "laplacian_spectrum",
    "load_csv",
    "local_covariances",
    "maxmin_bandwidth",
    "median_min_bandwidth",
    "mgc_kernel",
    "mutual_information",
    "pairwise_sq_dist",
    "rand_index",
    "rescale",
    "row_normalize",
    "sample_batch",
    "save_csv",
    "smote",
    "sugar",
    "sugar_iterate",
    "sym_eigendecomp",
]
