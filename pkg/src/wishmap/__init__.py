"""Dimensionality reduction as MAP inference on graph-Laplacian Wishart models."""

from .dataio import (
    DataMatrix,
    Embedding,
    load_csv,
    load_embedding,
    resample_groups,
    save_embedding,
    synth_blobs,
)
from .diststats import (
    DistanceMoments,
    distance_covariance,
    distance_moments,
    mc_verify_distances,
)
from .graph import (
    GraphLaplacian,
    NeighborGraph,
    center_laplacian,
    covariance_estimate,
    knn_graph,
    laplacian,
)
from .kernels import (
    KernelMatrix,
    double_center,
    log_ansatz,
    log_kernel,
    psd_check,
    sq_distance_matrix,
    student_t_kernel,
)
from .objectives import (
    ObjectiveSpec,
    ObjectiveValue,
    bernoulli_loglik,
    cne_objective,
    epsilon_tilde,
    negtsne_rescaling_check,
    objective_value,
    spec_param,
    wishart_objective,
)
from .optim import (
    FitReport,
    OptimizerConfig,
    fit,
    grad_check,
    laplacian_eigenmaps,
    pca_init,
)

__version__ = "0.1.0"
