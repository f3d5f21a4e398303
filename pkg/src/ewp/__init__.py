"""Entropy weighted power k-means clustering."""

from .baselines import lloyd_fit, power_kmeans_fit
from .core import (
    ContractError,
    EmptyClusterSignal,
    FitResult,
    SolverConfig,
    weighted_sq_dist,
)
from .datagen import LabeledDataset, gen_feature_sel, gen_sim1, gen_sim2
from .metrics import kmeans_objective, nmi
from .power_mean import power_mean, power_mean_gradient
from .solver import (
    assign,
    ewp_fit,
    majorizer_weights,
    objective,
    update_centroids,
    update_weights,
)

__all__ = [
    "ContractError",
    "EmptyClusterSignal",
    "FitResult",
    "LabeledDataset",
    "SolverConfig",
    "assign",
    "ewp_fit",
    "gen_feature_sel",
    "gen_sim1",
    "gen_sim2",
    "kmeans_objective",
    "lloyd_fit",
    "majorizer_weights",
    "nmi",
    "objective",
    "power_kmeans_fit",
    "power_mean",
    "power_mean_gradient",
    "update_centroids",
    "update_weights",
    "weighted_sq_dist",
]
