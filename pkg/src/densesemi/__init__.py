"""Density-sensitive semisupervised kernel regression."""

from .density import DensityModel, SmoothingKernel, evaluate, evaluate_batch, fit_density
from .metric import (
    MetricGraph,
    MetricParams,
    PathDistance,
    build_graph,
    distances_from,
    edge_weight,
    shortest_distance,
)
from .regress import (
    HyperParams,
    LabeledSample,
    Regressor,
    empirical_risk,
    fit,
    fit_supervised,
    predict,
    predict_batch,
)
from .adapt import CvReport, ParamGrid, oracle_gap, select, split

__version__ = "0.1.0"
