"""Random n-lifts of regular graphs: spectra, Monte Carlo campaigns and inequality checks."""

__version__ = "0.1.0"

from .errors import BatchFileError, CounterexampleError, InputError, LiftSpectraError, SolverError
from .graphs import (
    BaseGraph,
    Spectrum,
    base_spectrum,
    catalog,
    lambda_of,
    load_graph,
    parse_edge_list,
    serialize_edge_list,
    universal_cover_radius,
    validate,
)
from .lift import LiftedGraph, adjacency_apply, identity_lift, random_lift, verify_cover
from .mc import Ecdf, TrialBatch, ecdf, ks_distance, quantiles, ramanujan_probability, run_trials
from .spectra import LambdaReport, dense_lift_spectrum, is_ramanujan, lambda_new, lanczos_extremes

__all__ = [
    "BaseGraph",
    "BatchFileError",
    "CounterexampleError",
    "Ecdf",
    "InputError",
    "LambdaReport",
    "LiftSpectraError",
    "LiftedGraph",
    "SolverError",
    "Spectrum",
    "TrialBatch",
    "adjacency_apply",
    "base_spectrum",
    "catalog",
    "dense_lift_spectrum",
    "ecdf",
    "identity_lift",
    "is_ramanujan",
    "ks_distance",
    "lambda_new",
    "lambda_of",
    "lanczos_extremes",
    "load_graph",
    "parse_edge_list",
    "quantiles",
    "ramanujan_probability",
    "random_lift",
    "run_trials",
    "serialize_edge_list",
    "universal_cover_radius",
    "validate",
    "verify_cover",
]
