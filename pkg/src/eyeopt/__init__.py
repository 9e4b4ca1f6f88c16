"""Genetic-pool Bayesian optimization with fundus image preprocessing and features."""

__version__ = "0.1.0"

from .agbo import AgboConfig, ObjectiveHandle, agbo_run, best_of_history, compare_methods
from .evolution import Categorical, Continuous, GaParams, Integer, SearchSpace
from .surrogate import AcquisitionSpec, KernelSpec

__all__ = [
    "AgboConfig",
    "ObjectiveHandle",
    "agbo_run",
    "best_of_history",
    "compare_methods",
    "SearchSpace",
    "Continuous",
    "Integer",
    "Categorical",
    "GaParams",
    "KernelSpec",
    "AcquisitionSpec",
]
