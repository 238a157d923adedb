"""Clustering of time series into mutually independent groups."""
from .clustering import (ClusteringResult, ExactOracle, FickleEvaluator, FickleOracle, PluginOracle,
                         clin, clin_split, clink, clink_split, three_sample)
from .core import (CapacityError, InconsistentOracleError, IntegrityError, Partition, RunConfig,
                   SeriesSet, ValidationError)
from .datagen import ProcessSpec, generate
from .estimators import SumInformation, compression_sum_rate, sum_information
from .finite_dist import FiniteJoint, brute_force_finest

__all__ = [
    "CapacityError", "ClusteringResult", "ExactOracle", "FickleEvaluator", "FickleOracle", "FiniteJoint",
    "InconsistentOracleError", "IntegrityError", "Partition", "PluginOracle", "ProcessSpec", "RunConfig",
    "SeriesSet", "SumInformation", "ValidationError", "brute_force_finest", "clin", "clin_split", "clink",
    "clink_split", "compression_sum_rate", "generate", "sum_information", "three_sample",
]
__version__ = "0.1.0"
