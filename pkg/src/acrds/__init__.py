"""Respondent-driven sampling and anti-cluster RDS on networks."""

from .errors import AcrdsError
from .graph import Graph, SbmSpec, expected_adjacency, from_edge_list, sample_sbm
from .sampler import Replacement, SamplingConfig, SeedStrategy, run_referral
from .weights import WeightedGraph, WeightScheme, build_weights

__all__ = [
    "AcrdsError",
    "Graph",
    "SbmSpec",
    "expected_adjacency",
    "from_edge_list",
    "sample_sbm",
    "Replacement",
    "SamplingConfig",
    "SeedStrategy",
    "run_referral",
    "WeightedGraph",
    "WeightScheme",
    "build_weights",
]

__version__ = "0.1.0"
