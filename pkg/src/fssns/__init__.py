"""Feature-selected social network simulation.

Rank node attributes with unsupervised filters, then grow feature
combinations in rank order, tuning per-feature homophily and preferential
attachment weights with a Tree-structured Parzen Estimator so that the
simulated degree distribution matches a target network.
"""

from .evaluation import EvalConfig, dd_error, dd_similarity, degree_histogram, js_divergence
from .filters import FRM_REGISTRY, FeatureRanking, MetricScores, combined_ranking, rank_features
from .graph import FeatureTable, Graph, degree_sequence, parse_graphml, read_graphml
from .prep import CleaningReport, SamplerConfig, normalize_crisp, prepare, sample_connected
from .sns import SimulationParams, SocialDNA, form_network
from .synthetic import planted_homophily, random_graph
from .tpe import SearchSpace, TpeConfig, TrialHistory, optimize
from .wrapper import WrapperResult, run_wrapper

__all__ = [
    "CleaningReport", "EvalConfig", "FRM_REGISTRY", "FeatureRanking", "FeatureTable", "Graph",
    "MetricScores", "SamplerConfig", "SearchSpace", "SimulationParams", "SocialDNA", "TpeConfig",
    "TrialHistory", "WrapperResult", "combined_ranking", "dd_error", "dd_similarity",
    "degree_histogram", "degree_sequence", "form_network", "js_divergence", "normalize_crisp",
    "optimize", "parse_graphml", "planted_homophily", "prepare", "rank_features", "random_graph", "read_graphml", "run_wrapper",
    "sample_connected",
]
