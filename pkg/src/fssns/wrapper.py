"""Forward feature inclusion with stop-loss, one optimization per combination."""

from __future__ import annotations

import logging
import math
import time
from dataclasses import dataclass, field
from typing import Callable, Sequence

from .evaluation import EvalConfig, degree_histogram, dd_similarity
from .filters import FeatureRanking
from .graph import FeatureTable, Graph
from .sns import SimulationParams, SocialDNA, form_network
from .tpe import OptimizeResult, SearchSpace, TpeConfig, TrialHistory, optimize

logger = logging.getLogger(__name__)


class WrapperContractError(ValueError):
    pass


@dataclass
class CombinationResult:
    """Outcome of optimizing one feature combination."""

    best_similarity: float
    best_dna: SocialDNA | None = None
    n_trials: int = 0
    history: TrialHistory | None = None


@dataclass
class WrapperStep:
    features: tuple[str, ...]
    best_similarity: float
    best_dna: SocialDNA | None
    n_trials: int
    seconds: float
    improved: bool
    history: TrialHistory | None = field(default=None, repr=False)

    def to_dict(self) -> dict:
        return {
            "features": list(self.features),
            "best_similarity": self.best_similarity,
            "best_error": 1.0 - self.best_similarity,
            "best_dna": self.best_dna.to_dict() if self.best_dna is not None else None,
            "n_trials": self.n_trials,
            "seconds": self.seconds,
            "improved": self.improved,
        }


@dataclass
class WrapperResult:
    selected_features: tuple[str, ...]
    best_similarity: float
    steps: list[WrapperStep]
    stopped_early: bool

    @property
    def best_error(self) -> float:
        return 1.0 - self.best_similarity

    @property
    def best_step(self) -> WrapperStep:
        return next(s for s in reversed(self.steps) if s.improved)

    def to_dict(self) -> dict:
        return {
            "selected_features": list(self.selected_features),
            "best_similarity": self.best_similarity,
            "best_error": self.best_error,
            "stopped_early": self.stopped_early,
            "steps": [s.to_dict() for s in self.steps],
        }


def forward_select(
    ranked_features: Sequence[str],
    evaluate: Callable[[tuple[str, ...]], CombinationResult],
    clock: Callable[[], float] = time.perf_counter,
) -> WrapperResult:
    """Add ranked features one at a time, stopping at the first step that does not beat the best.

    Improvement must be strict: a step that only ties the best similarity so
    far ends the search.
    """
    if not ranked_features:
        raise WrapperContractError("feature ranking is empty")
    combination: tuple[str, ...] = ()
    selected: tuple[str, ...] = ()
    global_best = -math.inf
    steps: list[WrapperStep] = []
    stopped = False
    for feature in ranked_features:
        combination = combination + (feature,)
        start = clock()
        result = evaluate(combination)
        elapsed = clock() - start
        improved = result.best_similarity > global_best
        steps.append(
            WrapperStep(combination, result.best_similarity, result.best_dna, result.n_trials, elapsed, improved, result.history)
        )
        logger.info("step %d %s: similarity %.6f", len(steps), combination, result.best_similarity)
        if not improved:
            stopped = True
            break
        selected, global_best = combination, result.best_similarity
    return WrapperResult(selected, global_best, steps, stopped)


def optimize_combination(
    ft: FeatureTable,
    target: Graph,
    features: Sequence[str],
    params: SimulationParams,
    tcfg: TpeConfig,
    ecfg: EvalConfig,
) -> tuple[OptimizeResult, SocialDNA]:
    """Tune sDNA weights for ``features`` to match the target's degree distribution."""
    features = tuple(features)
    target_dd = degree_histogram(target, ecfg)
    space = SearchSpace.box(SocialDNA.dimension_names(features))

    def objective(point):
        dna = SocialDNA.from_point(features, point)
        return dd_similarity(form_network(ft, dna, params), target_dd, ecfg)

    result = optimize(objective, space, tcfg)
    return result, SocialDNA.from_point(features, result.best_point)


def run_wrapper(
    ft: FeatureTable,
    target: Graph,
    ranking: FeatureRanking | Sequence[str],
    params: SimulationParams,
    tcfg: TpeConfig,
    ecfg: EvalConfig,
) -> WrapperResult:
    """Forward selection over the ranking, each combination tuned from a fresh history."""
    features = ranking.features if isinstance(ranking, FeatureRanking) else tuple(ranking)
    unknown = [f for f in features if f not in ft.feature_names]
    if unknown:
        raise WrapperContractError(f"ranked features missing from the table: {unknown}")

    def evaluate(combination):
        result, dna = optimize_combination(ft, target, combination, params, tcfg, ecfg)
        return CombinationResult(result.best_value, dna, len(result.history), result.history)

    return forward_select(features, evaluate)
