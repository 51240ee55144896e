"""Social network simulator driven by per-feature homophily / preferential weights.

Link rule
---------
For nodes ``i`` and ``j`` with crisp feature rows ``x_i``, ``x_j``::

    score(i, j) = sum_f hdna_f * (1 - |x_if - x_jf|)
                + sum_f pdna_f * (x_if * d_j + x_jf * d_i) / 2
                + noise_ij

where ``d`` is the current degree divided by ``max(1, current max degree)``
and ``noise_ij ~ U(0, random_interference)`` is drawn once per pair. Edges
are placed greedily, one at a time, always taking the best-scoring free pair
under the degrees reached so far, until the edge budget is met.
"""

from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .graph import FeatureTable, Graph

logger = logging.getLogger(__name__)


class SimulationConfigError(ValueError):
    pass


@dataclass(frozen=True)
class SocialDNA:
    active_features: tuple[str, ...]
    hdna: np.ndarray
    pdna: np.ndarray

    def __post_init__(self):
        hdna = np.asarray(self.hdna, dtype=float).reshape(-1)
        pdna = np.asarray(self.pdna, dtype=float).reshape(-1)
        m = len(self.active_features)
        if hdna.shape != (m,) or pdna.shape != (m,):
            raise ValueError(f"expected {m} hdna and {m} pdna weights, got {hdna.size} and {pdna.size}")
        if np.any(np.abs(hdna) > 1) or np.any(np.abs(pdna) > 1):
            raise ValueError("sDNA weights must lie in [-1, 1]")
        object.__setattr__(self, "active_features", tuple(self.active_features))
        object.__setattr__(self, "hdna", hdna)
        object.__setattr__(self, "pdna", pdna)

    @property
    def dim(self) -> int:
        return 2 * len(self.active_features)

    @staticmethod
    def dimension_names(features: Sequence[str]) -> list[str]:
        """Search-space layout: all hdna weights, then all pdna weights."""
        return [f"hdna[{f}]" for f in features] + [f"pdna[{f}]" for f in features]

    @classmethod
    def from_point(cls, features: Sequence[str], point: Sequence[float]) -> "SocialDNA":
        point = np.asarray(point, dtype=float)
        m = len(features)
        if point.shape != (2 * m,):
            raise ValueError(f"point of length {point.size} does not fit {m} features")
        return cls(tuple(features), point[:m], point[m:])

    def to_point(self) -> np.ndarray:
        return np.concatenate([self.hdna, self.pdna])

    def to_dict(self) -> dict:
        return {
            f: {"hdna": float(h), "pdna": float(p)}
            for f, h, p in zip(self.active_features, self.hdna, self.pdna)
        }


@dataclass(frozen=True)
class SimulationParams:
    edge_budget: int
    encounter_rate: int = 1
    random_interference: float = 0.001
    formation_seed: int = 50

    def __post_init__(self):
        if self.edge_budget < 1:
            raise SimulationConfigError("edge_budget must be positive")
        if self.encounter_rate < 1:
            raise SimulationConfigError("encounter_rate must be a positive integer")
        if self.random_interference < 0:
            raise SimulationConfigError("random_interference must be nonnegative")
        if self.random_interference > 0.01:
            warnings.warn(
                f"random_interference={self.random_interference} is large enough to override real score differences",
                stacklevel=2,
            )


def feature_similarity(ft: FeatureTable, i: int, j: int, f: str) -> float:
    col = ft.feature_index(f)
    return 1.0 - abs(float(ft.values[i, col]) - float(ft.values[j, col]))


def pair_score(
    ft: FeatureTable, i: int, j: int, dna: SocialDNA, deg: Sequence[int] | Mapping[int, int], noise: float = 0.0
) -> float:
    """Score of a single pair under the link rule, given current degrees."""
    degrees = np.array([deg[k] for k in range(ft.n_nodes)], dtype=float)
    scale = max(1.0, degrees.max(initial=0.0))
    di, dj = degrees[i] / scale, degrees[j] / scale
    score = noise
    for f, h, p in zip(dna.active_features, dna.hdna, dna.pdna):
        col = ft.feature_index(f)
        xi, xj = float(ft.values[i, col]), float(ft.values[j, col])
        score += h * (1.0 - abs(xi - xj))
        score += p * (xi * dj + xj * di) / 2.0
    return score


def _active_matrix(ft: FeatureTable, dna: SocialDNA) -> np.ndarray:
    cols = [ft.feature_index(f) for f in dna.active_features]
    return np.asarray(ft.values, dtype=float)[:, cols]


def pair_noise(n_pairs: int, params: SimulationParams) -> np.ndarray:
    rng = np.random.default_rng(params.formation_seed)
    return rng.uniform(0.0, params.random_interference, size=n_pairs)


def form_network(ft: FeatureTable, dna: SocialDNA, params: SimulationParams) -> Graph:
    """Simulate a network with exactly ``params.edge_budget`` edges.

    Pairs are enumerated as ``(i, j)``, ``i < j`` in lexicographic order;
    noise is drawn in that order and exact score ties go to the earlier pair.
    """
    n = ft.n_nodes
    n_pairs = n * (n - 1) // 2
    budget = params.edge_budget
    if budget > n_pairs:
        raise SimulationConfigError(f"edge_budget {budget} exceeds the {n_pairs} possible pairs")
    if params.encounter_rate > 1:
        logger.warning("encounter_rate %d collapses to 1 for simple graphs", params.encounter_rate)

    x = _active_matrix(ft, dna)
    iu, ju = np.triu_indices(n, k=1)
    base = (1.0 - np.abs(x[iu] - x[ju])) @ dna.hdna + pair_noise(n_pairs, params)

    if not np.any(dna.pdna):
        chosen = np.argsort(-base, kind="stable")[:budget]
    else:
        attract = x @ dna.pdna
        ai, aj = attract[iu], attract[ju]
        deg = np.zeros(n)
        free = np.ones(n_pairs, dtype=bool)
        chosen = np.empty(budget, dtype=np.intp)
        for step in range(budget):
            scaled = deg / max(1.0, deg.max())
            score = base + (ai * scaled[ju] + aj * scaled[iu]) / 2.0
            score[~free] = -np.inf
            p = int(np.argmax(score))
            chosen[step] = p
            free[p] = False
            deg[iu[p]] += 1
            deg[ju[p]] += 1

    edges = frozenset((int(iu[p]), int(ju[p])) for p in chosen)
    return Graph(ft.node_ids, edges)
