"""Unsupervised feature filter metrics and the combined rank-weighted score."""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Sequence

import numpy as np
from scipy.spatial.distance import cdist

from .graph import FeatureTable

HIGHER = "higher_is_relevant"
LOWER = "lower_is_relevant"

VARIANCE = "variance"
MULTICOLLINEARITY = "multicollinearity"
LAPLACIAN = "laplacian"
MUTUAL_INFO = "mutual_info"

DEFAULT_LAPLACIAN_K = 5
DEFAULT_MI_BINS = 5

# Relevance is rounded so that float noise (e.g. from a different row order)
# cannot reorder features whose scores tie analytically.
_RELEVANCE_DECIMALS = 12


class RankingContractError(ValueError):
    pass


@dataclass(frozen=True)
class MetricScores:
    metric_name: str
    feature_names: tuple[str, ...]
    raw: np.ndarray
    orientation: str
    degenerate: tuple[bool, ...] = ()

    @cached_property
    def relevance(self) -> np.ndarray:
        """Raw scores flipped so larger is better, then min-max scaled to [0, 1].

        All-equal scores map to 0.5.
        """
        raw = np.asarray(self.raw, dtype=float)
        if raw.size == 0:
            return raw
        lo, hi = raw.min(), raw.max()
        if hi - lo <= 1e-12 * max(1.0, abs(hi)):
            return np.full_like(raw, 0.5)
        rel = (raw - lo) / (hi - lo) if self.orientation == HIGHER else (hi - raw) / (hi - lo)
        return np.round(rel, _RELEVANCE_DECIMALS)

    def order(self) -> list[int]:
        """Feature indices from most to least relevant; ties keep index order."""
        return sorted(range(len(self.feature_names)), key=lambda k: (-self.relevance[k], k))


def _matrix(ft: FeatureTable) -> np.ndarray:
    return np.asarray(ft.to_float().values, dtype=float)


def variance_scores(ft: FeatureTable) -> MetricScores:
    x = _matrix(ft)
    raw = x.var(axis=0) if ft.n_nodes else np.zeros(ft.n_features)
    if ft.n_nodes:
        raw[np.ptp(x, axis=0) == 0] = 0.0
    return MetricScores(VARIANCE, ft.feature_names, raw, HIGHER)


def pearson_matrix(x: np.ndarray) -> np.ndarray:
    """Absolute-value-ready Pearson matrix; constant columns correlate 0 with everything."""
    centered = x - x.mean(axis=0)
    norms = np.sqrt((centered**2).sum(axis=0))
    varying = norms > 0
    r = np.zeros((x.shape[1], x.shape[1]))
    cv = centered[:, varying] / norms[varying]
    r[np.ix_(varying, varying)] = np.clip(cv.T @ cv, -1.0, 1.0)
    return r


def multicollinearity_scores(ft: FeatureTable) -> MetricScores:
    """1 - the strongest absolute correlation with any other feature."""
    x = _matrix(ft)
    m = ft.n_features
    if m < 2:
        return MetricScores(MULTICOLLINEARITY, ft.feature_names, np.ones(m), HIGHER)
    r = np.abs(pearson_matrix(x))
    np.fill_diagonal(r, -np.inf)
    raw = 1.0 - r.max(axis=1)
    return MetricScores(MULTICOLLINEARITY, ft.feature_names, raw, HIGHER)


def knn_affinity(x: np.ndarray, k: int = DEFAULT_LAPLACIAN_K, bandwidth: float | None = None) -> np.ndarray:
    """Symmetrized heat-kernel kNN affinity matrix.

    Neighbour ties are broken by smaller node index. The default bandwidth is
    the mean squared distance over all (node, kNN neighbour) pairs.
    """
    n = x.shape[0]
    k = min(k, n - 1)
    if k < 1:
        raise ValueError("need at least two nodes for a kNN graph")
    sq = cdist(x, x, "sqeuclidean")
    mask = np.zeros((n, n), dtype=bool)
    idx = np.arange(n)
    for i in range(n):
        others = idx[idx != i]
        nearest = others[np.lexsort((others, sq[i, others]))[:k]]
        mask[i, nearest] = True
    if bandwidth is None:
        bandwidth = float(sq[mask].mean())
        if bandwidth <= 0:
            bandwidth = 1.0
    elif bandwidth <= 0:
        raise ValueError("bandwidth must be positive")
    mask |= mask.T
    return np.where(mask, np.exp(-sq / bandwidth), 0.0)


def laplacian_scores(
    ft: FeatureTable, k: int = DEFAULT_LAPLACIAN_K, bandwidth: float | None = None
) -> MetricScores:
    """Laplacian score per feature; low scores respect the local kNN structure best.

    Constant features (zero weighted variance) get the score 2.0, an upper
    bound on every attainable score, and are flagged degenerate.
    """
    x = _matrix(ft)
    w = knn_affinity(x, k, bandwidth)
    d = w.sum(axis=1)
    lap = np.diag(d) - w
    raw = np.empty(ft.n_features)
    degenerate = []
    for f in range(ft.n_features):
        col = x[:, f]
        centered = col - (col @ d) / d.sum()
        denom = centered @ (d * centered)
        if denom <= 1e-15:
            raw[f] = 2.0
            degenerate.append(True)
        else:
            raw[f] = (centered @ lap @ centered) / denom
            degenerate.append(False)
    return MetricScores(LAPLACIAN, ft.feature_names, raw, LOWER, tuple(degenerate))


def discretize(x: np.ndarray, bins: int) -> np.ndarray:
    """Equal-width bins over [0, 1]; the value 1.0 falls into the last bin."""
    return np.clip(np.floor(x * bins).astype(int), 0, bins - 1)


def mutual_information(a: np.ndarray, b: np.ndarray, bins: int) -> float:
    """Base-2 mutual information of two already-binned integer columns."""
    joint = np.zeros((bins, bins))
    np.add.at(joint, (a, b), 1.0)
    joint /= joint.sum()
    pa, pb = joint.sum(axis=1), joint.sum(axis=0)
    nz = joint > 0
    return float((joint[nz] * np.log2(joint[nz] / np.outer(pa, pb)[nz])).sum())


def mutual_info_scores(ft: FeatureTable, bins: int = DEFAULT_MI_BINS) -> MetricScores:
    """Mean pairwise MI with the other features; redundant features score high."""
    if bins < 1:
        raise ValueError("bins must be positive")
    x = _matrix(ft)
    m = ft.n_features
    if m < 2 or ft.n_nodes == 0:
        return MetricScores(MUTUAL_INFO, ft.feature_names, np.zeros(m), LOWER)
    binned = discretize(x, bins)
    mi = np.zeros((m, m))
    for f in range(m):
        for g in range(f + 1, m):
            mi[f, g] = mi[g, f] = mutual_information(binned[:, f], binned[:, g], bins)
    raw = mi.sum(axis=1) / (m - 1)
    return MetricScores(MUTUAL_INFO, ft.feature_names, raw, LOWER)


@dataclass(frozen=True)
class FeatureRanking:
    features: tuple[str, ...]
    final_scores: dict[str, float]
    score_sums: dict[str, float]
    rank_counts: dict[str, tuple[int, int, int]]
    frm_name: str = ""
    metrics: tuple[MetricScores, ...] = field(default=(), repr=False, compare=False)

    def to_dict(self) -> dict:
        return {
            "frm_name": self.frm_name,
            "ranking": [
                {
                    "rank": pos + 1,
                    "feature": name,
                    "final_score": self.final_scores[name],
                    "score_sum": self.score_sums[name],
                    "rank_counts": list(self.rank_counts[name]),
                }
                for pos, name in enumerate(self.features)
            ],
            "metrics": {
                m.metric_name: {
                    "orientation": m.orientation,
                    "raw": dict(zip(m.feature_names, map(float, m.raw))),
                    "relevance": dict(zip(m.feature_names, map(float, m.relevance))),
                }
                for m in self.metrics
            },
        }


def combined_ranking(metrics: Sequence[MetricScores], frm_name: str = "") -> FeatureRanking:
    """Combine metrics into one ranking.

    Each feature's score is the sum of its relevances across metrics, times
    ``(3*R1 + 2*R2 + R3) / 3`` where ``Rk`` counts the metrics that place it
    k-th. Sorting is by that score, then by the relevance sum, then by
    original feature index.
    """
    if not metrics:
        raise RankingContractError("at least one metric is required")
    names = metrics[0].feature_names
    for m in metrics[1:]:
        if m.feature_names != names:
            raise RankingContractError(
                f"metric {m.metric_name!r} covers {m.feature_names}, expected {names}"
            )
    n = len(names)
    s_sum = np.zeros(n)
    counts = np.zeros((n, 3), dtype=int)
    for m in metrics:
        s_sum += m.relevance
        for pos, k in enumerate(m.order()[:3]):
            counts[k, pos] += 1
    s_sum = np.round(s_sum, _RELEVANCE_DECIMALS)
    weight = (3 * counts[:, 0] + 2 * counts[:, 1] + counts[:, 2]) / 3.0
    final = np.round(s_sum * weight, _RELEVANCE_DECIMALS)
    order = sorted(range(n), key=lambda k: (-final[k], -s_sum[k], k))
    return FeatureRanking(
        features=tuple(names[k] for k in order),
        final_scores={names[k]: float(final[k]) for k in range(n)},
        score_sums={names[k]: float(s_sum[k]) for k in range(n)},
        rank_counts={names[k]: tuple(int(c) for c in counts[k]) for k in range(n)},
        frm_name=frm_name,
        metrics=tuple(metrics),
    )


FRM_REGISTRY: dict[str, tuple[str, ...]] = {
    "FR-Var": (VARIANCE,),
    "FR-MultiCol": (MULTICOLLINEARITY,),
    "FR-Lap": (LAPLACIAN,),
    "FR-MutualInfo": (MUTUAL_INFO,),
    "FR-Var-Col": (VARIANCE, MULTICOLLINEARITY),
    "FR-Col-Lap": (MULTICOLLINEARITY, LAPLACIAN),
    "FR-Var-Col-Lap": (VARIANCE, MULTICOLLINEARITY, LAPLACIAN),
    "FR-All": (VARIANCE, MULTICOLLINEARITY, LAPLACIAN, MUTUAL_INFO),
}


def compute_metric(
    name: str, ft: FeatureTable, k: int = DEFAULT_LAPLACIAN_K, bandwidth: float | None = None,
    bins: int = DEFAULT_MI_BINS,
) -> MetricScores:
    dispatch: dict[str, Callable[[], MetricScores]] = {
        VARIANCE: lambda: variance_scores(ft),
        MULTICOLLINEARITY: lambda: multicollinearity_scores(ft),
        LAPLACIAN: lambda: laplacian_scores(ft, k, bandwidth),
        MUTUAL_INFO: lambda: mutual_info_scores(ft, bins),
    }
    try:
        return dispatch[name]()
    except KeyError:
        raise KeyError(f"unknown metric {name!r}") from None


def rank_features(ft: FeatureTable, frm_name: str = "FR-Var-Col-Lap", **metric_kwargs) -> FeatureRanking:
    """Rank the table's features with a named metric combination."""
    try:
        metric_names = FRM_REGISTRY[frm_name]
    except KeyError:
        raise KeyError(f"unknown ranking method {frm_name!r}; choose from {sorted(FRM_REGISTRY)}") from None
    metrics = [compute_metric(name, ft, **metric_kwargs) for name in metric_names]
    return combined_ranking(metrics, frm_name)
