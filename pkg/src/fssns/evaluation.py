"""Degree-distribution histograms and Jensen-Shannon error between networks."""

from __future__ import annotations

import csv
import io
import logging
from dataclasses import dataclass

import numpy as np

from .graph import Graph, degree_sequence

logger = logging.getLogger(__name__)


class DistributionMismatchError(ValueError):
    pass


@dataclass(frozen=True)
class EvalConfig:
    numbin: int = 100
    zero_alternative: float = 1e-5

    def __post_init__(self):
        if self.numbin < 1:
            raise ValueError("numbin must be positive")
        if not 0.0 < self.zero_alternative < 1.0 / self.numbin:
            raise ValueError(
                f"zero_alternative must lie in (0, 1/numbin) = (0, {1.0 / self.numbin}), got {self.zero_alternative}"
            )

    @classmethod
    def for_nodes(cls, n_nodes: int, zero_alternative: float = 1e-5) -> "EvalConfig":
        """Pick ``numbin`` as the power of ten matching the node count (at least 100)."""
        numbin = 10 ** max(2, round(np.log10(max(n_nodes, 1))))
        return cls(numbin=int(numbin), zero_alternative=zero_alternative)


@dataclass(frozen=True)
class DegreeDistribution:
    """Smoothed probabilities over unit-width degree bins ``0 .. numbin-1``."""

    probabilities: np.ndarray
    raw: np.ndarray

    def __len__(self) -> int:
        return len(self.probabilities)

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["bin", "probability"])
        for b, p in enumerate(self.probabilities):
            writer.writerow([b, repr(float(p))])
        return buf.getvalue()


def smooth(p: np.ndarray, zero_alternative: float) -> np.ndarray:
    """Replace empty bins by ``zero_alternative`` and renormalize."""
    q = np.where(np.asarray(p, dtype=float) == 0.0, zero_alternative, p)
    return q / q.sum()


def degree_histogram(g: Graph, cfg: EvalConfig) -> DegreeDistribution:
    degrees = np.asarray(degree_sequence(g), dtype=int)
    if degrees.size and degrees.max() >= cfg.numbin:
        logger.warning(
            "%d node degree(s) >= numbin=%d clamped into the last bin",
            int((degrees >= cfg.numbin).sum()), cfg.numbin,
        )
    counts = np.bincount(np.minimum(degrees, cfg.numbin - 1), minlength=cfg.numbin).astype(float)
    raw = counts / counts.sum() if counts.sum() else np.zeros(cfg.numbin)
    if not counts.sum():
        raw[0] = 1.0
    return DegreeDistribution(smooth(raw, cfg.zero_alternative), raw)


def _probs(p) -> np.ndarray:
    return np.asarray(p.probabilities if isinstance(p, DegreeDistribution) else p, dtype=float)


def kl_divergence(p: np.ndarray, q: np.ndarray) -> float:
    nz = p > 0
    return float(np.sum(p[nz] * np.log2(p[nz] / q[nz])))


def js_divergence(p, q) -> float:
    """Base-2 Jensen-Shannon divergence, in [0, 1]."""
    p, q = _probs(p), _probs(q)
    if p.shape != q.shape:
        raise DistributionMismatchError(f"distribution lengths differ: {p.shape} vs {q.shape}")
    m = 0.5 * (p + q)
    js = 0.5 * kl_divergence(p, m) + 0.5 * kl_divergence(q, m)
    return min(max(js, 0.0), 1.0)


def dd_error(sim: Graph, target: Graph | DegreeDistribution, cfg: EvalConfig) -> float:
    """JS divergence between smoothed degree distributions (0 is a perfect match)."""
    target_dd = target if isinstance(target, DegreeDistribution) else degree_histogram(target, cfg)
    return js_divergence(degree_histogram(sim, cfg), target_dd)


def dd_similarity(sim: Graph, target: Graph | DegreeDistribution, cfg: EvalConfig) -> float:
    return 1.0 - dd_error(sim, target, cfg)
