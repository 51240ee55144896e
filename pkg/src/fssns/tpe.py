"""Tree-structured Parzen Estimator over a box of independent uniform dimensions.

The optimizer maximizes. After a random start-up phase each suggestion
splits the history at the ``gamma`` quantile into good and bad trials, fits
one truncated-Gaussian Parzen mixture per dimension to each group (plus a
uniform prior component), draws candidates from the good-trial density
``l(x)`` and returns the one with the largest ``l(x) / g(x)``.
"""

from __future__ import annotations

import csv
import io
import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.special import ndtr, ndtri

_LOG_SQRT_2PI = 0.5 * math.log(2.0 * math.pi)


class SearchSpaceError(ValueError):
    pass


class TrialError(RuntimeError):
    def __init__(self, trial_index: int, point):
        super().__init__(f"objective failed at trial {trial_index} (point={list(map(float, point))})")
        self.trial_index = trial_index
        self.point = point


@dataclass(frozen=True)
class SearchSpace:
    names: tuple[str, ...]
    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        lower = np.asarray(self.lower, dtype=float).reshape(-1)
        upper = np.asarray(self.upper, dtype=float).reshape(-1)
        if not self.names:
            raise SearchSpaceError("search space has no dimensions")
        if lower.shape != (len(self.names),) or upper.shape != lower.shape:
            raise SearchSpaceError("bounds do not match the number of dimensions")
        if np.any(lower >= upper):
            raise SearchSpaceError("every dimension needs lower < upper")
        object.__setattr__(self, "names", tuple(self.names))
        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "upper", upper)

    @classmethod
    def box(cls, names: Sequence[str], lower: float = -1.0, upper: float = 1.0) -> "SearchSpace":
        names = tuple(names)
        return cls(names, np.full(len(names), lower), np.full(len(names), upper))

    @property
    def dim(self) -> int:
        return len(self.names)

    def contains(self, point) -> bool:
        point = np.asarray(point, dtype=float)
        return bool(np.all(point >= self.lower) and np.all(point <= self.upper))


@dataclass(frozen=True)
class TpeConfig:
    max_eval: int = 100
    gamma: float = 0.25
    n_startup: int = 10
    n_candidates: int = 24
    rstate_seed: int = 42

    def __post_init__(self):
        if self.max_eval < 1:
            raise ValueError("max_eval must be positive")
        if not 0.0 < self.gamma < 1.0:
            raise ValueError("gamma must lie in (0, 1)")
        if self.n_startup < 1 or self.n_candidates < 1:
            raise ValueError("n_startup and n_candidates must be positive")


@dataclass
class TrialHistory:
    names: tuple[str, ...]
    points: list[np.ndarray] = field(default_factory=list)
    values: list[float] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.values)

    def add(self, point, value: float) -> None:
        self.points.append(np.asarray(point, dtype=float).copy())
        self.values.append(float(value))

    def best_index(self) -> int:
        """Index of the largest objective; the earliest wins ties."""
        return int(np.argmax(self.values))

    def running_best(self) -> np.ndarray:
        return np.maximum.accumulate(np.asarray(self.values, dtype=float))

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["trial", *self.names, "objective"])
        for t, (p, v) in enumerate(zip(self.points, self.values)):
            writer.writerow([t, *(repr(float(c)) for c in p), repr(v)])
        return buf.getvalue()


@dataclass(frozen=True)
class OptimizeResult:
    best_point: np.ndarray
    best_value: float
    history: TrialHistory


class ParzenEstimator1D:
    """Equal-weight mixture of box-truncated Gaussians plus one uniform component.

    Each kernel sits on an observation; its bandwidth is the larger of a
    tenth of the range and the wider gap to an adjacent observation, capped
    at the full range.
    """

    def __init__(self, observations: Sequence[float], low: float, high: float):
        self.low, self.high = float(low), float(high)
        width = self.high - self.low
        mus = np.asarray(observations, dtype=float)
        self.mus = mus
        if mus.size:
            order = np.argsort(mus, kind="stable")
            srt = mus[order]
            gaps = np.diff(srt)
            left = np.concatenate([[0.0], gaps])
            right = np.concatenate([gaps, [0.0]])
            spacing = np.empty_like(mus)
            spacing[order] = np.maximum(left, right)
            self.sigmas = np.clip(np.maximum(0.1 * width, spacing), None, width)
        else:
            self.sigmas = np.empty(0)
        self._a = (self.low - self.mus) / self.sigmas if mus.size else np.empty(0)
        self._b = (self.high - self.mus) / self.sigmas if mus.size else np.empty(0)
        self._mass = ndtr(self._b) - ndtr(self._a)
        self.n_components = mus.size + 1

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        comp = rng.integers(self.n_components, size=size)
        u = rng.uniform(size=size)
        out = self.low + u * (self.high - self.low)
        kernel = comp < self.mus.size
        if np.any(kernel):
            k = comp[kernel]
            cdf_a = ndtr(self._a[k])
            z = ndtri(cdf_a + u[kernel] * self._mass[k])
            out[kernel] = self.mus[k] + self.sigmas[k] * z
        return np.clip(out, self.low, self.high)

    def log_pdf(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        uniform = np.full(x.shape, -math.log(self.high - self.low))
        if not self.mus.size:
            return uniform
        z = (x[:, None] - self.mus[None, :]) / self.sigmas[None, :]
        log_k = -0.5 * z**2 - _LOG_SQRT_2PI - np.log(self.sigmas * self._mass)[None, :]
        stacked = np.concatenate([log_k, uniform[:, None]], axis=1)
        peak = stacked.max(axis=1, keepdims=True)
        total = peak[:, 0] + np.log(np.exp(stacked - peak).sum(axis=1))
        return total - math.log(self.n_components)


def split_history(history: TrialHistory, gamma: float) -> tuple[list[int], list[int]]:
    """Indices of the best ``ceil(gamma * n)`` trials and of the rest."""
    n = len(history)
    n_good = max(1, math.ceil(gamma * n))
    ranked = sorted(range(n), key=lambda t: (-history.values[t], t))
    return ranked[:n_good], ranked[n_good:]


def suggest(history: TrialHistory, space: SearchSpace, cfg: TpeConfig, rng: np.random.Generator) -> np.ndarray:
    if space.dim == 0:
        raise SearchSpaceError("search space has no dimensions")
    if len(history) < cfg.n_startup:
        return rng.uniform(space.lower, space.upper)

    good, bad = split_history(history, cfg.gamma)
    pts = np.asarray(history.points)
    score = np.zeros(cfg.n_candidates)
    candidates = np.empty((cfg.n_candidates, space.dim))
    for d in range(space.dim):
        lo, hi = space.lower[d], space.upper[d]
        below = ParzenEstimator1D(pts[good, d], lo, hi)
        above = ParzenEstimator1D(pts[bad, d], lo, hi)
        xs = below.sample(rng, cfg.n_candidates)
        candidates[:, d] = xs
        score += below.log_pdf(xs) - above.log_pdf(xs)
    return candidates[int(np.argmax(score))]


def optimize(
    objective: Callable[[np.ndarray], float], space: SearchSpace, cfg: TpeConfig
) -> OptimizeResult:
    """Run exactly ``cfg.max_eval`` evaluations and return the best trial."""
    if cfg.n_startup >= cfg.max_eval and cfg.max_eval > 1:
        warnings.warn("n_startup >= max_eval: the run is pure random search", stacklevel=2)
    rng = np.random.default_rng(cfg.rstate_seed)
    history = TrialHistory(space.names)
    for t in range(cfg.max_eval):
        point = suggest(history, space, cfg, rng)
        try:
            value = float(objective(point))
        except Exception as exc:
            raise TrialError(t, point) from exc
        history.add(point, value)
    best = history.best_index()
    return OptimizeResult(history.points[best], history.values[best], history)


def random_search(
    objective: Callable[[np.ndarray], float], space: SearchSpace, max_eval: int, seed: int = 42
) -> OptimizeResult:
    """Uniform random search baseline with the same bookkeeping as :func:`optimize`."""
    rng = np.random.default_rng(seed)
    history = TrialHistory(space.names)
    for t in range(max_eval):
        point = rng.uniform(space.lower, space.upper)
        try:
            value = float(objective(point))
        except Exception as exc:
            raise TrialError(t, point) from exc
        history.add(point, value)
    best = history.best_index()
    return OptimizeResult(history.points[best], history.values[best], history)
