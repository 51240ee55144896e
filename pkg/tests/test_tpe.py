import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import trapezoid

from fssns.tpe import (
    ParzenEstimator1D,
    SearchSpace,
    SearchSpaceError,
    TpeConfig,
    TrialError,
    TrialHistory,
    optimize,
    random_search,
    split_history,
    suggest,
)

LINE = SearchSpace.box(["x"])


def quadratic(p):
    return -(p[0] - 0.3) ** 2


def test_space_validation():
    with pytest.raises(SearchSpaceError):
        SearchSpace(("x",), np.array([1.0]), np.array([0.0]))
    assert LINE.contains([0.9])
    assert not LINE.contains([1.1])


def test_startup_is_uniform_in_box():
    space = SearchSpace(("a", "b"), np.array([0.0, -5.0]), np.array([1.0, -4.0]))
    pts = np.array([suggest(TrialHistory(space.names), space, TpeConfig(), np.random.default_rng(s)) for s in range(400)])
    assert np.all((pts >= space.lower) & (pts <= space.upper))
    # Crude uniformity check: each half of each box side holds a fair share.
    assert 0.4 < np.mean(pts[:, 0] < 0.5) < 0.6
    assert 0.4 < np.mean(pts[:, 1] < -4.5) < 0.6


def test_degenerate_split_still_suggests():
    h = TrialHistory(("x",))
    for x in np.linspace(-1, 1, 12):
        h.add([x], 0.7)
    good, bad = split_history(h, 0.25)
    assert len(good) == 3 and good == [0, 1, 2]
    p = suggest(h, LINE, TpeConfig(), np.random.default_rng(0))
    assert LINE.contains(p)


def test_suggestions_follow_good_cluster():
    h = TrialHistory(("x",))
    for x in np.linspace(-1, 1, 21):
        h.add([x], quadratic([x]))
    hits = sum(abs(suggest(h, LINE, TpeConfig(), np.random.default_rng(s))[0] - 0.3) <= 0.2 for s in range(100))
    assert hits >= 90


def test_parzen_density_normalized():
    est = ParzenEstimator1D([-0.9, 0.1, 0.15, 0.95], -1.0, 1.0)
    xs = np.linspace(-1, 1, 20001)
    area = trapezoid(np.exp(est.log_pdf(xs)), xs)
    assert area == pytest.approx(1.0, abs=1e-4)
    draws = est.sample(np.random.default_rng(0), 1000)
    assert np.all((draws >= -1) & (draws <= 1))


@given(st.integers(0, 2**16), st.integers(1, 3), st.integers(0, 30))
@settings(max_examples=50, deadline=None)
def test_suggestions_stay_in_box(seed, dim, n_hist):
    rng = np.random.default_rng(seed)
    lower = rng.uniform(-3, 0, dim)
    upper = lower + rng.uniform(0.01, 3, dim)
    space = SearchSpace(tuple(f"d{k}" for k in range(dim)), lower, upper)
    h = TrialHistory(space.names)
    for _ in range(n_hist):
        h.add(rng.uniform(lower, upper), rng.normal())
    cfg = TpeConfig(n_startup=1)
    for _ in range(5):
        assert space.contains(suggest(h, space, cfg, rng))


def test_quadratic_converges():
    res = optimize(quadratic, LINE, TpeConfig(max_eval=100, rstate_seed=42))
    assert abs(res.best_point[0] - 0.3) <= 0.05
    assert len(res.history) == 100


def test_reproducible_and_monotone():
    cfg = TpeConfig(max_eval=40, rstate_seed=7)
    a = optimize(quadratic, LINE, cfg)
    b = optimize(quadratic, LINE, cfg)
    assert a.history.values == b.history.values
    best = a.history.running_best()
    assert np.all(np.diff(best) >= 0)
    assert best[-1] == a.best_value


def test_single_evaluation():
    res = optimize(quadratic, LINE, TpeConfig(max_eval=1))
    assert len(res.history) == 1
    assert res.best_value == res.history.values[0]


def test_constant_objective():
    res = optimize(lambda p: 4.2, SearchSpace.box(["a", "b"]), TpeConfig(max_eval=25))
    assert res.best_value == 4.2
    assert res.history.best_index() == 0


def test_trial_error_context():
    def boom(p):
        raise ZeroDivisionError

    with pytest.raises(TrialError) as info:
        optimize(boom, LINE, TpeConfig(max_eval=3, n_startup=1))
    assert info.value.trial_index == 0
    assert isinstance(info.value.__cause__, ZeroDivisionError)


def test_history_csv():
    h = TrialHistory(("a", "b"))
    h.add([0.5, -0.25], 0.125)
    assert h.to_csv() == "trial,a,b,objective\n0,0.5,-0.25,0.125\n"


def test_random_search_shape():
    res = random_search(quadratic, LINE, 30, seed=1)
    assert len(res.history) == 30
    assert all(LINE.contains(p) for p in res.history.points)
