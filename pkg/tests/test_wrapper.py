import itertools

import numpy as np
import pytest

from fssns.evaluation import EvalConfig
from fssns.filters import rank_features
from fssns.sns import SimulationParams
from fssns.synthetic import planted_homophily
from fssns.tpe import TpeConfig
from fssns.wrapper import CombinationResult, WrapperContractError, forward_select, run_wrapper


def mocked(similarities):
    calls = []

    def evaluate(combination):
        calls.append(combination)
        return CombinationResult(similarities[len(calls) - 1])

    return evaluate, calls


def ticking():
    counter = itertools.count()
    return lambda: float(next(counter))


def test_stops_after_drop():
    evaluate, calls = mocked([0.5, 0.6, 0.55])
    res = forward_select(["a", "b", "c"], evaluate, ticking())
    assert res.selected_features == ("a", "b")
    assert res.best_similarity == 0.6
    assert res.stopped_early
    assert len(res.steps) == 3
    assert calls == [("a",), ("a", "b"), ("a", "b", "c")]
    assert [s.improved for s in res.steps] == [True, True, False]


def test_second_step_worse():
    evaluate, _ = mocked([0.5, 0.4])
    res = forward_select(["a", "b", "c"], evaluate, ticking())
    assert res.selected_features == ("a",)
    assert res.best_similarity == 0.5
    assert len(res.steps) == 2
    assert res.stopped_early


def test_single_feature():
    evaluate, _ = mocked([0.3])
    res = forward_select(["only"], evaluate)
    assert res.selected_features == ("only",)
    assert not res.stopped_early
    assert len(res.steps) == 1


def test_tie_stops():
    evaluate, _ = mocked([0.5, 0.5, 0.9])
    res = forward_select(["a", "b", "c"], evaluate)
    assert res.selected_features == ("a",)
    assert len(res.steps) == 2


def test_runs_to_end_when_improving():
    evaluate, _ = mocked([0.1, 0.2, 0.3])
    res = forward_select(["a", "b", "c"], evaluate)
    assert res.selected_features == ("a", "b", "c")
    assert not res.stopped_early
    assert res.best_error == pytest.approx(0.7)


def test_empty_ranking():
    with pytest.raises(WrapperContractError):
        forward_select([], mocked([])[0])


def test_step_timing_uses_clock():
    evaluate, _ = mocked([0.5, 0.4])
    res = forward_select(["a", "b"], evaluate, ticking())
    assert [s.seconds for s in res.steps] == [1.0, 1.0]


@pytest.fixture(scope="module")
def small_run():
    g, ft = planted_homophily(n_nodes=14, n_noise=2, seed=1)
    params = SimulationParams(edge_budget=g.n_edges)
    ranking = rank_features(ft, "FR-Var")
    args = (ft, g, ranking, params, TpeConfig(max_eval=12, n_startup=5), EvalConfig(100))
    return args, run_wrapper(*args)


def test_run_wrapper_invariants(small_run):
    args, res = small_run
    ranking = args[2]
    k = len(res.selected_features)
    assert res.selected_features == ranking.features[:k]
    assert res.best_similarity == max(s.best_similarity for s in res.steps)
    assert len(res.steps) == min(k + 1, len(ranking.features))
    assert all(s.n_trials == 12 for s in res.steps)
    assert 0.0 <= res.best_error <= 1.0


def test_run_wrapper_deterministic(small_run):
    args, res = small_run
    again = run_wrapper(*args)
    assert again.selected_features == res.selected_features
    assert [s.best_similarity for s in again.steps] == [s.best_similarity for s in res.steps]
    np.testing.assert_array_equal(again.best_step.best_dna.to_point(), res.best_step.best_dna.to_point())


def test_unknown_ranked_feature(small_run):
    args, _ = small_run
    with pytest.raises(WrapperContractError):
        run_wrapper(args[0], args[1], ["nope"], *args[3:])
