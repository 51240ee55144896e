import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from fssns.graph import BINARY, CATEGORICAL, NUMERIC, FeatureTable, Graph, connected_components, degree_sequence
from fssns.prep import (
    CleaningError,
    SamplerConfig,
    SamplerConfigError,
    drop_nulls,
    encode_categorical,
    normalize_crisp,
    prepare,
    remove_detached,
    sample_connected,
)
from fssns.synthetic import random_graph


def raw_table(rows, names, kinds=None):
    values = np.empty((len(rows), len(names)), dtype=object)
    for i, row in enumerate(rows):
        for k, v in enumerate(row):
            values[i, k] = v
    kinds = kinds or (NUMERIC,) * len(names)
    return FeatureTable(tuple(f"n{i}" for i in range(len(rows))), tuple(names), tuple(kinds), values)


class TestNormalize:
    def test_linear_scaling(self):
        ft = normalize_crisp(FeatureTable.from_array([[2.0], [4.0], [6.0]]))
        np.testing.assert_allclose(ft.values[:, 0], [0.0, 0.5, 1.0])

    def test_constant_maps_to_zero(self):
        ft = normalize_crisp(FeatureTable.from_array([[5.0], [5.0], [5.0]]))
        assert ft.values[:, 0].tolist() == [0.0, 0.0, 0.0]

    def test_unit_range_unchanged(self):
        ft = normalize_crisp(FeatureTable.from_array([[0.0], [1.0]]))
        assert ft.values[:, 0].tolist() == [0.0, 1.0]

    def test_object_table_with_numbers(self):
        ft = normalize_crisp(raw_table([[1.0], [3.0]], ["a"]))
        assert ft.values.dtype == float
        assert ft.values[:, 0].tolist() == [0.0, 1.0]

    @given(arrays(np.float64, st.tuples(st.integers(1, 8), st.integers(1, 4)),
                  elements=st.floats(-1e6, 1e6, allow_nan=False)))
    @settings(max_examples=200, deadline=None)
    def test_range_and_idempotence(self, x):
        once = normalize_crisp(FeatureTable.from_array(x))
        twice = normalize_crisp(once)
        assert np.all((once.values >= 0) & (once.values <= 1))
        np.testing.assert_allclose(twice.values, once.values, atol=1e-12)


class TestEncode:
    def test_binary_category(self):
        ft = raw_table([["M"], ["F"], ["M"]], ["sex"], (CATEGORICAL,))
        out = encode_categorical(ft, "sex")
        assert out.feature_names == ("sex M", "sex F")
        assert out.kinds == (BINARY, BINARY)
        assert out.values.tolist() == [[1.0, 0.0], [0.0, 1.0], [1.0, 0.0]]

    def test_single_valued(self):
        out = encode_categorical(raw_table([["x"], ["x"]], ["c"], (CATEGORICAL,)), "c")
        assert out.feature_names == ("c x",)
        assert out.values[:, 0].tolist() == [1.0, 1.0]

    def test_three_labels_row_sums(self):
        ft = raw_table([[0.5, "a"], [0.1, "b"], [0.2, "c"], [0.9, "a"]], ["num", "grp"], (NUMERIC, CATEGORICAL))
        out = encode_categorical(ft, "grp")
        assert out.feature_names == ("num", "grp a", "grp b", "grp c")
        block = np.asarray(out.values[:, 1:], dtype=float)
        assert block.sum(axis=1).tolist() == [1.0] * 4
        assert block.tolist() == [[1, 0, 0], [0, 1, 0], [0, 0, 1], [1, 0, 0]]

    def test_unknown_feature(self):
        with pytest.raises(KeyError):
            encode_categorical(FeatureTable.from_array([[1.0]]), "nope")


class TestDropNulls:
    def test_all_null_feature_dropped(self):
        ft = raw_table([[1.0, None], [2.0, None], [3.0, None]], ["keep", "gone"])
        out, report = drop_nulls(ft, 0.5, 0.5)
        assert out.feature_names == ("keep",)
        assert report.features_removed == ["gone"]
        assert report.null_cells_before == 3
        assert not out.null_mask().any()

    def test_null_free_unchanged(self):
        ft = raw_table([[1.0], [2.0]], ["a"])
        out, report = drop_nulls(ft, 0.05, 0.05)
        assert out.values.tolist() == ft.values.tolist()
        assert (report.nodes_removed, report.features_removed, report.null_cells_before) == (0, [], 0)

    def test_single_null_drops_node(self):
        # A feature tolerance of 0.1 keeps the 10%-null column, so the node goes instead.
        rows = [[float(i)] for i in range(10)]
        rows[3] = [None]
        out, report = drop_nulls(raw_table(rows, ["a"]), 0.1, 0.05)
        assert out.n_nodes == 9
        assert report.removed_node_ids == ["n3"]

    def test_strict_feature_threshold_drops_feature_first(self):
        rows = [[float(i)] for i in range(10)]
        rows[3] = [None]
        out, report = drop_nulls(raw_table(rows, ["a"]), 0.05, 0.05)
        assert out.n_features == 0
        assert report.features_removed == ["a"]
        assert out.n_nodes == 10

    def test_residual_nulls_raise(self):
        ft = raw_table([[None, 1.0], [1.0, 1.0], [1.0, None], [1.0, 1.0]], ["a", "b"])
        with pytest.raises(CleaningError, match="'n0'"):
            drop_nulls(ft, 0.5, 0.5)


class TestRemoveDetached:
    def test_isolated_node(self):
        g = Graph.from_edges("abcd", [("a", "b"), ("b", "c"), ("a", "c")])
        ft = FeatureTable.from_array([[0.0], [1.0], [2.0], [3.0]], node_ids="abcd")
        g2, ft2, report = remove_detached(g, ft)
        assert g2.node_ids == ("a", "b", "c")
        assert ft2.node_ids == ("a", "b", "c")
        assert ft2.values[:, 0].tolist() == [0.0, 1.0, 2.0]
        assert report.nodes_removed == 1

    def test_connected_unchanged(self):
        g = Graph.from_edges("abc", [("a", "b"), ("b", "c")])
        g2, _, report = remove_detached(g)
        assert g2 is g
        assert report.nodes_removed == 0

    def test_keeps_larger_component(self):
        five = [(f"a{i}", f"a{i + 1}") for i in range(4)]
        three = [("b0", "b1"), ("b1", "b2")]
        ids = [f"b{i}" for i in range(3)] + [f"a{i}" for i in range(5)]
        g2, _, report = remove_detached(Graph.from_edges(ids, three + five))
        assert g2.n_nodes == 5
        assert set(g2.node_ids) == {f"a{i}" for i in range(5)}
        assert report.nodes_removed == 3

    def test_empty_graph(self):
        with pytest.raises(CleaningError):
            remove_detached(Graph.from_edges([], []))


def test_prepare_pipeline():
    g = Graph.from_edges("abcde", [("a", "b"), ("b", "c"), ("c", "a"), ("a", "d")])
    ft = raw_table(
        [[10.0, "M", None], [20.0, "F", None], [30.0, "M", 1.0], [None, "F", None], [40.0, "F", 2.0]],
        ["age", "sex", "sparse"],
        (NUMERIC, CATEGORICAL, NUMERIC),
    )
    ft = FeatureTable(tuple("abcde"), ft.feature_names, ft.kinds, ft.values)
    g2, ft2, report = prepare(g, ft)
    # "sparse" is 60% null; node d has a null age; e is isolated.
    assert report.features_removed == ["sparse"]
    assert set(report.removed_node_ids) == {"d", "e"}
    assert g2.node_ids == ("a", "b", "c")
    assert ft2.feature_names == ("age", "sex M", "sex F")
    assert report.features_encoded == {"sex": ["sex M", "sex F"]}
    np.testing.assert_allclose(ft2.values, [[0, 1, 0], [0.5, 0, 1], [1, 1, 0]])
    assert report.bipartite is False


def test_prepare_keep_first_k():
    g = Graph.from_edges("ab", [("a", "b")])
    ft = FeatureTable.from_array([[1, 2, 3], [4, 5, 6]], feature_names=["x", "y", "z"], node_ids="ab")
    _, ft2, report = prepare(g, ft, keep_first_k_features=2)
    assert ft2.feature_names == ("x", "y")
    assert report.features_removed == ["z"]


class TestSampler:
    def test_config_validation(self):
        with pytest.raises(SamplerConfigError):
            SamplerConfig(edge_limit=0)
        with pytest.raises(SamplerConfigError):
            SamplerConfig(edge_limit=5, growth_min=4, growth_max=3)

    def test_non_binding_limit_returns_component(self):
        g = random_graph(40, 120, seed=3)
        block = max(connected_components(g), key=len)
        sub = sample_connected(g, SamplerConfig(edge_limit=10_000, seed=1))
        assert set(sub.node_ids) == {g.node_ids[i] for i in block}
        assert sub.n_edges == g.subgraph(block).n_edges

    def test_deterministic(self):
        g = random_graph(60, 200, seed=0)
        cfg = SamplerConfig(edge_limit=50, seed=7)
        assert sample_connected(g, cfg) == sample_connected(g, cfg)

    @pytest.mark.parametrize("seed", range(20))
    def test_small_budget_properties(self, seed):
        g = random_graph(40, 100, seed=11)
        sub = sample_connected(g, SamplerConfig(edge_limit=10, seed=seed))
        assert sub.n_edges <= 10
        assert len(connected_components(sub)) == 1
        assert min(degree_sequence(sub)) >= 1
