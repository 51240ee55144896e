"""Synthetic attributed networks with known structure, for benchmarks and tests."""

from __future__ import annotations

import numpy as np

from .graph import BINARY, NUMERIC, FeatureTable, Graph


def planted_homophily(
    n_nodes: int = 30,
    n_noise: int = 4,
    p_in: float = 1.0,
    p_out: float = 0.01,
    group_fraction: float = 0.6,
    seed: int = 0,
) -> tuple[Graph, FeatureTable]:
    """Two-group network whose links depend only on one binary feature.

    Column ``informative`` holds the group label (a ``group_fraction`` share
    of nodes carry label 1, positions shuffled);
    pairs inside a group link with probability ``p_in``, across groups with
    ``p_out``. ``noise0`` .. ``noise{k}`` are uniform on [0, 1] and
    independent of the edges.
    """
    rng = np.random.default_rng(seed)
    labels = np.zeros(n_nodes)
    labels[: int(round(group_fraction * n_nodes))] = 1.0
    rng.shuffle(labels)
    noise = rng.uniform(size=(n_nodes, n_noise))

    iu, ju = np.triu_indices(n_nodes, k=1)
    prob = np.where(labels[iu] == labels[ju], p_in, p_out)
    keep = rng.uniform(size=iu.size) < prob
    ids = tuple(f"n{i}" for i in range(n_nodes))
    graph = Graph(ids, frozenset(zip(iu[keep].tolist(), ju[keep].tolist())))

    values = np.column_stack([labels, noise])
    names = ("informative",) + tuple(f"noise{k}" for k in range(n_noise))
    kinds = (BINARY,) + (NUMERIC,) * n_noise
    return graph, FeatureTable(ids, names, kinds, values)


def random_graph(n_nodes: int, n_edges: int, seed: int = 0) -> Graph:
    """Uniform random simple graph with exactly ``n_edges`` edges."""
    rng = np.random.default_rng(seed)
    iu, ju = np.triu_indices(n_nodes, k=1)
    if n_edges > iu.size:
        raise ValueError("too many edges requested")
    pick = rng.choice(iu.size, size=n_edges, replace=False)
    return Graph(tuple(f"n{i}" for i in range(n_nodes)), frozenset(zip(iu[pick].tolist(), ju[pick].tolist())))
