"""Dataset cleaning and connected edge-limited sampling of large graphs."""

from __future__ import annotations

import logging
from collections import deque
from dataclasses import asdict, dataclass, field

import numpy as np

from .graph import (
    BINARY,
    CATEGORICAL,
    FeatureTable,
    Graph,
    connected_components,
    is_bipartite,
)

logger = logging.getLogger(__name__)

DEFAULT_FEATURE_NULL_FRACTION = 0.3
DEFAULT_NODE_NULL_FRACTION = 0.0


class CleaningError(ValueError):
    pass


class SamplerConfigError(ValueError):
    pass


@dataclass
class CleaningReport:
    nodes_removed: int = 0
    removed_node_ids: list[str] = field(default_factory=list)
    features_removed: list[str] = field(default_factory=list)
    features_encoded: dict[str, list[str]] = field(default_factory=dict)
    null_cells_before: int = 0
    bipartite: bool | None = None

    def merge(self, other: "CleaningReport") -> "CleaningReport":
        return CleaningReport(
            nodes_removed=self.nodes_removed + other.nodes_removed,
            removed_node_ids=self.removed_node_ids + other.removed_node_ids,
            features_removed=self.features_removed + other.features_removed,
            features_encoded={**self.features_encoded, **other.features_encoded},
            null_cells_before=self.null_cells_before + other.null_cells_before,
            bipartite=other.bipartite if other.bipartite is not None else self.bipartite,
        )

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class SamplerConfig:
    edge_limit: int
    growth_min: int = 2
    growth_max: int = 5
    seed: int = 0

    def __post_init__(self):
        if self.edge_limit < 1:
            raise SamplerConfigError(f"edge_limit must be >= 1, got {self.edge_limit}")
        if not 1 <= self.growth_min <= self.growth_max:
            raise SamplerConfigError(
                f"need 1 <= growth_min <= growth_max, got {self.growth_min}, {self.growth_max}"
            )


def normalize_crisp(ft: FeatureTable) -> FeatureTable:
    """Min-max scale every column into [0, 1]; constant columns become 0."""
    x = ft.to_float().values
    lo = x.min(axis=0) if x.size else np.zeros(ft.n_features)
    span = (x.max(axis=0) - lo) if x.size else np.zeros(ft.n_features)
    scaled = np.zeros_like(x)
    varying = span > 0
    scaled[:, varying] = (x[:, varying] - lo[varying]) / span[varying]
    return FeatureTable(ft.node_ids, ft.feature_names, ft.kinds, scaled)


def encode_categorical(ft: FeatureTable, feature: str) -> FeatureTable:
    """Replace ``feature`` by one 0/1 indicator column per distinct label.

    Indicator columns are named ``"<feature> <label>"`` and inserted where the
    original column was, labels in order of first appearance.
    """
    k = ft.feature_index(feature)
    col = ft.values[:, k]
    if any(v is None for v in col) or (col.dtype != object and np.isnan(col.astype(float)).any()):
        raise CleaningError(f"feature {feature!r} has absent values; drop nulls before encoding")
    labels: list = []
    for v in col:
        if v not in labels:
            labels.append(v)
    names = [f"{feature} {_label_text(v)}" for v in labels]
    indicators = np.array([[1.0 if v == lab else 0.0 for lab in labels] for v in col], dtype=float)
    indicators = indicators.reshape(ft.n_nodes, len(labels))

    dtype = object if ft.values.dtype == object else float
    values = np.concatenate(
        [ft.values[:, :k], indicators.astype(dtype), ft.values[:, k + 1 :]], axis=1
    )
    feature_names = ft.feature_names[:k] + tuple(names) + ft.feature_names[k + 1 :]
    kinds = ft.kinds[:k] + (BINARY,) * len(names) + ft.kinds[k + 1 :]
    return FeatureTable(ft.node_ids, feature_names, kinds, values)


def _label_text(v) -> str:
    if isinstance(v, float) and v.is_integer():
        return str(int(v))
    return str(v)


def drop_nulls(
    ft: FeatureTable,
    feature_null_fraction: float = DEFAULT_FEATURE_NULL_FRACTION,
    node_null_fraction: float = DEFAULT_NODE_NULL_FRACTION,
) -> tuple[FeatureTable, CleaningReport]:
    """Drop sparse features, then sparse nodes.

    A feature goes if its fraction of absent cells exceeds
    ``feature_null_fraction``; afterwards a node goes if its fraction of absent
    cells (over the surviving features) exceeds ``node_null_fraction``.
    """
    for name, frac in (("feature_null_fraction", feature_null_fraction), ("node_null_fraction", node_null_fraction)):
        if not 0.0 <= frac <= 1.0:
            raise ValueError(f"{name} must lie in [0, 1], got {frac}")
    mask = ft.null_mask()
    report = CleaningReport(null_cells_before=int(mask.sum()))
    if ft.n_nodes == 0:
        return ft, report

    feature_frac = mask.mean(axis=0)
    keep_features = [ft.feature_names[k] for k in range(ft.n_features) if feature_frac[k] <= feature_null_fraction]
    report.features_removed = [n for n in ft.feature_names if n not in keep_features]
    ft = ft.select_features(keep_features)

    mask = ft.null_mask()
    if ft.n_features:
        node_frac = mask.mean(axis=1)
        keep_rows = [i for i in range(ft.n_nodes) if node_frac[i] <= node_null_fraction]
        report.removed_node_ids = [ft.node_ids[i] for i in range(ft.n_nodes) if node_frac[i] > node_null_fraction]
        report.nodes_removed = len(report.removed_node_ids)
        ft = ft.select_rows(keep_rows)

    residual = np.argwhere(ft.null_mask())
    if len(residual):
        cells = ", ".join(f"({ft.node_ids[i]!r}, {ft.feature_names[k]!r})" for i, k in residual[:20])
        more = "" if len(residual) <= 20 else f" and {len(residual) - 20} more"
        raise CleaningError(f"absent values remain after cleaning: {cells}{more}")
    return ft, report


def remove_detached(g: Graph, ft: FeatureTable | None = None) -> tuple[Graph, FeatureTable | None, CleaningReport]:
    """Keep only the largest connected component (ties: the earliest one)."""
    if g.n_nodes == 0:
        raise CleaningError("graph has no nodes")
    blocks = connected_components(g)
    largest = max(blocks, key=len)
    keep = set(largest)
    removed = [g.node_ids[i] for i in range(g.n_nodes) if i not in keep]
    report = CleaningReport(nodes_removed=len(removed), removed_node_ids=removed)
    if not removed:
        return g, ft, report
    return g.subgraph(largest), _align(ft, g.subgraph(largest)), report


def _align(ft: FeatureTable | None, g: Graph) -> FeatureTable | None:
    if ft is None:
        return None
    index = {nid: i for i, nid in enumerate(ft.node_ids)}
    missing = [nid for nid in g.node_ids if nid not in index]
    if missing:
        raise CleaningError(f"feature table lacks rows for nodes {missing[:10]}")
    return ft.select_rows([index[nid] for nid in g.node_ids])


def prepare(
    g: Graph,
    ft: FeatureTable,
    feature_null_fraction: float = DEFAULT_FEATURE_NULL_FRACTION,
    node_null_fraction: float = DEFAULT_NODE_NULL_FRACTION,
    keep_first_k_features: int | None = None,
    drop_features: tuple[str, ...] = (),
) -> tuple[Graph, FeatureTable, CleaningReport]:
    """Full cleaning pipeline.

    Order: optional column truncation, null handling (nodes dropped from the
    graph in lockstep), one-hot encoding of categorical columns, crisp
    normalization, and reduction to the largest connected component.
    Bipartiteness is checked and reported, not enforced.
    """
    ft = _align(ft, g)
    report = CleaningReport()
    dropped = list(drop_features)
    if keep_first_k_features is not None:
        dropped += list(ft.feature_names[keep_first_k_features:])
    if dropped:
        ft = ft.select_features([n for n in ft.feature_names if n not in dropped])
        report.features_removed += [n for n in dropped]

    ft, null_report = drop_nulls(ft, feature_null_fraction, node_null_fraction)
    report = report.merge(null_report)
    if null_report.removed_node_ids:
        gone = set(null_report.removed_node_ids)
        g = g.subgraph(i for i, nid in enumerate(g.node_ids) if nid not in gone)

    for name, kind in list(zip(ft.feature_names, ft.kinds)):
        if kind == CATEGORICAL:
            before = set(ft.feature_names)
            ft = encode_categorical(ft, name)
            report.features_encoded[name] = [n for n in ft.feature_names if n not in before]

    g, ft, detached = remove_detached(g, ft)
    report = report.merge(detached)
    ft = normalize_crisp(ft)
    report.bipartite = is_bipartite(g)
    if report.bipartite:
        logger.warning("prepared network is bipartite")
    return g, ft, report


def sample_connected(g: Graph, cfg: SamplerConfig) -> Graph:
    """Grow a connected sample with at most ``cfg.edge_limit`` induced edges.

    A random non-isolated seed node starts a queue. Each dequeued node pulls in
    between ``growth_min`` and ``growth_max`` of its not-yet-sampled neighbours,
    chosen uniformly; added nodes join the queue. Adding a node brings along
    all its edges to already-sampled nodes. Growth stops at the first node
    whose addition would exceed the edge limit. If the queue runs dry first,
    a random sampled node with unsampled neighbours restarts it, so a
    non-binding limit yields the whole component.
    """
    rng = np.random.default_rng(cfg.seed)
    candidates = [i for i in range(g.n_nodes) if g.neighbors(i)]
    if not candidates:
        raise CleaningError("graph has no edges to sample")
    seed = int(candidates[rng.integers(len(candidates))])

    sampled = {seed}
    order = [seed]
    n_edges = 0
    queue = deque([seed])
    while True:
        if not queue:
            open_nodes = [u for u in order if any(v not in sampled for v in g.neighbors(u))]
            if not open_nodes:
                break
            queue.append(open_nodes[rng.integers(len(open_nodes))])
        u = queue.popleft()
        fresh = sorted(v for v in g.neighbors(u) if v not in sampled)
        if not fresh:
            continue
        count = int(rng.integers(cfg.growth_min, cfg.growth_max + 1))
        picks = rng.choice(len(fresh), size=min(count, len(fresh)), replace=False)
        for p in picks:
            v = fresh[int(p)]
            added = sum(1 for w in g.neighbors(v) if w in sampled)
            if n_edges + added > cfg.edge_limit:
                return g.subgraph(order)
            sampled.add(v)
            order.append(v)
            n_edges += added
            queue.append(v)
    return g.subgraph(order)
