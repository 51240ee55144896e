"""Attributed undirected graphs, GraphML/CSV ingestion and structural queries."""

from __future__ import annotations

import csv
import io
import logging
import xml.etree.ElementTree as ET
from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

logger = logging.getLogger(__name__)

NUMERIC = "numeric"
BINARY = "binary"
CATEGORICAL = "categorical"

_GRAPHML_NS = "http://graphml.graphdrawing.org/xmlns"
_NUMERIC_TYPES = {"int", "long", "float", "double"}


class GraphParseError(ValueError):
    """Malformed input document."""


class GraphStructureError(ValueError):
    """Well-formed input describing an invalid graph (duplicate or dangling ids)."""


@dataclass(frozen=True)
class Graph:
    """Undirected simple graph over opaque string node ids.

    Node order is significant: it fixes the integer index used to align rows
    of a :class:`FeatureTable`. Edges are stored as index pairs ``(i, j)``
    with ``i < j``.
    """

    node_ids: tuple[str, ...]
    edges: frozenset[tuple[int, int]]
    _adj: tuple[frozenset[int], ...] = field(init=False, repr=False, compare=False)
    _index: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        n = len(self.node_ids)
        index = {nid: i for i, nid in enumerate(self.node_ids)}
        if len(index) != n:
            raise GraphStructureError("duplicate node id")
        adj: list[set[int]] = [set() for _ in range(n)]
        for i, j in self.edges:
            if not (0 <= i < j < n):
                raise GraphStructureError(f"invalid edge ({i}, {j}) for {n} nodes")
            adj[i].add(j)
            adj[j].add(i)
        object.__setattr__(self, "_adj", tuple(frozenset(a) for a in adj))
        object.__setattr__(self, "_index", index)

    @classmethod
    def from_edges(cls, node_ids: Iterable, edges: Iterable[tuple]) -> "Graph":
        """Build from ids and id-pairs. Self-loops are dropped, duplicates collapse."""
        node_ids = tuple(str(v) for v in node_ids)
        index = {nid: i for i, nid in enumerate(node_ids)}
        if len(index) != len(node_ids):
            raise GraphStructureError("duplicate node id")
        pairs = set()
        for u, v in edges:
            try:
                i, j = index[str(u)], index[str(v)]
            except KeyError as exc:
                raise GraphStructureError(f"edge references undeclared node {exc.args[0]!r}") from None
            if i != j:
                pairs.add((min(i, j), max(i, j)))
        return cls(node_ids, frozenset(pairs))

    @property
    def n_nodes(self) -> int:
        return len(self.node_ids)

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    def index_of(self, node_id: str) -> int:
        return self._index[node_id]

    def neighbors(self, i: int) -> frozenset[int]:
        return self._adj[i]

    def edge_ids(self) -> list[tuple[str, str]]:
        return [(self.node_ids[i], self.node_ids[j]) for i, j in sorted(self.edges)]

    def subgraph(self, keep: Iterable[int]) -> "Graph":
        """Induced subgraph on node indices ``keep``; original order is preserved."""
        keep = sorted(set(keep))
        remap = {old: new for new, old in enumerate(keep)}
        edges = frozenset(
            (remap[i], remap[j]) for i, j in self.edges if i in remap and j in remap
        )
        return Graph(tuple(self.node_ids[i] for i in keep), edges)


def degree_sequence(g: Graph) -> list[int]:
    return [len(g.neighbors(i)) for i in range(g.n_nodes)]


def connected_components(g: Graph) -> list[list[int]]:
    """Components as sorted index lists, ordered by their smallest member."""
    seen = np.zeros(g.n_nodes, dtype=bool)
    blocks = []
    for start in range(g.n_nodes):
        if seen[start]:
            continue
        seen[start] = True
        block = [start]
        queue = deque([start])
        while queue:
            u = queue.popleft()
            for v in g.neighbors(u):
                if not seen[v]:
                    seen[v] = True
                    block.append(v)
                    queue.append(v)
        blocks.append(sorted(block))
    return blocks


def is_bipartite(g: Graph) -> bool:
    color = [-1] * g.n_nodes
    for start in range(g.n_nodes):
        if color[start] != -1:
            continue
        color[start] = 0
        queue = deque([start])
        while queue:
            u = queue.popleft()
            for v in g.neighbors(u):
                if color[v] == -1:
                    color[v] = 1 - color[u]
                    queue.append(v)
                elif color[v] == color[u]:
                    return False
    return True


@dataclass(frozen=True)
class FeatureTable:
    """Node x feature matrix aligned with a graph's node order.

    ``values`` is an object array while the table is raw (strings, numbers
    and ``None`` for absent cells) and a float array once cleaned.
    """

    node_ids: tuple[str, ...]
    feature_names: tuple[str, ...]
    kinds: tuple[str, ...]
    values: np.ndarray

    def __post_init__(self):
        values = self.values
        if values.ndim != 2:
            values = np.asarray(values).reshape(len(self.node_ids), len(self.feature_names))
            object.__setattr__(self, "values", values)
        if values.shape != (len(self.node_ids), len(self.feature_names)):
            raise ValueError(
                f"values shape {values.shape} does not match "
                f"{len(self.node_ids)} nodes x {len(self.feature_names)} features"
            )
        if len(self.kinds) != len(self.feature_names):
            raise ValueError("kinds and feature_names differ in length")
        if len(set(self.feature_names)) != len(self.feature_names):
            raise ValueError("duplicate feature name")
        values.flags.writeable = False

    @classmethod
    def from_array(cls, values, feature_names=None, node_ids=None, kinds=None) -> "FeatureTable":
        """Numeric table from a 2-D array; kinds are inferred (0/1 columns are binary)."""
        x = np.asarray(values, dtype=float)
        if x.ndim == 1:
            x = x[:, None]
        n, m = x.shape
        names = tuple(feature_names) if feature_names is not None else tuple(f"f{k}" for k in range(m))
        ids = tuple(str(v) for v in node_ids) if node_ids is not None else tuple(str(i) for i in range(n))
        if kinds is None:
            kinds = tuple(BINARY if np.isin(x[:, k], (0.0, 1.0)).all() else NUMERIC for k in range(m))
        return cls(ids, names, tuple(kinds), x.copy())

    @property
    def n_nodes(self) -> int:
        return len(self.node_ids)

    @property
    def n_features(self) -> int:
        return len(self.feature_names)

    def null_mask(self) -> np.ndarray:
        if self.values.dtype == object:
            return np.vectorize(lambda v: v is None, otypes=[bool])(self.values).reshape(self.values.shape)
        return np.isnan(self.values)

    @property
    def is_numeric(self) -> bool:
        return self.values.dtype != object

    def column(self, name: str) -> np.ndarray:
        return self.values[:, self.feature_index(name)]

    def feature_index(self, name: str) -> int:
        try:
            return self.feature_names.index(name)
        except ValueError:
            raise KeyError(f"no feature named {name!r}") from None

    def select_features(self, names: Sequence[str]) -> "FeatureTable":
        idx = [self.feature_index(n) for n in names]
        return FeatureTable(
            self.node_ids,
            tuple(self.feature_names[k] for k in idx),
            tuple(self.kinds[k] for k in idx),
            self.values[:, idx].copy(),
        )

    def select_rows(self, rows: Sequence[int]) -> "FeatureTable":
        rows = list(rows)
        return FeatureTable(
            tuple(self.node_ids[r] for r in rows),
            self.feature_names,
            self.kinds,
            self.values[rows, :].copy(),
        )

    def to_float(self) -> "FeatureTable":
        """Coerce a null-free numeric table to a float matrix."""
        if self.is_numeric:
            return self
        bad = [n for n, k in zip(self.feature_names, self.kinds) if k == CATEGORICAL]
        if bad:
            raise TypeError(f"categorical features must be encoded first: {bad}")
        if self.null_mask().any():
            raise ValueError("table still contains absent values")
        return FeatureTable(self.node_ids, self.feature_names, self.kinds, self.values.astype(float))


def _local(tag: str) -> str:
    return tag.rsplit("}", 1)[-1]


def _coerce(text: str | None, attr_type: str):
    if text is None:
        return None
    text = text.strip()
    if text == "" or text.lower() in {"nan", "null", "none", "na"}:
        return None
    if attr_type == "boolean":
        low = text.lower()
        if low in {"true", "1"}:
            return 1.0
        if low in {"false", "0"}:
            return 0.0
        raise GraphParseError(f"invalid boolean value {text!r}")
    if attr_type in _NUMERIC_TYPES:
        try:
            return float(text)
        except ValueError:
            raise GraphParseError(f"invalid {attr_type} value {text!r}") from None
    return text


def _kind(attr_type: str, column: list) -> str:
    if attr_type == "string":
        return CATEGORICAL
    present = [v for v in column if v is not None]
    if attr_type == "boolean" or (present and all(v in (0.0, 1.0) for v in present)):
        return BINARY
    return NUMERIC


def parse_graphml(document: str) -> tuple[Graph, FeatureTable]:
    """Parse a GraphML document into a graph and a raw (uncleaned) feature table.

    Directed edges are flattened; self-loops and repeated pairs collapse.
    Node-level ``<key>`` declarations become feature columns in declaration
    order. Missing ``<data>`` entries are kept as ``None``. Edge weights are
    ignored with a warning.
    """
    try:
        root = ET.fromstring(document)
    except ET.ParseError as exc:
        line, col = exc.position
        context = document.splitlines()[line - 1] if 0 < line <= len(document.splitlines()) else ""
        raise GraphParseError(f"malformed GraphML at line {line}, column {col}: {context.strip()!r}") from exc

    if _local(root.tag) != "graphml":
        raise GraphParseError(f"root element is <{_local(root.tag)}>, expected <graphml>")

    node_keys: dict[str, tuple[str, str]] = {}
    edge_keys: dict[str, str] = {}
    for key in root:
        if _local(key.tag) != "key":
            continue
        kid = key.get("id")
        name = key.get("attr.name", kid)
        attr_type = key.get("attr.type", "string")
        domain = key.get("for", "node")
        if domain in ("node", "all"):
            node_keys[kid] = (name, attr_type)
        if domain in ("edge", "all"):
            edge_keys[kid] = name

    graphs = [el for el in root if _local(el.tag) == "graph"]
    if len(graphs) != 1:
        raise GraphParseError(f"expected exactly one <graph>, found {len(graphs)}")
    graph_el = graphs[0]

    node_ids: list[str] = []
    rows: list[dict] = []
    seen: set[str] = set()
    edges: list[tuple[str, str]] = []
    weighted = False
    for el in graph_el:
        tag = _local(el.tag)
        if tag == "node":
            nid = el.get("id")
            if nid is None:
                raise GraphParseError("<node> without id")
            if nid in seen:
                raise GraphStructureError(f"duplicate node id {nid!r}")
            seen.add(nid)
            node_ids.append(nid)
            row = {}
            for data in el:
                if _local(data.tag) == "data" and data.get("key") in node_keys:
                    name, attr_type = node_keys[data.get("key")]
                    row[data.get("key")] = _coerce(data.text, attr_type)
            rows.append(row)
        elif tag == "edge":
            src, dst = el.get("source"), el.get("target")
            if src is None or dst is None:
                raise GraphParseError("<edge> without source/target")
            edges.append((src, dst))
            weighted |= any(_local(d.tag) == "data" and d.get("key") in edge_keys for d in el)
        elif tag in ("hyperedge", "graph"):
            raise GraphParseError(f"unsupported GraphML element <{tag}>")

    if weighted:
        logger.warning("edge attributes present in GraphML; they are ignored")

    for src, dst in edges:
        for end in (src, dst):
            if end not in seen:
                raise GraphStructureError(f"edge references undeclared node {end!r}")

    graph = Graph.from_edges(node_ids, edges)
    key_ids = list(node_keys)
    names = [node_keys[k][0] for k in key_ids]
    values = np.empty((len(node_ids), len(key_ids)), dtype=object)
    for r, row in enumerate(rows):
        for c, k in enumerate(key_ids):
            values[r, c] = row.get(k)
    kinds = tuple(_kind(node_keys[k][1], list(values[:, c])) for c, k in enumerate(key_ids))
    return graph, FeatureTable(tuple(node_ids), tuple(names), kinds, values)


def read_graphml(path) -> tuple[Graph, FeatureTable]:
    with open(path, encoding="utf-8") as fh:
        return parse_graphml(fh.read())


def _fmt(value) -> str:
    return repr(float(value)) if isinstance(value, (float, np.floating)) else str(value)


def to_graphml(g: Graph, ft: FeatureTable | None = None) -> str:
    """Serialize to GraphML; ``parse_graphml`` round-trips the output."""
    root = ET.Element("graphml", xmlns=_GRAPHML_NS)
    if ft is not None:
        if ft.node_ids != g.node_ids:
            raise ValueError("feature table is not aligned with the graph")
        for k, (name, kind) in enumerate(zip(ft.feature_names, ft.kinds)):
            attr_type = {CATEGORICAL: "string", BINARY: "double", NUMERIC: "double"}[kind]
            ET.SubElement(root, "key", {"id": f"d{k}", "for": "node", "attr.name": name, "attr.type": attr_type})
    graph_el = ET.SubElement(root, "graph", edgedefault="undirected")
    for i, nid in enumerate(g.node_ids):
        node_el = ET.SubElement(graph_el, "node", id=nid)
        if ft is None:
            continue
        for k in range(ft.n_features):
            value = ft.values[i, k]
            if value is None or (isinstance(value, float) and np.isnan(value)):
                continue
            ET.SubElement(node_el, "data", key=f"d{k}").text = _fmt(value)
    for u, v in g.edge_ids():
        ET.SubElement(graph_el, "edge", source=u, target=v)
    ET.indent(root)
    return ET.tostring(root, encoding="unicode", xml_declaration=True)


def write_graphml(path, g: Graph, ft: FeatureTable | None = None) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(to_graphml(g, ft))


def parse_feature_csv(text: str, node_ids: Sequence[str] | None = None) -> FeatureTable:
    """Read a CSV sidecar: header row of feature names, node id in the first column.

    Columns that parse entirely as numbers become numeric/binary, anything
    else categorical. Empty cells are absent. When ``node_ids`` is given the
    rows are reordered to match it; nodes missing from the CSV get absent rows.
    """
    reader = csv.reader(io.StringIO(text))
    try:
        header = next(reader)
    except StopIteration:
        raise GraphParseError("empty feature CSV") from None
    names = [h.strip() for h in header[1:]]
    records: dict[str, list] = {}
    for lineno, rec in enumerate(reader, start=2):
        if not rec:
            continue
        if len(rec) != len(header):
            raise GraphParseError(f"feature CSV line {lineno}: expected {len(header)} fields, got {len(rec)}")
        nid = rec[0].strip()
        if nid in records:
            raise GraphStructureError(f"duplicate node id {nid!r} in feature CSV")
        records[nid] = [c.strip() for c in rec[1:]]

    ids = list(node_ids) if node_ids is not None else list(records)
    raw = np.empty((len(ids), len(names)), dtype=object)
    for r, nid in enumerate(ids):
        cells = records.get(nid, [""] * len(names))
        for c, cell in enumerate(cells):
            raw[r, c] = _coerce(cell, "string")

    kinds = []
    for c in range(len(names)):
        col = raw[:, c]
        try:
            parsed = [None if v is None else float(v) for v in col]
        except ValueError:
            kinds.append(CATEGORICAL)
            continue
        raw[:, c] = parsed
        kinds.append(_kind("double", parsed))
    return FeatureTable(tuple(ids), tuple(names), tuple(kinds), raw)


def read_feature_csv(path, node_ids: Sequence[str] | None = None) -> FeatureTable:
    with open(path, encoding="utf-8", newline="") as fh:
        return parse_feature_csv(fh.read(), node_ids)
