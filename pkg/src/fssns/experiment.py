"""End-to-end experiment driver: prep, Base SNS, FS-SNS and comparison exports."""

from __future__ import annotations

import csv
import dataclasses
import io
import json
import logging
import math
import time
import traceback
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .evaluation import EvalConfig, degree_histogram
from .filters import FeatureRanking, rank_features
from .graph import FeatureTable, Graph, read_feature_csv, read_graphml
from .prep import CleaningReport, SamplerConfig, prepare, sample_connected
from .sns import SimulationParams, SocialDNA, form_network
from .tpe import TpeConfig, TrialHistory
from .wrapper import WrapperResult, optimize_combination, run_wrapper

logger = logging.getLogger(__name__)


@dataclass
class ExperimentConfig:
    name: str = "dataset"
    graphml: str | None = None
    features_csv: str | None = None
    frm: str = "FR-Var-Col-Lap"
    numbin: int | None = None
    zero_alt: float = 1e-5
    max_eval: int = 100
    formation_seed: int = 50
    rstate: int = 42
    random_interference: float = 0.001
    encounter_rate: int = 1
    edge_limit: int | None = None
    sample_seed: int = 0
    keep_first_k_features: int | None = None
    feature_null_fraction: float = 0.3
    node_null_fraction: float = 0.0
    out: str = "results"

    @classmethod
    def from_mapping(cls, mapping: dict) -> "ExperimentConfig":
        """Build from a dict whose keys are flag names (dashes or underscores)."""
        known = {f.name for f in dataclasses.fields(cls)}
        kwargs = {}
        for key, value in mapping.items():
            name = key.lstrip("-").replace("-", "_")
            if name not in known:
                raise KeyError(f"unknown config key {key!r}")
            kwargs[name] = value
        return cls(**kwargs)

    def tpe_config(self) -> TpeConfig:
        return TpeConfig(max_eval=self.max_eval, rstate_seed=self.rstate, n_startup=min(10, self.max_eval))

    def eval_config(self, n_nodes: int) -> EvalConfig:
        if self.numbin is None:
            return EvalConfig.for_nodes(n_nodes, self.zero_alt)
        expected = EvalConfig.for_nodes(n_nodes).numbin
        if not expected / 10 < self.numbin < expected * 10:
            logger.warning("numbin=%d is not of the magnitude of the node count (%d)", self.numbin, n_nodes)
        return EvalConfig(self.numbin, self.zero_alt)

    def simulation_params(self, edge_budget: int) -> SimulationParams:
        return SimulationParams(
            edge_budget=edge_budget,
            encounter_rate=self.encounter_rate,
            random_interference=self.random_interference,
            formation_seed=self.formation_seed,
        )


def load_config_file(path) -> list[ExperimentConfig]:
    """Read a JSON config: ``{"defaults": {...}, "datasets": [{...}, ...]}``.

    Relative dataset paths resolve against the config file's directory.
    """
    path = Path(path)
    doc = json.loads(path.read_text(encoding="utf-8"))
    defaults = doc.get("defaults", {})
    entries = doc.get("datasets", [doc] if "graphml" in doc else [])
    if not entries:
        raise ValueError(f"{path}: no datasets configured")
    configs = []
    for entry in entries:
        merged = {**defaults, **entry}
        for key in ("graphml", "features_csv", "features-csv"):
            if merged.get(key) and not Path(merged[key]).is_absolute():
                merged[key] = str(path.parent / merged[key])
        configs.append(ExperimentConfig.from_mapping(merged))
    return configs


@dataclass
class PreparedDataset:
    name: str
    graph: Graph
    features: FeatureTable
    report: CleaningReport = field(default_factory=CleaningReport)


def load_dataset(cfg: ExperimentConfig) -> PreparedDataset:
    """Read, optionally down-sample, and clean one dataset."""
    if not cfg.graphml:
        raise ValueError(f"{cfg.name}: no graphml path configured")
    graph, ft = read_graphml(cfg.graphml)
    if cfg.features_csv:
        ft = read_feature_csv(cfg.features_csv, graph.node_ids)
    if cfg.edge_limit is not None:
        graph = sample_connected(graph, SamplerConfig(edge_limit=cfg.edge_limit, seed=cfg.sample_seed))
    graph, ft, report = prepare(
        graph,
        ft,
        feature_null_fraction=cfg.feature_null_fraction,
        node_null_fraction=cfg.node_null_fraction,
        keep_first_k_features=cfg.keep_first_k_features,
    )
    if ft.n_features == 0:
        raise ValueError(f"{cfg.name}: no features left after cleaning")
    return PreparedDataset(cfg.name, graph, ft, report)


@dataclass
class BaseResult:
    error: float
    seconds: float
    graph: Graph
    dna: SocialDNA
    history: TrialHistory


@dataclass
class FsResult:
    wrapper: WrapperResult
    ranking: FeatureRanking
    seconds: float
    graph: Graph

    @property
    def error(self) -> float:
        return self.wrapper.best_error


def run_base(ds: PreparedDataset, cfg: ExperimentConfig) -> BaseResult:
    """One optimization over every feature."""
    params = cfg.simulation_params(ds.graph.n_edges)
    ecfg = cfg.eval_config(ds.graph.n_nodes)
    start = time.perf_counter()
    result, dna = optimize_combination(ds.features, ds.graph, ds.features.feature_names, params, cfg.tpe_config(), ecfg)
    seconds = time.perf_counter() - start
    sim = form_network(ds.features, dna, params)
    return BaseResult(1.0 - result.best_value, seconds, sim, dna, result.history)


def run_fs(ds: PreparedDataset, cfg: ExperimentConfig) -> FsResult:
    """Rank features, then forward selection; the timing covers both."""
    params = cfg.simulation_params(ds.graph.n_edges)
    ecfg = cfg.eval_config(ds.graph.n_nodes)
    start = time.perf_counter()
    ranking = rank_features(ds.features, cfg.frm)
    wrapper = run_wrapper(ds.features, ds.graph, ranking, params, cfg.tpe_config(), ecfg)
    seconds = time.perf_counter() - start
    sim = form_network(ds.features, wrapper.best_step.best_dna, params)
    return FsResult(wrapper, ranking, seconds, sim)


def accuracy_increase(base_error: float, fs_error: float) -> int | None:
    """Relative error reduction in whole percent; ``None`` when the base error is 0."""
    if base_error <= 0:
        return None
    # Round half away from zero, as a printed table would.
    pct = 100.0 * (base_error - fs_error) / base_error
    return int(math.floor(abs(pct) + 0.5 + 1e-9) * (1 if pct >= 0 else -1))


@dataclass
class ComparisonRow:
    network: str
    frm_name: str
    n_features_selected: int
    fs_error: float
    base_error: float
    accuracy_increase_pct: int | None
    fs_seconds: float
    base_seconds: float

    TIMING_FIELDS = ("fs_seconds", "base_seconds")

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


def _dd_csv(distributions: dict[str, np.ndarray]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    names = list(distributions)
    writer.writerow(["bin", *names])
    length = len(next(iter(distributions.values())))
    for b in range(length):
        writer.writerow([b, *(repr(float(distributions[n][b])) for n in names)])
    return buf.getvalue()


def run_experiment(cfg: ExperimentConfig, write: bool = True) -> tuple[ComparisonRow, dict]:
    """Base SNS and FS-SNS on one dataset; optionally writes per-dataset artifacts to ``cfg.out``."""
    ds = load_dataset(cfg)
    base = run_base(ds, cfg)
    fs = run_fs(ds, cfg)
    row = ComparisonRow(
        network=cfg.name,
        frm_name=cfg.frm,
        n_features_selected=len(fs.wrapper.selected_features),
        fs_error=fs.error,
        base_error=base.error,
        accuracy_increase_pct=accuracy_increase(base.error, fs.error),
        fs_seconds=fs.seconds,
        base_seconds=base.seconds,
    )
    detail = {
        "cleaning": ds.report.to_dict(),
        "nodes": ds.graph.n_nodes,
        "edges": ds.graph.n_edges,
        "features": list(ds.features.feature_names),
        "base": {"error": base.error, "seconds": base.seconds, "dna": base.dna.to_dict()},
        "fs": {**fs.wrapper.to_dict(), "seconds": fs.seconds},
    }
    if write:
        out = Path(cfg.out)
        out.mkdir(parents=True, exist_ok=True)
        ecfg = cfg.eval_config(ds.graph.n_nodes)
        for variant, graph in (("target", ds.graph), ("base", base.graph), ("fs", fs.graph)):
            dd = degree_histogram(graph, ecfg)
            (out / f"dd_{cfg.name}_{variant}.csv").write_text(
                _dd_csv({"probability": dd.probabilities, "raw": dd.raw}), encoding="utf-8"
            )
        (out / f"ranking_{cfg.name}.json").write_text(json.dumps(fs.ranking.to_dict(), indent=2), encoding="utf-8")
        (out / f"trials_{cfg.name}_base.csv").write_text(base.history.to_csv(), encoding="utf-8")
        for k, step in enumerate(fs.wrapper.steps, start=1):
            if step.history is not None:
                (out / f"trials_{cfg.name}_{k}.csv").write_text(step.history.to_csv(), encoding="utf-8")
    return row, detail


def _run_safe(cfg: ExperimentConfig):
    try:
        return cfg.name, run_experiment(cfg), None
    except Exception as exc:
        logger.error("dataset %s failed: %s", cfg.name, exc)
        return cfg.name, None, f"{type(exc).__name__}: {exc}\n{traceback.format_exc()}"


def compare(cfgs: Sequence[ExperimentConfig], out: str | Path, jobs: int = 1) -> dict:
    """Run every dataset, then write ``comparison.json`` and ``comparison.csv`` to ``out``.

    Datasets are independent and may run in parallel processes; a failing
    dataset is reported under ``failures`` without stopping the others.
    """
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    cfgs = [dataclasses.replace(c, out=str(out)) for c in cfgs]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            outcomes = list(pool.map(_run_safe, cfgs))
    else:
        outcomes = [_run_safe(c) for c in cfgs]

    rows, details, failures = [], {}, {}
    for name, result, error in outcomes:
        if error is not None:
            failures[name] = error
            continue
        row, detail = result
        rows.append(row)
        details[name] = detail
    summary = {"rows": [r.to_dict() for r in rows], "details": details, "failures": failures}
    (out / "comparison.json").write_text(json.dumps(summary, indent=2), encoding="utf-8")
    with open(out / "comparison.csv", "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        names = [f.name for f in dataclasses.fields(ComparisonRow)]
        writer.writerow(names)
        for r in rows:
            d = r.to_dict()
            writer.writerow(["—" if d[n] is None else d[n] for n in names])
    return summary
