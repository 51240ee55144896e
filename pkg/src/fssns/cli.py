"""Command line entry point (``fssns``)."""

from __future__ import annotations

import argparse
import dataclasses
import json
import logging
import sys
from pathlib import Path

from .experiment import ExperimentConfig, compare, load_config_file, load_dataset, run_base, run_fs
from .filters import FRM_REGISTRY, rank_features
from .graph import read_feature_csv, read_graphml, write_graphml
from .prep import SamplerConfig, prepare, sample_connected
from .synthetic import planted_homophily

_SIM_FLAGS = ("frm", "numbin", "zero_alt", "max_eval", "formation_seed", "rstate", "edge_limit", "keep_first_k_features")


def _add_dataset_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("graphml", help="input GraphML file")
    p.add_argument("--features-csv", help="CSV feature sidecar (first column = node id)")
    p.add_argument("--name", help="dataset name used in output file names")
    p.add_argument("--keep-first-k-features", type=int)
    p.add_argument("--feature-null-fraction", type=float, default=0.3)
    p.add_argument("--node-null-fraction", type=float, default=0.0)
    p.add_argument("--edge-limit", type=int, help="down-sample to at most this many edges first")
    p.add_argument("--sample-seed", type=int, default=0)


def _add_sim_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--frm", default="FR-Var-Col-Lap", choices=sorted(FRM_REGISTRY))
    p.add_argument("--numbin", type=int, help="histogram bins (default: power of ten near the node count)")
    p.add_argument("--zero-alt", type=float, default=1e-5)
    p.add_argument("--max-eval", type=int, default=100)
    p.add_argument("--formation-seed", type=int, default=50)
    p.add_argument("--rstate", type=int, default=42)


def _config_from_args(args) -> ExperimentConfig:
    name = args.name or Path(args.graphml).stem
    fields = {
        "name": name,
        "graphml": args.graphml,
        "features_csv": args.features_csv,
        "feature_null_fraction": args.feature_null_fraction,
        "node_null_fraction": args.node_null_fraction,
        "sample_seed": args.sample_seed,
        "out": args.out,
    }
    for flag in _SIM_FLAGS:
        if getattr(args, flag, None) is not None:
            fields[flag] = getattr(args, flag)
    return ExperimentConfig(**fields)


def _write_json(path: Path, payload) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(payload, indent=2), encoding="utf-8")


def cmd_prep(args) -> int:
    g, ft = read_graphml(args.graphml)
    if args.features_csv:
        ft = read_feature_csv(args.features_csv, g.node_ids)
    g, ft, report = prepare(
        g, ft, args.feature_null_fraction, args.node_null_fraction, args.keep_first_k_features
    )
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    name = args.name or Path(args.graphml).stem
    write_graphml(out / f"{name}_clean.graphml", g, ft)
    _write_json(out / f"cleaning_{name}.json", report.to_dict())
    print(f"{name}: {g.n_nodes} nodes, {g.n_edges} edges, {ft.n_features} features "
          f"({report.nodes_removed} nodes removed, bipartite={report.bipartite})")
    return 0


def cmd_sample(args) -> int:
    g, ft = read_graphml(args.graphml)
    sub = sample_connected(g, SamplerConfig(edge_limit=args.edge_limit, seed=args.seed))
    rows = [ft.node_ids.index(n) for n in sub.node_ids]
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    write_graphml(out, sub, ft.select_rows(rows))
    print(f"sampled {sub.n_nodes} nodes, {sub.n_edges} edges -> {out}")
    return 0


def format_ranking_table(ranking) -> str:
    width = max([len("Feature")] + [len(f) for f in ranking.features])
    lines = [f"{'Rank':>4}  {'Feature':<{width}}  {'FS':>10}  {'S sum':>8}  R1 R2 R3"]
    for pos, f in enumerate(ranking.features, start=1):
        r1, r2, r3 = ranking.rank_counts[f]
        lines.append(
            f"{pos:>4}  {f:<{width}}  {ranking.final_scores[f]:>10.4f}  {ranking.score_sums[f]:>8.4f}  {r1:>2} {r2:>2} {r3:>2}"
        )
    return "\n".join(lines)


def cmd_rank(args) -> int:
    cfg = _config_from_args(args)
    ds = load_dataset(cfg)
    ranking = rank_features(ds.features, cfg.frm)
    _write_json(Path(args.out) / f"ranking_{cfg.name}.json", ranking.to_dict())
    print(f"{cfg.name} ({cfg.frm})")
    print(format_ranking_table(ranking))
    return 0


def cmd_base(args) -> int:
    cfg = _config_from_args(args)
    ds = load_dataset(cfg)
    result = run_base(ds, cfg)
    out = Path(args.out)
    payload = {"network": cfg.name, "error": result.error, "similarity": 1 - result.error,
               "seconds": result.seconds, "dna": result.dna.to_dict()}
    _write_json(out / f"base_{cfg.name}.json", payload)
    (out / f"trials_{cfg.name}_base.csv").write_text(result.history.to_csv(), encoding="utf-8")
    print(json.dumps(payload, indent=2))
    return 0


def cmd_fs(args) -> int:
    cfg = _config_from_args(args)
    ds = load_dataset(cfg)
    result = run_fs(ds, cfg)
    out = Path(args.out)
    payload = {"network": cfg.name, "frm_name": cfg.frm, "seconds": result.seconds, **result.wrapper.to_dict()}
    _write_json(out / f"fs_{cfg.name}.json", payload)
    _write_json(out / f"ranking_{cfg.name}.json", result.ranking.to_dict())
    for k, step in enumerate(result.wrapper.steps, start=1):
        (out / f"trials_{cfg.name}_{k}.csv").write_text(step.history.to_csv(), encoding="utf-8")
    print(json.dumps(payload, indent=2))
    return 0


def cmd_compare(args) -> int:
    if args.config:
        overrides = {f: getattr(args, f) for f in _SIM_FLAGS if getattr(args, f) is not None}
        cfgs = [dataclasses.replace(c, **overrides) for c in load_config_file(args.config)]
    else:
        cfgs = [_config_from_args(args)]
    summary = compare(cfgs, args.out, jobs=args.jobs)
    print(f"{'Network':<14} {'FRM':<16} {'#F':>3} {'FS err':>8} {'Base err':>8} {'Acc %':>6} {'FS s':>8} {'Base s':>8}")
    for r in summary["rows"]:
        acc = "—" if r["accuracy_increase_pct"] is None else str(r["accuracy_increase_pct"])
        print(f"{r['network']:<14} {r['frm_name']:<16} {r['n_features_selected']:>3} {r['fs_error']:>8.4f} "
              f"{r['base_error']:>8.4f} {acc:>6} {r['fs_seconds']:>8.2f} {r['base_seconds']:>8.2f}")
    for name in summary["failures"]:
        print(f"{name}: FAILED (see comparison.json)", file=sys.stderr)
    return 1 if summary["failures"] and not summary["rows"] else 0


def cmd_synth(args) -> int:
    g, ft = planted_homophily(
        n_nodes=args.nodes, n_noise=args.noise_features, p_in=args.p_in, p_out=args.p_out,
        group_fraction=args.group_fraction, seed=args.seed,
    )
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    write_graphml(out, g, ft)
    print(f"wrote {g.n_nodes} nodes, {g.n_edges} edges -> {out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fssns", description="Feature-selected social network simulation")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("prep", help="clean a GraphML dataset")
    _add_dataset_args(p)
    p.add_argument("--out", default="results")
    p.set_defaults(func=cmd_prep)

    p = sub.add_parser("sample", help="connected edge-limited down-sampling")
    p.add_argument("graphml")
    p.add_argument("--edge-limit", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="output GraphML path")
    p.set_defaults(func=cmd_sample)

    for name, func, text in (
        ("rank", cmd_rank, "rank node features"),
        ("base", cmd_base, "Base SNS: one optimization over all features"),
        ("fs", cmd_fs, "FS-SNS: ranking plus forward selection"),
    ):
        p = sub.add_parser(name, help=text)
        _add_dataset_args(p)
        _add_sim_args(p)
        p.add_argument("--out", default="results")
        p.set_defaults(func=func)

    p = sub.add_parser("compare", help="Base SNS vs FS-SNS over one or more datasets")
    p.add_argument("graphml", nargs="?")
    p.add_argument("--config", help="JSON config with 'defaults' and 'datasets'")
    p.add_argument("--features-csv")
    p.add_argument("--name")
    p.add_argument("--keep-first-k-features", type=int)
    p.add_argument("--feature-null-fraction", type=float, default=0.3)
    p.add_argument("--node-null-fraction", type=float, default=0.0)
    p.add_argument("--edge-limit", type=int)
    p.add_argument("--sample-seed", type=int, default=0)
    p.add_argument("--frm", choices=sorted(FRM_REGISTRY))
    p.add_argument("--numbin", type=int)
    p.add_argument("--zero-alt", type=float)
    p.add_argument("--max-eval", type=int)
    p.add_argument("--formation-seed", type=int)
    p.add_argument("--rstate", type=int)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--out", default="results")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("synth", help="write a planted-homophily benchmark network")
    p.add_argument("--nodes", type=int, default=30)
    p.add_argument("--noise-features", type=int, default=4)
    p.add_argument("--p-in", type=float, default=1.0)
    p.add_argument("--p-out", type=float, default=0.01)
    p.add_argument("--group-fraction", type=float, default=0.6)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_synth)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    if args.command == "compare" and not (args.config or args.graphml):
        build_parser().error("compare needs a GraphML path or --config")
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
