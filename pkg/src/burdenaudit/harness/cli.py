"""Command-line front end: ``burdenaudit {gen,train,audit,plot,oracle-check}``."""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

from burdenaudit import classifier, dataset as ds, synthgen
from burdenaudit.counterfactual import PROFILES
from burdenaudit.errors import AuditError, StageError
from burdenaudit.harness import pipeline
from burdenaudit.harness.plot import emit_plot

OUT_ENV = "BURDENAUDIT_OUT"
ORACLE_BOUND = 1.10


def _out(args, default: str) -> Path:
    if args.out:
        return Path(args.out)
    return Path(os.environ.get(OUT_ENV, default))


def _data_args(p: argparse.ArgumentParser):
    src = p.add_mutually_exclusive_group()
    src.add_argument("--preset", choices=sorted(synthgen.PRESETS), help="synthetic dataset")
    src.add_argument("--data", help="CSV file (needs --schema)")
    p.add_argument("--schema", help="schema YAML for --data")
    p.add_argument("--sensitive-column", help="sensitive column defining the groups")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="burdenaudit", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="write a synthetic preset to CSV")
    p.add_argument("--preset", choices=sorted(synthgen.PRESETS), required=True)
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--out", help="CSV path")
    p.add_argument("--schema-out", help="also write the matching schema YAML")

    p = sub.add_parser("train", help="fit a logistic regression and save it")
    _data_args(p)
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--config", help="experiment config YAML (train section is used)")
    p.add_argument("--out", help="model JSON path")

    p = sub.add_parser("audit", help="run the full experiment")
    _data_args(p)
    p.add_argument("--sample-size", type=int)
    p.add_argument("--profile", choices=sorted(PROFILES))
    p.add_argument("--workers", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--config", help="experiment config YAML")
    p.add_argument("--out", help="output directory")
    p.add_argument("--from-run", help="recompute the report of an earlier run from its artifacts")

    p = sub.add_parser("plot", help="re-render the SVG of an earlier run")
    p.add_argument("run_dir")
    p.add_argument("--out", help="SVG path (default: <run_dir>/plot.svg)")

    p = sub.add_parser("oracle-check", help="compare GA distances with the analytic projection")
    _data_args(p)
    p.add_argument("--profile", choices=sorted(PROFILES))
    p.add_argument("--seed", type=int)
    p.add_argument("--config")
    p.add_argument("--out", help="optional JSON file for the table")
    return parser


def _experiment(args) -> pipeline.ExperimentConfig:
    overrides = {
        "preset": getattr(args, "preset", None),
        "data": getattr(args, "data", None),
        "schema": getattr(args, "schema", None),
        "sensitive_column": getattr(args, "sensitive_column", None),
        "sample_size": getattr(args, "sample_size", None),
        "profile": getattr(args, "profile", None),
        "workers": getattr(args, "workers", None),
        "seed": getattr(args, "seed", None),
    }
    if overrides["data"] is not None:
        overrides["preset"] = None
    if overrides["preset"] is not None:
        overrides["data"] = None
    if args.config:
        cfg = pipeline.ExperimentConfig.load(args.config, **overrides)
        if overrides["data"] is not None:
            cfg.preset = None
        if overrides["preset"] is not None:
            cfg.data = None
    else:
        cfg = pipeline.ExperimentConfig.from_dict({}, **overrides)
    return cfg


def cmd_gen(args) -> int:
    data = synthgen.generate(synthgen.PRESETS[args.preset](), args.seed)
    path = _out(args, f"{args.preset}.csv")
    path.parent.mkdir(parents=True, exist_ok=True)
    ds.write_csv(data, path)
    if args.schema_out:
        ds.save_schema(data.schema, args.schema_out)
    print(f"wrote {len(data)} points to {path}")
    return 0


def cmd_train(args) -> int:
    cfg = _experiment(args)
    cfg.validate()
    data, _ = ds.clean(pipeline.load_data(cfg))
    features, _, labels = ds.split(data)
    model = classifier.train(features, labels, cfg.train, feature_names=data.feature_names)
    path = _out(args, "model.json")
    path.parent.mkdir(parents=True, exist_ok=True)
    classifier.save_model(model, path)
    print(f"accuracy {classifier.accuracy(model, features, labels):.4f}; model written to {path}")
    return 0


def cmd_audit(args) -> int:
    if args.from_run:
        doc = pipeline.rebuild_report(args.from_run)
        print(json.dumps(doc, indent=2, sort_keys=True))
        return 0
    cfg = _experiment(args)
    if args.out or OUT_ENV in os.environ or not args.config:
        cfg.output_dir = _out(args, f"runs/{cfg.preset or 'audit'}")
    arts = pipeline.run_experiment(cfg)
    rep = arts.report_doc["fairness"]
    print(f"accuracy            {arts.report_doc['accuracy']:.4f}")
    for s in rep["groups"]:
        ar = rep["acceptance_rate_by_group"][str(s)]
        b = rep["burden_by_group"][str(s)]
        print(f"group {s}: AR {_num(ar)}  Burden {_num(b)}")
    print(f"statistical parity  {_num(rep['statistical_parity'])}  disparate impact: {rep['disparate_impact']}")
    print(f"burden ratio        {_num(rep['burden_ratio'])}")
    for stage, secs in arts.timing.items():
        print(f"  {stage:<16}{secs:8.3f} s")
    print(f"artifacts in {cfg.output_dir}")
    return 0


def _num(v) -> str:
    return "undefined" if v is None else f"{v:.4f}"


def cmd_plot(args) -> int:
    data, model, cfs = pipeline.load_run(args.run_dir)
    path = Path(args.out) if args.out else Path(args.run_dir) / pipeline.PLOT_FILE
    report = json.loads((Path(args.run_dir) / pipeline.REPORT_FILE).read_text(encoding="utf-8"))
    written = emit_plot(data, model, cfs, path, pipeline.plot_title(report["config"]))
    if written is None:
        print("plot skipped: data is not 2-dimensional", file=sys.stderr)
    else:
        print(f"wrote {written}")
    return 0


def cmd_oracle_check(args) -> int:
    cfg = _experiment(args)
    cfg.validate()
    data, _ = ds.clean(pipeline.load_data(cfg))
    features, _, labels = ds.split(data)
    model = classifier.train(features, labels, cfg.train, feature_names=data.feature_names)
    rows = pipeline.oracle_check(model, features, cfg.ga)
    print(f"{'index':>6} {'ga':>10} {'oracle':>10} {'ratio':>8}")
    for r in rows:
        ga = "invalid" if r["ga"] is None else f"{r['ga']:.5f}"
        ratio = "-" if r["ratio"] is None else f"{r['ratio']:.4f}"
        print(f"{r['index']:>6} {ga:>10} {r['oracle']:>10.5f} {ratio:>8}")
    worst = max((r["ratio"] for r in rows if r["ratio"] is not None), default=None)
    ok = all(r["ratio"] is not None and r["ratio"] <= ORACLE_BOUND for r in rows)
    print(f"{len(rows)} points, worst ratio {_num(worst)}, bound {ORACLE_BOUND}: {'PASS' if ok else 'FAIL'}")
    if args.out:
        Path(args.out).write_text(json.dumps(rows, indent=2) + "\n", encoding="utf-8")
    return 0 if ok else 1


COMMANDS = {
    "gen": cmd_gen,
    "train": cmd_train,
    "audit": cmd_audit,
    "plot": cmd_plot,
    "oracle-check": cmd_oracle_check,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except StageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (AuditError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
