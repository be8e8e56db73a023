"""Command-line front end: gen-data, train, eval, grad-check, sweep, report.

All commands read a JSON config (validated with unknown-key rejection),
take their randomness from a single --seed flag, and refuse to overwrite
a non-empty output directory unless --force is given. Exit codes: 0
success, 1 check failure, 2 validation or I/O error, 3 numerical abort.
"""

import argparse
import csv
import dataclasses
import json
import sys
import time
from pathlib import Path

from . import __version__
from .config import (
    config_hash,
    load_json,
    parse_gradcheck_config,
    parse_sweep_file,
    parse_synth_config,
    parse_train_file,
)
from .data import generate, load_csv, save_csv, split
from .exceptions import (
    DomainError,
    ParseError,
    TrainingDivergedError,
    ValidationError,
)
from .gradcheck import GradCheckConfig, run_gradcheck
from .model import MlpConfig, init, load_checkpoint, save_checkpoint
from .numeric import seeded_rng
from .regularizer import OrdinalClassSet
from .train import RegularizerKind, evaluate, sweep_batch_size, train

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_VALIDATION = 2
EXIT_NUMERIC = 3

HISTORY_COLUMNS = ("epoch", "train_total_loss", "train_main_loss",
                   "train_reg_loss", "dev_accuracy", "dev_mae")
RUN_COLUMNS = ("config_hash", "regularizer", "batch_size", "seed", "status",
               "test_accuracy", "test_mae", "test_macro_f1", "best_epoch",
               "error")


def _prepare_out(path, force: bool) -> Path:
    out = Path(path)
    if out.exists() and any(out.iterdir()) and not force:
        raise ValidationError(
            f"output directory {out} exists and is not empty (use --force)"
        )
    out.mkdir(parents=True, exist_ok=True)
    return out


def _write_json(path: Path, obj) -> None:
    path.write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n",
                    encoding="utf-8")


def _write_manifest(out: Path, command: str, seed: int, config_snapshot,
                    dataset_provenance, artifacts, started: float) -> None:
    manifest = {
        "tool": "wranksim",
        "version": __version__,
        "command": command,
        "seed": seed,
        "config": config_snapshot,
        "config_hash": config_hash(config_snapshot),
        "dataset": dataset_provenance,
        "artifacts": sorted(artifacts),
        "duration_seconds": round(time.perf_counter() - started, 3),
    }
    _write_json(out / "manifest.json", manifest)


def _csv_cell(value) -> str:
    if isinstance(value, float):
        return repr(value)
    return str(value)


def cmd_gen_data(args) -> int:
    started = time.perf_counter()
    cfg = parse_synth_config(load_json(args.config))
    out = _prepare_out(args.out, args.force)
    dataset = generate(cfg, seeded_rng(args.seed), seed=args.seed)
    save_csv(dataset, out / "dataset.csv")
    _write_manifest(out, "gen-data", args.seed, cfg.to_dict(),
                    dataset.provenance, ["dataset.csv"], started)
    counts = ", ".join(
        f"{c}:{n}" for c, n in zip(dataset.classes.labels, dataset.class_counts()))
    print(f"wrote {len(dataset)} samples to {out / 'dataset.csv'} "
          f"(class counts {counts})")
    return EXIT_OK


def cmd_train(args) -> int:
    started = time.perf_counter()
    file_cfg = parse_train_file(load_json(args.config))
    cfg = dataclasses.replace(file_cfg.train, seed=args.seed)
    classes = OrdinalClassSet.contiguous(file_cfg.n_classes)
    dataset = load_csv(args.data, classes)
    out = _prepare_out(args.out, args.force)

    rng = seeded_rng(args.seed)
    splits = split(dataset, file_cfg.ratios, rng)
    model_cfg = MlpConfig(
        input_dim=dataset.feature_dim,
        hidden_dims=file_cfg.hidden_dims,
        output_classes=file_cfg.n_classes,
        activation=file_cfg.activation,
        init_seed=args.seed,
    )
    result = train(init(model_cfg), splits, cfg, rng)

    save_checkpoint(result.model, out / "model.ckpt")
    with (out / "history.csv").open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(HISTORY_COLUMNS)
        for rec in result.history:
            writer.writerow([_csv_cell(getattr(rec, col)) for col in HISTORY_COLUMNS])
    metrics = {name: rep.to_dict() for name, rep in result.reports.items()}
    metrics["best_epoch"] = result.best_epoch
    _write_json(out / "metrics.json", metrics)

    snapshot = dict(cfg.to_dict(), ratios=list(file_cfg.ratios),
                    hidden_dims=list(file_cfg.hidden_dims),
                    activation=file_cfg.activation.value,
                    n_classes=file_cfg.n_classes)
    _write_manifest(out, "train", args.seed, snapshot, dataset.provenance,
                    ["model.ckpt", "history.csv", "metrics.json"], started)
    test = result.reports["test"]
    print(f"best epoch {result.best_epoch}: test accuracy "
          f"{test.accuracy:.4f}, test MAE {test.mae:.4f}")
    return EXIT_OK


def cmd_eval(args) -> int:
    started = time.perf_counter()
    model = load_checkpoint(args.checkpoint)
    classes = OrdinalClassSet.contiguous(model.config.output_classes)
    dataset = load_csv(args.data, classes)
    out = _prepare_out(args.out, args.force)
    report = evaluate(model, dataset)
    _write_json(out / "metrics.json", {"eval": report.to_dict()})
    snapshot = {"checkpoint": str(args.checkpoint),
                "model": model.config.to_dict()}
    _write_manifest(out, "eval", args.seed, snapshot, dataset.provenance,
                    ["metrics.json"], started)
    print(f"accuracy {report.accuracy:.4f}, MAE {report.mae:.4f}, "
          f"macro F1 {report.macro_f1:.4f}")
    return EXIT_OK


def cmd_grad_check(args) -> int:
    if args.config:
        cfg = parse_gradcheck_config(load_json(args.config))
    else:
        cfg = GradCheckConfig()
    cfg = dataclasses.replace(cfg, seed=args.seed)
    report = run_gradcheck(cfg, corrupt=args.corrupt)
    for suite in report.suites:
        status = "PASS" if suite.passed else "FAIL"
        print(f"{status} {suite.name}: max rel err {suite.max_rel_err:.3e} "
              f"(tolerance {suite.tolerance:g}, {suite.n_cases} cases, "
              f"{suite.seconds:.2f}s)")
    sweep = report.rank_sweep
    status = "PASS" if sweep.passed else "FAIL"
    print(f"{status} rank-oracle: {sweep.n_mismatch} mismatch(es) in "
          f"{sweep.n_cases} cases ({sweep.seconds:.2f}s)")
    if report.all_passed:
        return EXIT_OK
    failing = {s.name: s.worst_case for s in report.suites if not s.passed}
    if not sweep.passed:
        failing["rank-oracle"] = sweep.worst_case
    print("failing case(s) for replay:")
    print(json.dumps(failing, indent=2, sort_keys=True))
    return EXIT_CHECK_FAILED


def cmd_sweep(args) -> int:
    started = time.perf_counter()
    sweep_cfg = parse_sweep_file(load_json(args.config))
    base = sweep_cfg.base
    classes = OrdinalClassSet.contiguous(base.n_classes)
    dataset = load_csv(args.data, classes)
    out = _prepare_out(args.out, args.force)

    rng = seeded_rng(args.seed)
    splits = split(dataset, base.ratios, rng)
    cfg_base = dataclasses.replace(base.train, seed=args.seed)
    model_cfg = MlpConfig(
        input_dim=dataset.feature_dim,
        hidden_dims=base.hidden_dims,
        output_classes=base.n_classes,
        activation=base.activation,
        init_seed=0,
    )
    report = sweep_batch_size(cfg_base, model_cfg, sweep_cfg.batch_sizes,
                              sweep_cfg.seeds, splits, jobs=args.jobs)

    with (out / "runs.csv").open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(RUN_COLUMNS)
        for row in report.rows:
            run_cfg = dataclasses.replace(
                cfg_base,
                regularizer=RegularizerKind(row["regularizer"]),
                batch_size=row["batch_size"],
                seed=row["seed"],
            )
            cells = dict(row, config_hash=config_hash(run_cfg.to_dict()))
            writer.writerow([_csv_cell(cells[col]) for col in RUN_COLUMNS])
    summary = {
        "batch_sizes": list(report.batch_sizes),
        "seeds": list(report.seeds),
        "aggregates": report.aggregates,
        "dispersion": report.dispersion,
        "n_failed": report.n_failed,
    }
    _write_json(out / "summary.json", summary)

    snapshot = dict(cfg_base.to_dict(), ratios=list(base.ratios),
                    hidden_dims=list(base.hidden_dims),
                    activation=base.activation.value, n_classes=base.n_classes,
                    batch_sizes=list(sweep_cfg.batch_sizes),
                    seeds=list(sweep_cfg.seeds))
    snapshot.pop("regularizer", None)
    snapshot.pop("batch_size", None)
    _write_manifest(out, "sweep", args.seed, snapshot, dataset.provenance,
                    ["runs.csv", "summary.json"], started)

    for reg, value in report.dispersion.items():
        print(f"{reg}: cross-batch-size accuracy std {value:.6f}")
    if report.n_failed:
        print(f"warning: {report.n_failed} run(s) failed; see runs.csv",
              file=sys.stderr)
    return EXIT_OK


def cmd_report(args) -> int:
    out = Path(args.out)
    manifest_path = out / "manifest.json"
    if not manifest_path.exists():
        raise ValidationError(f"no manifest.json in {out}")
    manifest = json.loads(manifest_path.read_text(encoding="utf-8"))
    print(f"command: {manifest.get('command')} "
          f"(tool {manifest.get('tool')} {manifest.get('version')})")
    print(f"seed: {manifest.get('seed')}  config hash: {manifest.get('config_hash')}")
    dataset = manifest.get("dataset") or {}
    print(f"dataset: {dataset.get('kind', 'unknown')}")

    metrics_path = out / "metrics.json"
    if metrics_path.exists():
        metrics = json.loads(metrics_path.read_text(encoding="utf-8"))
        for name in ("train", "dev", "test", "eval"):
            rep = metrics.get(name)
            if rep:
                print(f"{name}: accuracy {rep['accuracy']:.4f}, "
                      f"MAE {rep['mae']:.4f}, macro F1 {rep['macro_f1']:.4f}")
        if "best_epoch" in metrics:
            print(f"best epoch: {metrics['best_epoch']}")
    summary_path = out / "summary.json"
    if summary_path.exists():
        summary = json.loads(summary_path.read_text(encoding="utf-8"))
        for agg in summary.get("aggregates", []):
            print(f"{agg['regularizer']} batch {agg['batch_size']}: "
                  f"mean acc {agg['mean_test_accuracy']:.4f} "
                  f"(std {agg['std_test_accuracy']:.4f}, n={agg['n_ok']})")
        for reg, value in summary.get("dispersion", {}).items():
            print(f"{reg}: cross-batch-size accuracy std {value:.6f}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="wranksim",
        description="Ordinal classification with ranking-similarity "
                    "regularization on output-layer weights.",
    )
    parser.add_argument("--version", action="version",
                        version=f"wranksim {__version__}")
    sub = parser.add_subparsers(dest="command")

    def add(name, func, help_text, *, config=True, data=False, out=True,
            force=True, jobs=False, checkpoint=False):
        p = sub.add_parser(name, help=help_text)
        if config:
            required = name not in ("grad-check",)
            p.add_argument("--config", required=required,
                           help="JSON config file")
        if data:
            p.add_argument("--data", required=True, help="dataset CSV")
        if checkpoint:
            p.add_argument("--checkpoint", required=True,
                           help="model checkpoint file")
        if out:
            p.add_argument("--out", required=True, help="output directory")
        p.add_argument("--seed", type=int, default=0,
                       help="seed for all randomness (default 0)")
        if force:
            p.add_argument("--force", action="store_true",
                           help="allow writing into a non-empty output directory")
        if jobs:
            p.add_argument("--jobs", type=int, default=1,
                           help="parallel training runs (default 1)")
        p.set_defaults(func=func)
        return p

    add("gen-data", cmd_gen_data, "generate a synthetic dataset CSV")
    add("train", cmd_train, "train a classifier on a dataset CSV", data=True)
    add("eval", cmd_eval, "evaluate a saved checkpoint on a dataset CSV",
        config=False, data=True, checkpoint=True)
    p = add("grad-check", cmd_grad_check,
            "verify analytic gradients against finite differences",
            out=False, force=False)
    p.add_argument("--corrupt", default=None, help=argparse.SUPPRESS)
    add("sweep", cmd_sweep, "batch-size consistency grid over two "
        "regularizers", data=True, jobs=True)
    p = sub.add_parser("report", help="summarize a run directory")
    p.add_argument("--out", required=True, help="run directory to summarize")
    p.set_defaults(func=cmd_report)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if not hasattr(args, "func"):
        parser.print_help()
        return EXIT_VALIDATION
    try:
        return args.func(args)
    except TrainingDivergedError as exc:
        print(f"numerical abort: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (ValidationError, ParseError, DomainError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
