"""Command-line entry point.

Subcommands map one-to-one onto the pipeline stages:

    axioms     F-norm axiom checks for both configured spaces
    series     majorant series table along the sampled axis (series.csv)
    extract    direct-method extraction traces (extraction.csv)
    fixpoint   scaling-operator iteration (fixpoint_iterations.csv)
    bound      extraction plus the stability-bound check (bound.csv)
    audit      admissibility plus the printed-constant claim audits
    sweep      exponent sweep table (sweep.csv) and its figure
    run        the full configured pipeline with figures

Every subcommand takes --config PATH and writes into --out DIR.  --seed N
overrides the config's sampling seed; --tol X overrides the extraction,
fixed-point, and consistency tolerances.  Exit codes: 0 all checks passed,
1 violations or flagged claims, 2 refused checks, 3 config errors.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace
from pathlib import Path

from .config import (DIRECT_DOUBLING, DIRECT_HALVING, FIXPOINT_DOUBLING,
                     FIXPOINT_HALVING, ExperimentConfig, load_config)
from .direct import DOUBLING, HALVING
from .errors import ConfigError
from .pipeline import (FIXPOINT_HEADER, SERIES_HEADER, ScenarioContext,
                       run_scenario, run_sweep, series_table, stage_admissibility,
                       stage_axioms, stage_claims, stage_direct, stage_fixpoint,
                       trace_rows, EXTRACTION_HEADER, BOUND_HEADER)
from .reporting import PASS, AuditReport, fmt_vector, write_csv
from .sampling import SampleSpec


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(message)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="aqstab",
                     description="stability-theory laboratory for the "
                                 "additive-quadratic functional equation")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in (
            ("axioms", "check the F-norm axioms of both spaces"),
            ("series", "tabulate the four majorant series"),
            ("extract", "run the direct-method extraction routes"),
            ("fixpoint", "run the scaling-operator iteration"),
            ("bound", "extraction plus the stability-bound check"),
            ("audit", "admissibility and printed-constant claim audits"),
            ("sweep", "exponent sweep over the configured r grid"),
            ("run", "full pipeline for the configured methods"),
    ):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", required=True, help="JSON config file")
        p.add_argument("--out", default="aqstab-out",
                       help="output directory (default: %(default)s)")
        p.add_argument("--seed", type=int, default=None,
                       help="override the sampling seed")
        p.add_argument("--tol", type=float, default=None,
                       help="override extraction/fixpoint/consistency tolerances")
    return parser


def _apply_overrides(cfg: ExperimentConfig, args) -> ExperimentConfig:
    if args.seed is not None:
        spec = cfg.samples
        cfg = replace(cfg, samples=SampleSpec(
            extent=spec.extent, dyadic_depth=spec.dyadic_depth,
            random_count=spec.random_count, seed=args.seed))
    if args.tol is not None:
        if not args.tol > 0.0:
            raise ConfigError(f"--tol must be positive, got {args.tol}")
        cfg = replace(cfg, tolerances=replace(
            cfg.tolerances, extraction=args.tol, fixpoint=args.tol,
            consistency=args.tol))
    return cfg


def _print_report(report: AuditReport, files: dict) -> None:
    for entry in sorted(report.entries, key=lambda e: e.check_id):
        if entry.status != PASS:
            print(f"{entry.status}: {entry.check_id} margin={entry.margin!r}")
    counts = report.counts()
    print(" ".join(f"{k}={v}" for k, v in sorted(counts.items()))
          + f" exit={report.exit_code()}")
    for name in sorted(files):
        print(f"wrote {files[name]}")


def _direct_families(cfg: ExperimentConfig) -> list:
    families = [family for family, method in
                ((HALVING, DIRECT_HALVING), (DOUBLING, DIRECT_DOUBLING))
                if method in cfg.methods]
    return families or [HALVING, DOUBLING]


def _fixpoint_families(cfg: ExperimentConfig) -> list:
    families = [family for family, method in
                ((HALVING, FIXPOINT_HALVING), (DOUBLING, FIXPOINT_DOUBLING))
                if method in cfg.methods]
    return families or [HALVING, DOUBLING]


def cmd_axioms(cfg: ExperimentConfig, outdir: Path) -> int:
    ctx = ScenarioContext.from_config(cfg, require_shared_beta=False)
    report = AuditReport(label=cfg.label or "axioms",
                         sample_count=len(ctx.samples_x.vectors))
    report.add(stage_axioms(cfg, ctx))
    files = {"report": outdir / "report.json"}
    outdir.mkdir(parents=True, exist_ok=True)
    report.write(files["report"])
    _print_report(report, files)
    return report.exit_code()


def cmd_series(cfg: ExperimentConfig, outdir: Path) -> int:
    ctx = ScenarioContext.from_config(cfg)
    header, rows = series_table(cfg, ctx)
    outdir.mkdir(parents=True, exist_ok=True)
    path = outdir / "series.csv"
    write_csv(path, header, rows)
    print(f"wrote {path}")
    return 0


def cmd_extract(cfg: ExperimentConfig, outdir: Path) -> int:
    ctx = ScenarioContext.from_config(cfg)
    report = AuditReport(label=cfg.label or "extract",
                         sample_count=ctx.samples_x.count)
    rows = []
    for family in _direct_families(cfg):
        _, entries, traces, _ = stage_direct(cfg, ctx, family, with_bound=False)
        report.add(entries)
        rows.extend(trace_rows(traces))
    outdir.mkdir(parents=True, exist_ok=True)
    files = {"extraction": outdir / "extraction.csv",
             "report": outdir / "report.json"}
    write_csv(files["extraction"], EXTRACTION_HEADER, rows)
    report.write(files["report"])
    _print_report(report, files)
    return report.exit_code()


def cmd_fixpoint(cfg: ExperimentConfig, outdir: Path) -> int:
    ctx = ScenarioContext.from_config(cfg)
    report = AuditReport(label=cfg.label or "fixpoint",
                         sample_count=ctx.samples_x.count)
    rows = []
    for family in _fixpoint_families(cfg):
        _, entries, _, iteration_rows = stage_fixpoint(cfg, ctx, family)
        report.add(entries)
        rows.extend(iteration_rows)
    outdir.mkdir(parents=True, exist_ok=True)
    files = {"fixpoint": outdir / "fixpoint_iterations.csv",
             "report": outdir / "report.json"}
    write_csv(files["fixpoint"], FIXPOINT_HEADER, rows)
    report.write(files["report"])
    _print_report(report, files)
    return report.exit_code()


def cmd_bound(cfg: ExperimentConfig, outdir: Path) -> int:
    ctx = ScenarioContext.from_config(cfg)
    report = AuditReport(label=cfg.label or "bound",
                         sample_count=ctx.samples_x.count)
    rows = []
    for family in _direct_families(cfg):
        _, entries, _, bound_rows = stage_direct(cfg, ctx, family)
        report.add(entries)
        rows.extend((fmt_vector(x), fmt_vector(z), measured, bound, slack)
                    for x, z, measured, bound, slack in bound_rows)
    outdir.mkdir(parents=True, exist_ok=True)
    files = {"bound": outdir / "bound.csv", "report": outdir / "report.json"}
    write_csv(files["bound"], BOUND_HEADER, rows)
    report.write(files["report"])
    _print_report(report, files)
    return report.exit_code()


def cmd_audit(cfg: ExperimentConfig, outdir: Path) -> int:
    ctx = ScenarioContext.from_config(cfg)
    report = AuditReport(label=cfg.label or "audit",
                         sample_count=ctx.samples_x.count)
    report.add(stage_admissibility(cfg, ctx))
    report.add(stage_claims(cfg, ctx))
    outdir.mkdir(parents=True, exist_ok=True)
    files = {"report": outdir / "report.json"}
    report.write(files["report"])
    _print_report(report, files)
    return report.exit_code()


def cmd_sweep(cfg: ExperimentConfig, outdir: Path) -> int:
    files = run_sweep(cfg, outdir)
    for name in sorted(files):
        print(f"wrote {files[name]}")
    return 0


def cmd_run(cfg: ExperimentConfig, outdir: Path) -> int:
    report, files = run_scenario(cfg, outdir)
    _print_report(report, files)
    return report.exit_code()


_COMMANDS = {
    "axioms": cmd_axioms,
    "series": cmd_series,
    "extract": cmd_extract,
    "fixpoint": cmd_fixpoint,
    "bound": cmd_bound,
    "audit": cmd_audit,
    "sweep": cmd_sweep,
    "run": cmd_run,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        cfg = _apply_overrides(load_config(args.config), args)
        return _COMMANDS[args.command](cfg, Path(args.out))
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
