"""Scenario orchestration: axioms, admissibility, extraction, fixpoint, audit.

Each stage consumes the validated config plus one shared sample set and
produces report entries and CSV rows.  Stages run sequentially and never
depend on wall-clock state, so two runs of the same config write byte
identical outputs.  Figure rendering sits on the reporting path: the ``run``
and ``sweep`` entry points save plots next to the delimited files unless
rendering is switched off.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import partial
from pathlib import Path

from .audit import (audit_all_claims, check_structure, route_consistency,
                    verify_stability_bound)
from .config import (CLAIMS, DIRECT_DOUBLING, DIRECT_HALVING,
                     FIXPOINT_DOUBLING, FIXPOINT_HALVING, ExperimentConfig,
                     shared_beta)
from .control import (POWER, SERIES_IDS, ControlFunction, phi_eval,
                      power_series_coefficient, power_term_ratio, series_eval,
                      smallest_lipschitz)
from .direct import (DOUBLING, FAMILY_ROUTES, HALVING, ScaledMapping, extract,
                     extract_family, verify_gap_domination)
from .fixpoint import ROUTE_WEIGHT, contraction_factor, make_weight_probe
from .fixpoint import extract_and_verify as fixpoint_extract
from .mappings import admissibility_check
from .reporting import (FAIL, PASS, REFUSED, AuditEntry, AuditReport, fmt,
                        fmt_vector, write_csv)
from .sampling import SampleSet, build_samples
from .spaces import (BETA_HOMOGENEOUS, check_beta_homogeneity,
                     check_fnorm_axioms, zero_vector)

EXTRACTION_HEADER = ("route", "x", "z", "k_stop", "verdict", "limit",
                     "last_gap", "tail_bound")
FIXPOINT_HEADER = ("route", "n", "distance", "ratio")
BOUND_HEADER = ("x", "z", "measured", "bound", "slack")
SERIES_HEADER = ("series_id", "x", "y", "value", "terms", "tail_bound",
                 "converged")

_DIRECT_METHOD = {HALVING: DIRECT_HALVING, DOUBLING: DIRECT_DOUBLING}
_FIXPOINT_METHOD = {HALVING: FIXPOINT_HALVING, DOUBLING: FIXPOINT_DOUBLING}

CONVERGENT = "convergent"
DIVERGENT = "divergent"
DIVERGENT_BOUNDARY = "divergent-boundary"


@dataclass
class ScenarioContext:
    """Samples and derived values shared by every stage of one scenario."""

    beta: float
    samples_x: SampleSet
    samples_y: SampleSet

    @classmethod
    def from_config(cls, cfg: ExperimentConfig,
                    require_shared_beta: bool = True) -> "ScenarioContext":
        return cls(
            beta=shared_beta(cfg) if require_shared_beta else math.nan,
            samples_x=build_samples(cfg.space_x, cfg.samples),
            samples_y=build_samples(cfg.space_y, cfg.samples),
        )


def _phi_callable(cfg: ExperimentConfig):
    return partial(phi_eval, cfg.phi)


def stage_axioms(cfg: ExperimentConfig, ctx: ScenarioContext) -> list:
    """F-norm axioms for both spaces, plus homogeneity where it is claimed."""
    entries = []
    for prefix, space, samples in (("X-", cfg.space_x, ctx.samples_x),
                                   ("Y-", cfg.space_y, ctx.samples_y)):
        entries.extend(check_fnorm_axioms(
            space, samples.vectors, samples.scalar_sequences,
            tol=cfg.tolerances.identity, id_prefix=prefix))
        if space.kind == BETA_HOMOGENEOUS:
            entries.append(check_beta_homogeneity(
                space, samples.vectors, samples.scalars,
                tol=cfg.tolerances.identity, id_prefix=prefix))
    return entries


def stage_admissibility(cfg: ExperimentConfig, ctx: ScenarioContext) -> AuditEntry:
    return admissibility_check(cfg.mapping, _phi_callable(cfg),
                               ctx.samples_x.tuples,
                               tol=cfg.tolerances.identity)


def _domination_entry(traces, space_y, family: str) -> AuditEntry:
    worst = 0.0
    witness = None
    pairs = 0
    for trace in traces:
        ok, excess, pair, checked = verify_gap_domination(trace, space_y)
        pairs += checked
        if excess > worst:
            worst = excess
            l, m, observed, allowed = pair
            witness = {"route": trace.route, "point": [trace.x, trace.z],
                       "pair": [l, m], "observed": observed, "allowed": allowed}
    return AuditEntry(
        check_id=f"cauchy-domination-{family}",
        status=PASS if worst <= 0.0 else FAIL,
        margin=-worst,
        witness=witness,
        values={"traces": len(traces), "pairs": pairs},
    )


def trace_rows(traces) -> list:
    rows = []
    for t in traces:
        rows.append((
            t.route,
            fmt_vector(t.x),
            fmt_vector(t.z),
            t.k_stop,
            t.verdict,
            fmt_vector(t.limit) if t.limit is not None else "",
            t.last_gap,
            t.last_tail,
        ))
    return rows


def stage_direct(cfg: ExperimentConfig, ctx: ScenarioContext, family: str,
                 with_bound: bool = True):
    """Extraction, Cauchy domination, stability bound, structure of the limit.

    Returns (limits, entries, traces, bound_rows); limits is None whenever the
    family failed to reconcile, in which case the bound and structure checks
    are skipped rather than faked.  ``with_bound=False`` stops after the
    extraction checks (the `extract` subcommand's view).
    """
    entries = []
    limits, frag, traces = extract_family(
        cfg.mapping, cfg.phi, ctx.beta, ctx.samples_x.pairs, family,
        tol=cfg.tolerances.extraction, k_max=cfg.limits.k_max)
    entries.extend(frag)
    entries.append(_domination_entry(traces, cfg.space_y, family))
    bound_rows = []
    if with_bound and limits is not None:
        bound_entry, bound_rows = verify_stability_bound(
            cfg.mapping, limits, cfg.phi, ctx.beta, family,
            ctx.samples_x.pairs, tol=cfg.tolerances.series,
            max_terms=cfg.limits.max_terms)
        entries.append(bound_entry)
        route_a = FAMILY_ROUTES[family][0]
        depth = max(t.k_stop for t in traces if t.route == route_a)
        surrogate = ScaledMapping(cfg.mapping, route_a, max(depth, 1))
        entries.extend(check_structure(
            surrogate, ctx.samples_x.tuples, tol=1e-9,
            id_prefix=f"direct-{family}-"))
    return limits, entries, traces, bound_rows


def _contraction_entries(cfg: ExperimentConfig, ctx: ScenarioContext,
                         family: str) -> list:
    entries = []
    if cfg.phi.kind != POWER:
        return entries
    for route in FAMILY_ROUTES[family]:
        weight_kind = ROUTE_WEIGHT[route]
        probes = [
            (make_weight_probe(cfg.phi, weight_kind, cfg.space_y, 1.0),
             make_weight_probe(cfg.phi, weight_kind, cfg.space_y, 0.0)),
            (make_weight_probe(cfg.phi, weight_kind, cfg.space_y, 2.0),
             make_weight_probe(cfg.phi, weight_kind, cfg.space_y, 0.5)),
        ]
        measured = contraction_factor(route, cfg.phi, weight_kind, probes,
                                      ctx.samples_x.pairs)
        expected = power_term_ratio(cfg.phi.r, ctx.beta, route)
        deviation = abs(measured - expected)
        entries.append(AuditEntry(
            check_id=f"contraction-{route}",
            status=PASS if deviation <= cfg.tolerances.fixpoint else FAIL,
            margin=cfg.tolerances.fixpoint - deviation,
            values={"measured": measured, "expected": expected},
        ))
    return entries


def _iteration_rows(runs) -> list:
    rows = []
    for run in runs:
        for n, distance in enumerate(run.distances):
            ratio = ""
            if n > 0:
                prev = run.distances[n - 1]
                if math.isfinite(prev) and prev > 0.0 and math.isfinite(distance):
                    ratio = fmt(distance / prev)
            rows.append((run.route, n, distance, ratio))
    return rows


def stage_fixpoint(cfg: ExperimentConfig, ctx: ScenarioContext, family: str,
                   direct_limits=None):
    """Contraction audit plus the full fixed-point pipeline for one family.

    Returns (limit_values, entries, runs, iteration_rows).  When no Lipschitz
    constant below 1 exists on the sampled pairs the stage refuses instead of
    iterating with an unusable constant.
    """
    entries = _contraction_entries(cfg, ctx, family)
    lipschitz = cfg.lipschitz
    if lipschitz is None:
        lipschitz = smallest_lipschitz(cfg.phi, ctx.beta, ctx.samples_x.pairs,
                                       family)
    if not 0.0 < lipschitz < 1.0:
        entries.append(AuditEntry(
            check_id=f"fixpoint-{family}-condition",
            status=REFUSED,
            values={"lipschitz": lipschitz},
            notes="no usable Lipschitz constant in (0, 1) on the sampled "
                  "pairs; fixed-point iteration refused",
        ))
        return None, entries, [], []
    limit_values, frag, runs = fixpoint_extract(
        cfg.mapping, cfg.phi, ctx.beta, lipschitz, family,
        ctx.samples_x.pairs, ctx.samples_x.pairs,
        tol=cfg.tolerances.fixpoint, n_max=cfg.limits.n_max,
        direct_limits=direct_limits)
    entries.extend(frag)
    return limit_values, entries, runs, _iteration_rows(runs)


def stage_claims(cfg: ExperimentConfig, ctx: ScenarioContext) -> list:
    return audit_all_claims(cfg.phi.theta, cfg.phi.r, ctx.beta)


def series_table(cfg: ExperimentConfig, ctx: ScenarioContext):
    """All four majorant series along the diagonal of the sampled axis."""
    rows = []
    for series_id in SERIES_IDS:
        for value in ctx.samples_x.axis:
            point = zero_vector(cfg.space_x)
            point[0] = value
            res = series_eval(cfg.phi, point, point, series_id, ctx.beta,
                              tol=cfg.tolerances.series,
                              max_terms=cfg.limits.max_terms)
            rows.append((series_id, fmt_vector(point), fmt_vector(point),
                         res.value, res.terms_used, res.tail_bound,
                         res.converged))
    return SERIES_HEADER, rows


def _series_verdict(converged: bool, r: float, beta: float,
                    series_id: str) -> str:
    if converged:
        return CONVERGENT
    if power_term_ratio(r, beta, series_id) == 1.0:
        return DIVERGENT_BOUNDARY
    return DIVERGENT


def sweep_header() -> tuple:
    def col(stem, name):
        return f"{stem}_{name.replace('-', '_')}"

    header = ["r"]
    header += [col("series", s) for s in SERIES_IDS]
    header += ["L_halving", "L_doubling"]
    header += [col("extract", s) for s in SERIES_IDS]
    header += [col("const", s) for s in SERIES_IDS]
    return tuple(header)


def sweep_exponent(cfg: ExperimentConfig, ctx: ScenarioContext,
                   r_values=None):
    """One row per exponent: series verdicts, smallest L, extraction, constants.

    The control function must be power-type; everything else (mapping, spaces,
    samples) is taken from the config unchanged.  An empty exponent list
    yields an empty table.
    """
    if cfg.phi.kind != POWER:
        raise ValueError("exponent sweeps need a power-type control function")
    if r_values is None:
        r_values = cfg.sweep_grid
    unit = zero_vector(cfg.space_x)
    unit[0] = 1.0
    theta = cfg.phi.theta
    rows = []
    for r in r_values:
        phi_r = ControlFunction(space=cfg.space_x, kind=POWER, theta=theta, r=r)
        row = [r]
        for series_id in SERIES_IDS:
            res = series_eval(phi_r, unit, unit, series_id, ctx.beta,
                              tol=cfg.tolerances.series,
                              max_terms=cfg.limits.max_terms)
            row.append(_series_verdict(res.converged, r, ctx.beta, series_id))
        for family in (HALVING, DOUBLING):
            smallest = smallest_lipschitz(phi_r, ctx.beta,
                                          ctx.samples_x.pairs, family)
            row.append(fmt(smallest) if smallest < 1.0 else "none<1")
        for route in SERIES_IDS:
            trace = extract(cfg.mapping, phi_r, ctx.beta, unit, unit, route,
                            tol=cfg.tolerances.extraction,
                            k_max=cfg.limits.k_max)
            row.append(trace.verdict)
        for series_id in SERIES_IDS:
            coef = power_series_coefficient(r, ctx.beta, series_id)
            row.append(DIVERGENT if coef is None else fmt(2.0 * theta * coef))
        rows.append(tuple(row))
    return sweep_header(), rows


def run_scenario(cfg: ExperimentConfig, outdir, render: bool = True):
    """Execute the configured methods and write every report artifact.

    Returns (report, files) where files maps artifact names to paths.  The
    stage order is fixed: axioms, admissibility, direct families, fixed-point
    families, claims, route consistency.
    """
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    ctx = ScenarioContext.from_config(cfg)
    report = AuditReport(label=cfg.label or "scenario",
                         sample_count=ctx.samples_x.count)
    report.add(stage_axioms(cfg, ctx))
    report.add(stage_admissibility(cfg, ctx))

    files = {}
    extraction_rows = []
    bound_rows = []
    iteration_rows = []
    all_traces = []
    all_runs = []
    limits_map = {}

    direct_limits = {}
    for family in (HALVING, DOUBLING):
        if _DIRECT_METHOD[family] not in cfg.methods:
            continue
        limits, entries, traces, rows = stage_direct(cfg, ctx, family)
        report.add(entries)
        extraction_rows.extend(trace_rows(traces))
        bound_rows.extend(rows)
        all_traces.extend(traces)
        direct_limits[family] = limits
        limits_map[f"direct-{family}"] = limits

    for family in (HALVING, DOUBLING):
        if _FIXPOINT_METHOD[family] not in cfg.methods:
            continue
        limit_values, entries, runs, rows = stage_fixpoint(
            cfg, ctx, family, direct_limits.get(family))
        report.add(entries)
        iteration_rows.extend(rows)
        all_runs.extend(runs)
        limits_map[f"fixpoint-{family}"] = limit_values

    if CLAIMS in cfg.methods:
        report.add(stage_claims(cfg, ctx))

    if len(limits_map) >= 2:
        report.add(route_consistency(cfg.space_y, limits_map,
                                     ctx.samples_x.pairs,
                                     tol=cfg.tolerances.consistency))

    if extraction_rows:
        files["extraction"] = outdir / "extraction.csv"
        write_csv(files["extraction"], EXTRACTION_HEADER, extraction_rows)
    if bound_rows:
        files["bound"] = outdir / "bound.csv"
        rows = [(fmt_vector(x), fmt_vector(z), measured, bound, slack)
                for x, z, measured, bound, slack in bound_rows]
        write_csv(files["bound"], BOUND_HEADER, rows)
    if iteration_rows:
        files["fixpoint"] = outdir / "fixpoint_iterations.csv"
        write_csv(files["fixpoint"], FIXPOINT_HEADER, iteration_rows)
    if render and (all_traces or all_runs):
        from . import plots
        if all_traces:
            files["extraction_figure"] = outdir / "extraction.png"
            plots.save_extraction_figure(all_traces, files["extraction_figure"])
        if all_runs:
            files["fixpoint_figure"] = outdir / "fixpoint.png"
            plots.save_fixpoint_figure(all_runs, files["fixpoint_figure"])
    files["report"] = outdir / "report.json"
    report.write(files["report"])
    return report, files


def run_sweep(cfg: ExperimentConfig, outdir, render: bool = True,
              r_values=None):
    """Write the exponent sweep table (and its figure) for a config."""
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    ctx = ScenarioContext.from_config(cfg)
    header, rows = sweep_exponent(cfg, ctx, r_values)
    files = {"sweep": outdir / "sweep.csv"}
    write_csv(files["sweep"], header, rows)
    if render and rows:
        from . import plots
        files["sweep_figure"] = outdir / "sweep.png"
        plots.save_sweep_figure(header, rows, files["sweep_figure"])
    return files
