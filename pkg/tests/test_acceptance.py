"""Acceptance gate: ten numbered criteria, one printed verdict line each.

Each criterion recomputes its target quantity through the public API and
compares against independently derived constants (closed forms live in
``naive.py``, next to this file).  A criterion prints exactly one line,
``criterion NN: PASS (...)`` or ``criterion NN: FAIL (...)``, then asserts.
"""

import contextlib
import io
import itertools
import math
import time
from pathlib import Path

import numpy as np
import pytest

from aqstab import cli
from aqstab.audit import (
    FIXPOINT_DOUBLING,
    FIXPOINT_HALVING,
    audit_claim,
    check_structure,
    direct_bound,
    verify_stability_bound,
)
from aqstab.config import load_config
from aqstab.control import (
    ADDITIVE_DOUBLING,
    ADDITIVE_HALVING,
    QUADRATIC_DOUBLING,
    QUADRATIC_HALVING,
    SERIES_IDS,
    phi_eval,
    series_eval,
)
from aqstab.direct import (
    CONVERGED,
    HALVING,
    extract_family,
    rassias_calibration,
    verify_gap_domination,
)
from aqstab.fixpoint import (
    ROUTE_WEIGHT,
    contraction_factor,
    dm_iterate,
    extract_and_verify,
    make_weight_probe,
)
from aqstab.pipeline import ScenarioContext, sweep_exponent, sweep_header
from aqstab.reporting import FLAGGED, PASS
from aqstab.spaces import norm_eval

CONFIG_DIR = Path(__file__).resolve().parent.parent / "configs"
ROOT2 = math.sqrt(2.0)


def _report(number, ok, detail):
    verdict = "PASS" if ok else "FAIL"
    print(f"criterion {number:02d}: {verdict} ({detail})")
    assert ok, f"criterion {number}: {detail}"


@pytest.fixture(scope="module")
def fixture_results(fixture_mapping, phi_r3, grid, line):
    """Timed full halving-family run on the calibrated fixture (33^2 grid).

    Used by criteria 3 and 4; the wall time measured here is what criterion 3
    holds against its runtime budget.
    """
    start = time.perf_counter()
    limits, entries, traces = extract_family(
        fixture_mapping, phi_r3, 1.0, grid.pairs, HALVING, tol=1e-10, k_max=60
    )
    fp_limits, fp_entries, fp_runs = extract_and_verify(
        fixture_mapping, phi_r3, 1.0, 0.5, HALVING, grid.pairs, grid.pairs, tol=1e-10
    )
    bound_entry, bound_rows = verify_stability_bound(
        fixture_mapping, limits, phi_r3, 1.0, HALVING, grid.pairs
    )
    elapsed = time.perf_counter() - start
    return {
        "elapsed": elapsed,
        "limits": limits,
        "entries": entries,
        "traces": traces,
        "fp_limits": fp_limits,
        "fp_entries": fp_entries,
        "fp_runs": fp_runs,
        "bound_entry": bound_entry,
        "bound_rows": bound_rows,
    }


def test_criterion_01_halving_constant_reproduction(phi_r3, unit, line):
    start = time.perf_counter()
    additive = series_eval(phi_r3, unit, unit, ADDITIVE_HALVING, 1.0, tol=1e-15)
    quadratic = series_eval(phi_r3, unit, unit, QUADRATIC_HALVING, 1.0, tol=1e-15)
    other = phi_eval(phi_r3, unit, [0.0])
    first_arm = additive.value * other
    second_arm = quadratic.value * other
    bound, _ = direct_bound(phi_r3, 1.0, HALVING, unit, unit, tol=1e-15)
    elapsed = time.perf_counter() - start
    ok = (
        additive.converged
        and quadratic.converged
        and abs(first_arm - 1.0 / 3.0) <= 1e-12
        and abs(second_arm - 0.5) <= 1e-12
        and abs(bound - min(first_arm, second_arm)) <= 1e-12
        and elapsed < 1.0
    )
    _report(
        1,
        ok,
        f"arms {first_arm:.15f} vs 1/3 and {second_arm:.15f} vs 1/2, "
        f"min {bound:.15f}, {elapsed:.3f}s",
    )


def test_criterion_02_doubling_constant_reproduction(phi_r05, unit):
    additive = series_eval(phi_r05, unit, unit, ADDITIVE_DOUBLING, 1.0, tol=1e-15)
    quadratic = series_eval(phi_r05, unit, unit, QUADRATIC_DOUBLING, 1.0, tol=1e-15)
    other = phi_eval(phi_r05, unit, [0.0])
    arms = (additive.value * other, quadratic.value * other)
    bound, _ = direct_bound(phi_r05, 1.0, "doubling", unit, unit, tol=1e-15)
    expected = 2.0 / (4.0 - ROOT2)
    ok = (
        additive.converged
        and quadratic.converged
        and abs(arms[0] - 2.0 / (2.0 - ROOT2)) <= 1e-12
        and abs(arms[1] - expected) <= 1e-12
        and abs(min(arms) - expected) <= 1e-12
        and abs(bound - expected) <= 1e-12
    )
    _report(2, ok, f"min arm {min(arms):.15f} vs 2/(4-sqrt2) {expected:.15f}")


def test_criterion_03_extraction_and_bound_on_the_fixture(fixture_results, line, grid):
    res = fixture_results
    converged = all(t.verdict == CONVERGED for t in res["traces"])
    routes = {t.route for t in res["traces"]}
    four_routes = (
        routes == {ADDITIVE_HALVING, QUADRATIC_HALVING} and len(res["fp_runs"]) == 2
    )
    direct_small = res["limits"] is not None and max(
        norm_eval(line, v) for v in res["limits"]
    ) <= 1e-10
    fp_small = res["fp_limits"] is not None and max(
        norm_eval(line, v) for v in res["fp_limits"]
    ) <= 1e-10
    entries_pass = all(
        e.status == PASS for e in res["entries"] + res["fp_entries"] + [res["bound_entry"]]
    )
    slack_ok = (
        len(res["bound_rows"]) == len(grid.pairs)
        and min(slack for *_ignored, slack in res["bound_rows"]) >= 0.0
    )
    ok = (
        converged
        and four_routes
        and direct_small
        and fp_small
        and entries_pass
        and slack_ok
        and res["elapsed"] < 5.0
    )
    _report(
        3,
        ok,
        f"4 routes on {len(grid.pairs)} samples, limits <= 1e-10, "
        f"min slack {min(s for *_i, s in res['bound_rows']):.3e}, {res['elapsed']:.2f}s",
    )


def test_criterion_04_cauchy_domination(fixture_results, line):
    worst = math.inf
    pairs_checked = 0
    violations = 0
    for trace in fixture_results["traces"]:
        ok, margin, _witness, pairs = verify_gap_domination(trace, line)
        pairs_checked += pairs
        worst = min(worst, margin)
        if not ok:
            violations += 1
    ok = violations == 0 and pairs_checked > 0 and worst >= 0.0
    _report(4, ok, f"{pairs_checked} gap pairs, {violations} violations, worst margin {worst:.3e}")


def test_criterion_05_contraction_audit(fixture_mapping, phi_r3, line, small_grid):
    kind = ROUTE_WEIGHT[ADDITIVE_HALVING]
    probes = [
        (make_weight_probe(phi_r3, kind, line, 1.0), make_weight_probe(phi_r3, kind, line, 0.0)),
        (make_weight_probe(phi_r3, kind, line, 2.0), make_weight_probe(phi_r3, kind, line, 0.5)),
    ]
    factor = contraction_factor(ADDITIVE_HALVING, phi_r3, kind, probes, small_grid.pairs)
    run = dm_iterate(ADDITIVE_HALVING, fixture_mapping, phi_r3, small_grid.pairs, tol=1e-10)
    clause_ok = bool(run.clause4_ok) and run.d_start_limit <= run.clause4_rhs * (1.0 + 1e-9)
    ok = abs(factor - 0.25) <= 1e-10 and clause_ok
    _report(
        5,
        ok,
        f"measured factor {factor!r} vs 0.25, "
        f"d(f,F)={run.d_start_limit:.3e} <= {run.clause4_rhs:.3e}",
    )


def test_criterion_06_rassias_calibration():
    eps, p = 0.1, 0.5

    def g(x):
        return x + eps * abs(x) ** p

    xs = [0.25, 0.5, 1.0, -1.5, 2.0, 3.0]
    entries, limits = rassias_calibration(g, p, eps, xs, tol=1e-15)
    by_id = {e.check_id: e for e in entries}
    extraction_ok = max(abs(limits[x] - x) for x in xs) <= 1e-10
    bound_ok = by_id["rassias-bound"].status == PASS
    tight = by_id["rassias-tight-factor"].values
    factor_ok = abs(tight["measured_factor"] - 1.0) <= 1e-12
    theorem_ok = abs(tight["theorem_factor"] - 2.0 / (2.0 - ROOT2)) <= 1e-12
    ok = extraction_ok and bound_ok and factor_ok and theorem_ok
    _report(
        6,
        ok,
        f"T(x)=x within 1e-10, tight factor {tight['measured_factor']!r} vs 1, "
        f"theorem {tight['theorem_factor']:.6f}",
    )


def test_criterion_07_structural_finding(separable_mapping):
    tuples = [(0.0, 1.0, 1.0, 1.0)] + list(itertools.product((-1.0, 0.0, 1.0), repeat=4))
    entries = check_structure(separable_mapping, tuples)
    by_stem = {e.check_id.rsplit("structure-", 1)[-1]: e for e in entries}
    full = by_stem["full-equation"]
    witness_ok = (
        full.values["max_residual"] == 4.0
        and full.witness is not None
        and [float(c) for c in np.ravel(full.witness["tuple"])] == [0.0, 1.0, 1.0, 1.0]
    )
    slots_ok = (
        by_stem["additive-slot"].status == PASS
        and by_stem["quadratic-slot"].status == PASS
    )
    ok = witness_ok and slots_ok and full.status != PASS
    _report(
        7,
        ok,
        f"slot checks pass, full-equation residual {full.values['max_residual']!r} "
        f"at (0,1,1,1)",
    )


def test_criterion_08_hypothesis_audit():
    halving = audit_claim(FIXPOINT_HALVING, 1.0, 1.5, 1.0)
    doubling = audit_claim(FIXPOINT_DOUBLING, 1.0, 0.5, 1.0)
    d = 2.0 ** 1.5 - 2.0
    halving_ok = (
        halving.status == FLAGGED
        and abs(halving.values["stated_L"] - d / (d + 1.0)) <= 1e-9
        and abs(halving.values["required_L"] - ROOT2) <= 1e-9
    )
    doubling_ok = (
        doubling.status == FLAGGED
        and abs(doubling.values["stated_L"] - 2.0 ** -1.5) <= 1e-9
        and abs(doubling.values["required_L"] - 2.0 ** -0.5) <= 1e-9
    )
    ok = halving_ok and doubling_ok
    _report(
        8,
        ok,
        "both flagged; stated vs required L: "
        f"halving {halving.values['stated_L']:.6f}/{halving.values['required_L']:.6f}, "
        f"doubling {doubling.values['stated_L']:.6f}/{doubling.values['required_L']:.6f}",
    )


EXPECTED_CONVERGENT = {
    ADDITIVE_HALVING: {1.1, 1.5, 2.5, 3.0},
    QUADRATIC_HALVING: {2.5, 3.0},
    ADDITIVE_DOUBLING: {0.5, 0.9},
    QUADRATIC_DOUBLING: {0.5, 0.9, 1.1, 1.5},
}


def test_criterion_09_critical_exponent_sweep():
    cfg = load_config(CONFIG_DIR / "sweep_power.json")
    ctx = ScenarioContext.from_config(cfg)
    header, rows = sweep_exponent(cfg, ctx)
    assert header == sweep_header()
    grid_r = (0.5, 0.9, 1.1, 1.5, 2.5, 3.0)
    mismatches = []
    checked = 0
    for row in rows:
        cells = dict(zip(header, row))
        r = float(cells["r"])
        for series_id in SERIES_IDS:
            verdict = cells[f"series_{series_id.replace('-', '_')}"]
            expected = "convergent" if r in EXPECTED_CONVERGENT[series_id] else "divergent"
            checked += 1
            if verdict != expected:
                mismatches.append((r, series_id, verdict, expected))
    ok = tuple(float(r[0]) for r in rows) == grid_r and checked == 24 and not mismatches
    _report(9, ok, f"{checked} series verdicts, {len(mismatches)} mismatches")


def test_criterion_10_deterministic_runs(tmp_path):
    unequal = []
    for config in sorted(CONFIG_DIR.glob("*.json")):
        outs = []
        for tag in ("first", "second"):
            out = tmp_path / f"{config.stem}-{tag}"
            with contextlib.redirect_stdout(io.StringIO()):
                cli.main(["run", "--config", str(config), "--out", str(out)])
            outs.append(out)
        names = sorted(p.name for p in outs[0].iterdir())
        if names != sorted(p.name for p in outs[1].iterdir()):
            unequal.append((config.stem, "file sets differ"))
            continue
        for name in names:
            if (outs[0] / name).read_bytes() != (outs[1] / name).read_bytes():
                unequal.append((config.stem, name))
    configs = len(list(CONFIG_DIR.glob("*.json")))
    ok = configs >= 5 and not unequal
    _report(10, ok, f"{configs} configs rerun byte-identically" if ok else f"diffs: {unequal}")
