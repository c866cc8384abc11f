import pytest

from aqstab.control import (
    ADDITIVE_DOUBLING,
    ADDITIVE_HALVING,
    QUADRATIC_DOUBLING,
    QUADRATIC_HALVING,
    ControlFunction,
    power_term_ratio,
)
from aqstab.direct import (
    CONVERGED,
    DIVERGED,
    HALVING,
    ROUTES,
    UNDECIDED,
    ScaledMapping,
    cauchy_gap_bound,
    extract,
    extract_family,
    family_of,
    rassias_calibration,
    scaled_iterate_value,
    step_bound,
    verify_gap_domination,
)
from aqstab.errors import InputError
from aqstab.mappings import Mapping
from aqstab.reporting import PASS
from aqstab.sampling import SampleSpec, build_samples
from aqstab.spaces import norm_eval


def test_family_of():
    assert family_of(ADDITIVE_HALVING) == "halving"
    assert family_of(QUADRATIC_DOUBLING) == "doubling"
    with pytest.raises(InputError):
        family_of("sideways")


def test_scaled_iterates_have_closed_forms(fixture_mapping):
    f = fixture_mapping
    x, z = 1.5, 0.75

    def g(u, v):
        return 0.01 * u ** 3 * v ** 3

    cases = {
        ADDITIVE_HALVING: 2.0 ** 2 * g(x / 4.0, z),
        QUADRATIC_HALVING: 4.0 ** 2 * g(x, z / 4.0),
        ADDITIVE_DOUBLING: 2.0 ** -2 * g(4.0 * x, z),
        QUADRATIC_DOUBLING: 4.0 ** -2 * g(x, 4.0 * z),
    }
    for route, expected in cases.items():
        got = float(scaled_iterate_value(f, route, 2, x, z)[0])
        assert got == pytest.approx(expected, rel=1e-13)


def test_scaled_mapping_wraps_the_iterate(fixture_mapping):
    view = ScaledMapping(fixture_mapping, ADDITIVE_HALVING, depth=3)
    assert view.space_x is fixture_mapping.space_x
    assert float(view(1.0, 1.0)[0]) == float(
        scaled_iterate_value(fixture_mapping, ADDITIVE_HALVING, 3, 1.0, 1.0)[0]
    )
    with pytest.raises(InputError):
        ScaledMapping(fixture_mapping, "sideways")
    with pytest.raises(InputError):
        ScaledMapping(fixture_mapping, ADDITIVE_HALVING, depth=-1)


def test_step_bounds_follow_the_series_ratio(phi_r3, unit):
    for route in (ADDITIVE_HALVING, QUADRATIC_HALVING):
        ratio = power_term_ratio(3.0, 1.0, route)
        b1 = step_bound(phi_r3, 1.0, route, 1, unit, unit)
        b2 = step_bound(phi_r3, 1.0, route, 2, unit, unit)
        assert b1 > 0.0
        assert b2 / b1 == pytest.approx(ratio, rel=1e-12)


def test_cauchy_gap_bound_is_a_partial_sum_and_a_tail(phi_r3, unit):
    route = ADDITIVE_HALVING
    finite = cauchy_gap_bound(phi_r3, 1.0, route, 2, 6, unit, unit)
    total = sum(step_bound(phi_r3, 1.0, route, j, unit, unit) for j in range(2, 6))
    assert finite == pytest.approx(total, rel=1e-13)
    tail = cauchy_gap_bound(phi_r3, 1.0, route, 2, None, unit, unit)
    assert tail >= finite
    deeper = cauchy_gap_bound(phi_r3, 1.0, route, 5, None, unit, unit)
    assert deeper < tail
    with pytest.raises(InputError):
        cauchy_gap_bound(phi_r3, 1.0, route, 3, 3, unit, unit)


def test_extraction_converges_on_the_halving_routes(fixture_mapping, phi_r3):
    for route in (ADDITIVE_HALVING, QUADRATIC_HALVING):
        trace = extract(fixture_mapping, phi_r3, 1.0, [1.0], [1.0], route)
        assert trace.verdict == CONVERGED
        assert norm_eval(fixture_mapping.space_y, trace.limit) <= 1e-10
        assert trace.last_tail <= 1e-10
        assert len(trace.gaps) == len(trace.iterates) - 1


def test_extraction_diverges_on_the_doubling_routes(fixture_mapping, phi_r3):
    for route in (ADDITIVE_DOUBLING, QUADRATIC_DOUBLING):
        trace = extract(fixture_mapping, phi_r3, 1.0, [1.0], [1.0], route)
        assert trace.verdict == DIVERGED
        assert trace.limit is None


def test_extraction_of_the_zero_mapping(line, phi_r3):
    f = Mapping(line, line)
    for route in ROUTES:
        trace = extract(f, phi_r3, 1.0, [1.0], [1.0], route, tol=1e-10)
        if trace.verdict == CONVERGED:
            assert norm_eval(line, trace.limit) == 0.0
            assert all(norm_eval(line, s) == 0.0 for s in trace.iterates)


def test_zero_mapping_halving_extraction_is_certified(line, phi_r3):
    f = Mapping(line, line)
    trace = extract(f, phi_r3, 1.0, [1.0], [1.0], ADDITIVE_HALVING)
    assert trace.verdict == CONVERGED
    assert trace.last_gap == 0.0


def test_custom_control_extraction_stays_undecided(line, fixture_mapping):
    mimic = ControlFunction(
        space=line,
        kind="custom",
        func=lambda x, y: abs(float(x[0])) ** 3 + abs(float(y[0])) ** 3,
    )
    trace = extract(fixture_mapping, mimic, 1.0, [1.0], [1.0], ADDITIVE_HALVING, k_max=20)
    assert trace.verdict == UNDECIDED


def test_extract_family_reconciles_both_routes(fixture_mapping, phi_r3, line):
    samples = build_samples(line, SampleSpec(extent=1.0, dyadic_depth=1)).pairs
    limits, entries, traces = extract_family(
        fixture_mapping, phi_r3, 1.0, samples, HALVING, tol=1e-10
    )
    assert limits is not None
    assert len(limits) == len(samples)
    assert len(traces) == 2 * len(samples)
    assert all(t.route == ADDITIVE_HALVING for t in traces[: len(samples)])
    assert all(t.route == QUADRATIC_HALVING for t in traces[len(samples):])
    reconcile = [e for e in entries if "reconcile" in e.check_id]
    assert reconcile and reconcile[0].status == PASS
    assert max(norm_eval(line, v) for v in limits) <= 1e-10


def test_gap_domination_has_zero_violations(fixture_mapping, phi_r3, line):
    samples = build_samples(line, SampleSpec(extent=1.0, dyadic_depth=1)).pairs
    _, _, traces = extract_family(fixture_mapping, phi_r3, 1.0, samples, HALVING, tol=1e-10)
    for trace in traces:
        ok, margin, witness, pairs = verify_gap_domination(trace, line)
        assert ok
        assert margin >= 0.0
        assert pairs > 0


def test_rassias_calibration_recovers_the_additive_part():
    g = lambda x: 2.0 * x
    entries, limits = rassias_calibration(g, 0.5, 0.1, [1.0, -2.0, 0.5])
    assert all(e.status == PASS for e in entries)
    for x, t in limits.items():
        assert t == pytest.approx(2.0 * x, abs=1e-12)
    by_id = {e.check_id: e for e in entries}
    assert by_id["rassias-tight-factor"].values["measured_factor"] == 0.0


def test_rassias_calibration_validates_input():
    with pytest.raises(InputError):
        rassias_calibration(lambda x: x, 1.0, 0.1, [1.0])
    with pytest.raises(InputError):
        rassias_calibration(lambda x: x + 1.0, 0.5, 0.1, [1.0])
    with pytest.raises(InputError):
        rassias_calibration(lambda x: x, 0.5, 0.1, [])
    with pytest.raises(InputError):
        rassias_calibration(lambda x: x, 0.5, -0.1, [1.0])
