import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

import naive
from aqstab.control import ControlFunction, phi_eval
from aqstab.errors import CalibrationError, ConfigError, NumericError, StructuralError
from aqstab.mappings import (
    CoreSpec,
    InterpolationTable,
    Mapping,
    PerturbationSpec,
    admissibility_check,
    calibrate_amplitude,
    defect,
    perturbation_from_csv,
    sgnpow,
)
from aqstab.reporting import FAIL, PASS
from aqstab.spaces import norm_eval

dyadic = st.integers(min_value=-8, max_value=8).map(lambda k: k / 4.0)


def test_sgnpow_values():
    assert sgnpow(-2.0, 3.0) == -8.0
    assert sgnpow(-4.0, 0.5) == -2.0
    assert sgnpow(0.0, 0.5) == 0.0
    assert sgnpow(1.5, 0.0) == 1.0
    assert sgnpow(-1.5, 0.0) == -1.0


def test_zero_mapping_is_identically_zero(line):
    f = Mapping(line, line)
    for x, z in [(0.0, 0.0), (1.0, 2.0), (-0.5, 0.25)]:
        assert norm_eval(line, f(x, z)) == 0.0


@given(x=dyadic, z=dyadic)
def test_axis_values_vanish_exactly(fixture_mapping, separable_mapping, x, z):
    for f in (fixture_mapping, separable_mapping):
        assert float(f(0.0, z)[0]) == 0.0
        assert float(f(x, 0.0)[0]) == 0.0


def test_fixture_mapping_value(fixture_mapping):
    assert float(fixture_mapping(1.5, 0.5)[0]) == pytest.approx(
        0.01 * 1.5 ** 3 * 0.5 ** 3, rel=1e-15
    )
    assert float(fixture_mapping(-1.0, 2.0)[0]) == pytest.approx(-0.08, rel=1e-15)


def test_separable_mapping_value(separable_mapping):
    assert float(separable_mapping(2.0, 3.0)[0]) == 18.0
    assert float(separable_mapping(-0.5, 2.0)[0]) == -2.0


def test_separable_core_validates_shapes(line):
    bad = Mapping(line, line, core=CoreSpec(kind="separable", a_coeffs=(1.0, 2.0), q_matrix=((1.0,),)))
    with pytest.raises(StructuralError):
        bad(1.0, 1.0)


@given(x=dyadic, y=dyadic, z=dyadic, w=dyadic)
def test_separable_residual_is_four_y_b_z_w(separable_mapping, x, y, z, w):
    # For f(x, z) = x z^2 the identity residual is exactly 4 y (z . w): the
    # separable product is not a solution of the full equation.
    assert defect(separable_mapping, x, y, z, w) == abs(4.0 * y * z * w)


@given(x=dyadic, z=dyadic)
def test_defect_substitution_doubles_second_slot(separable_mapping, line, x, z):
    # y = 0, w = z turns the defect into ||f(x, 2z) - 4 f(x, z)||.
    f = separable_mapping
    lhs = defect(f, x, 0.0, z, z)
    rhs = norm_eval(line, f(x, 2.0 * z) - 4.0 * f(x, z))
    assert lhs == rhs


@given(x=dyadic, z=dyadic)
def test_defect_substitution_doubles_first_slot(separable_mapping, line, x, z):
    # y = x, w = 0 turns the defect into ||f(2x, z) - 2 f(x, z)||.
    f = separable_mapping
    lhs = defect(f, x, x, z, 0.0)
    rhs = norm_eval(line, f(2.0 * x, z) - 2.0 * f(x, z))
    assert lhs == rhs


@given(x=dyadic, y=dyadic, z=dyadic, w=dyadic)
def test_defect_parity_for_odd_linear_core(separable_mapping, x, y, z, w):
    assert defect(separable_mapping, x, y, z, w) == defect(separable_mapping, x, -y, z, -w)


@given(x=dyadic, y=dyadic, z=dyadic, w=dyadic)
def test_defect_matches_scalar_reference(fixture_mapping, x, y, z, w):
    def g(u, v):
        return 0.01 * u ** 3 * v ** 3

    expected = naive.scalar_defect(g, x, y, z, w)
    assert defect(fixture_mapping, x, y, z, w) == pytest.approx(expected, rel=1e-9, abs=1e-12)


def test_oscillatory_perturbation_formula(line):
    f = Mapping(
        line,
        line,
        perturbation=PerturbationSpec(
            kind="oscillatory", amplitude=0.5, first_exp=2.0, second_exp=1.0, freq=3.0
        ),
    )
    x, z = 1.5, -0.75
    expected = 0.5 * sgnpow(x, 2.0) * sgnpow(z, 1.0) * math.cos(3.0 * x * z)
    assert float(f(x, z)[0]) == pytest.approx(expected, rel=1e-15)
    assert float(f(0.0, z)[0]) == 0.0


def test_table_perturbation_roundtrip(tmp_path, line):
    path = tmp_path / "table.csv"
    path.write_text(
        "x,z,value\n0.0,0.0,0.0\n0.0,1.0,2.0\n1.0,0.0,4.0\n1.0,1.0,6.0\n",
        encoding="utf-8",
    )
    table = perturbation_from_csv(path)
    assert isinstance(table, InterpolationTable)
    assert table.interpolate(0.0, 1.0) == 2.0
    assert table.interpolate(1.0, 1.0) == 6.0
    assert table.interpolate(0.5, 0.5) == 3.0
    assert table.interpolate(5.0, 0.5) == 0.0
    f = Mapping(
        line,
        line,
        perturbation=PerturbationSpec(kind="table", amplitude=2.0, table=table),
    )
    assert float(f(0.5, 0.5)[0]) == 6.0


def test_table_csv_validation(tmp_path):
    bad_columns = tmp_path / "cols.csv"
    bad_columns.write_text("a,b,c\n1,2,3\n", encoding="utf-8")
    with pytest.raises(ConfigError):
        perturbation_from_csv(bad_columns)
    missing = tmp_path / "missing.csv"
    missing.write_text("x,z,value\n0,0,1\n0,1,2\n1,0,3\n", encoding="utf-8")
    with pytest.raises(ConfigError):
        perturbation_from_csv(missing)


def test_perturbation_spec_validation():
    with pytest.raises(ConfigError):
        PerturbationSpec(kind="sideways")
    with pytest.raises(ConfigError):
        PerturbationSpec(kind="table", table=None, amplitude=1.0)


def test_admissibility_of_the_calibrated_fixture(fixture_mapping, phi_r3, grid):
    entry = admissibility_check(
        fixture_mapping, lambda u, v: phi_eval(phi_r3, u, v), grid.tuples
    )
    assert entry.status == PASS
    assert entry.margin >= 0.0


def test_admissibility_violation_carries_a_witness(line, phi_r3, grid):
    loud = Mapping(
        line,
        line,
        perturbation=PerturbationSpec(
            kind="power_product", amplitude=50.0, first_exp=3.0, second_exp=3.0
        ),
    )
    entry = admissibility_check(loud, lambda u, v: phi_eval(phi_r3, u, v), grid.tuples)
    assert entry.status == FAIL
    assert entry.margin < 0.0
    assert entry.witness is not None


def test_calibrate_amplitude_brackets_the_budget(line, phi_r3, grid):
    budget = lambda u, v: phi_eval(phi_r3, u, v)
    f = Mapping(
        line,
        line,
        perturbation=PerturbationSpec(
            kind="power_product", amplitude=0.01, first_exp=3.0, second_exp=3.0
        ),
    )
    best = calibrate_amplitude(f, budget, grid.tuples)
    assert best >= 0.01
    calibrated = Mapping(
        line,
        line,
        perturbation=PerturbationSpec(
            kind="power_product", amplitude=best, first_exp=3.0, second_exp=3.0
        ),
    )
    assert admissibility_check(calibrated, budget, grid.tuples).status == PASS
    too_loud = Mapping(
        line,
        line,
        perturbation=PerturbationSpec(
            kind="power_product", amplitude=best * 1.01, first_exp=3.0, second_exp=3.0
        ),
    )
    assert admissibility_check(too_loud, budget, grid.tuples).status == FAIL


def test_calibrate_amplitude_rejects_inadmissible_core(line, grid):
    tiny = ControlFunction(space=line, theta=1e-8, r=3.0)
    f = Mapping(
        line,
        line,
        core=CoreSpec(kind="separable", a_coeffs=(1.0,), q_matrix=((1.0,),)),
        perturbation=PerturbationSpec(kind="power_product", amplitude=0.0),
    )
    with pytest.raises(CalibrationError):
        calibrate_amplitude(f, lambda u, v: phi_eval(tiny, u, v), grid.tuples)


def test_overflowing_mapping_raises_numeric_error(line):
    f = Mapping(
        line,
        line,
        perturbation=PerturbationSpec(
            kind="power_product", amplitude=1.0, first_exp=1.0, second_exp=1.0
        ),
    )
    with pytest.raises(NumericError):
        f(1e300, 1e300)
