"""Test mappings: structured cores plus controlled perturbations.

The identity under study, for f : X x X -> Y, is

    f(x + y, z + w) + f(x - y, z - w) - 2 f(x, z) - 2 f(x, w) = 0.

Solutions that vanish on the axes are additive in the first slot and
quadratic in the second, and chasing the two scalings through the identity
collapses the family to the zero mapping alone.  The ``separable`` core
a(x) q(z) carries exactly the slot-wise structure but is not a solution: its
residual in the identity has the closed form 4 (a . y) B(z, w), with B the
polar form of q.  That makes separable cores the natural probes for the
structure checks, while calibrated perturbations produce mappings with small
but nonzero defect for the extraction pipelines.

All mappings here vanish when either slot is zero (perturbations
short-circuit on the axes), matching the axis conditions under which the
stability theory operates.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

from .errors import (CalibrationError, ConfigError, ContractError, InputError,
                     NumericError, StructuralError)
from .reporting import FAIL, PASS, AuditEntry
from .spaces import SpaceSpec, as_vector, norm_value, zero_vector

ZERO = "zero"
SEPARABLE = "separable"
CUSTOM = "custom"
CORE_KINDS = (ZERO, SEPARABLE, CUSTOM)

POWER_PRODUCT = "power_product"
OSCILLATORY = "oscillatory"
TABLE = "table"
PERTURBATION_KINDS = (POWER_PRODUCT, OSCILLATORY, TABLE)


def sgnpow(t: float, e: float) -> float:
    """Signed power sgn(t) |t|^e, the odd extension of t^e to the real line."""
    if t == 0.0:
        return 0.0
    return math.copysign(abs(t) ** e, t)


@dataclass(frozen=True)
class CoreSpec:
    """Structured part of a mapping.

    ``separable`` sends (x, z) to (a . x)(z^T Q z) placed on the first basis
    vector of the target: additive in the first slot, quadratic in the
    second, with identity residual 4 (a . y)(z^T Q w).  ``zero`` is the zero
    mapping, the identity's only axis-vanishing solution.  ``custom`` wraps an
    arbitrary callable (x, z) -> target vector.
    """

    kind: str = ZERO
    a_coeffs: tuple = ()
    q_matrix: tuple = ()
    func: object = None

    def __post_init__(self):
        if self.kind not in CORE_KINDS:
            raise ConfigError(f"unknown core kind {self.kind!r}")
        if self.kind == CUSTOM and not callable(self.func):
            raise ContractError("custom cores require a callable 'func'")


@dataclass(frozen=True)
class PerturbationSpec:
    """Additive disturbance g(x, z), evaluated on the first coordinates.

    * ``power_product``: amplitude * sgnpow(x_1, first_exp) * sgnpow(z_1, second_exp)
    * ``oscillatory``:   amplitude * sgnpow(x_1, first_exp) * sgnpow(z_1, second_exp) * cos(freq x_1 z_1)
    * ``table``:         amplitude * bilinear interpolation of a sampled grid

    All three vanish whenever x = 0 or z = 0 (the table is forced to zero
    outside its grid and the mapping short-circuits on the axes), keeping the
    perturbed mapping admissible.
    """

    kind: str = POWER_PRODUCT
    amplitude: float = 0.0
    first_exp: float = 1.0
    second_exp: float = 2.0
    freq: float = 1.0
    table: object = None

    def __post_init__(self):
        if self.kind not in PERTURBATION_KINDS:
            raise ConfigError(f"unknown perturbation kind {self.kind!r}")
        if not math.isfinite(self.amplitude):
            raise InputError(f"amplitude must be finite, got {self.amplitude!r}")
        if self.kind == POWER_PRODUCT:
            if self.first_exp < 0.0 or self.second_exp < 0.0:
                raise InputError("power-product exponents must be >= 0")
        if self.kind == TABLE and self.table is None:
            raise ConfigError("table perturbations require a loaded table")


@dataclass(frozen=True)
class InterpolationTable:
    """Uniform grid of perturbation values with bilinear interpolation."""

    x_grid: tuple
    z_grid: tuple
    values: tuple  # row-major, len(x_grid) rows by len(z_grid) columns

    def interpolate(self, x1: float, z1: float) -> float:
        xs = np.asarray(self.x_grid)
        zs = np.asarray(self.z_grid)
        if not (xs[0] <= x1 <= xs[-1] and zs[0] <= z1 <= zs[-1]):
            return 0.0
        vals = np.asarray(self.values).reshape(len(xs), len(zs))
        i = min(int(np.searchsorted(xs, x1, side="right")) - 1, len(xs) - 2)
        j = min(int(np.searchsorted(zs, z1, side="right")) - 1, len(zs) - 2)
        i = max(i, 0)
        j = max(j, 0)
        tx = (x1 - xs[i]) / (xs[i + 1] - xs[i])
        tz = (z1 - zs[j]) / (zs[j + 1] - zs[j])
        return float((1 - tx) * (1 - tz) * vals[i, j]
                     + tx * (1 - tz) * vals[i + 1, j]
                     + (1 - tx) * tz * vals[i, j + 1]
                     + tx * tz * vals[i + 1, j + 1])


def perturbation_from_csv(path) -> InterpolationTable:
    """Load a table perturbation from a CSV file with columns x, z, value.

    The (x, z) pairs must form a complete rectangular grid.
    """
    points = {}
    with open(path, newline="") as handle:
        reader = csv.DictReader(handle)
        if reader.fieldnames is None or set(reader.fieldnames) != {"x", "z", "value"}:
            raise ConfigError(f"perturbation table {path} needs columns x, z, value")
        for row in reader:
            try:
                points[(float(row["x"]), float(row["z"]))] = float(row["value"])
            except (TypeError, ValueError) as exc:
                raise ConfigError(f"bad row in perturbation table {path}: {row!r}") from exc
    if not points:
        raise ConfigError(f"perturbation table {path} is empty")
    xs = sorted({k[0] for k in points})
    zs = sorted({k[1] for k in points})
    if len(xs) < 2 or len(zs) < 2:
        raise ConfigError("perturbation table needs at least a 2 x 2 grid")
    values = []
    for x in xs:
        for z in zs:
            if (x, z) not in points:
                raise ConfigError(f"perturbation table is missing grid point ({x}, {z})")
            values.append(points[(x, z)])
    return InterpolationTable(tuple(xs), tuple(zs), tuple(values))


@dataclass(frozen=True)
class Mapping:
    """A mapping f : X x X -> Y built from a core plus a perturbation."""

    space_x: SpaceSpec
    space_y: SpaceSpec
    core: CoreSpec = CoreSpec()
    perturbation: PerturbationSpec | None = None

    def _core_value(self, x: np.ndarray, z: np.ndarray) -> np.ndarray:
        if self.core.kind == ZERO:
            return zero_vector(self.space_y)
        if self.core.kind == SEPARABLE:
            a = np.asarray(self.core.a_coeffs, dtype=float)
            q = np.asarray(self.core.q_matrix, dtype=float)
            if a.shape != (self.space_x.dimension,):
                raise StructuralError(
                    f"linear coefficients have shape {a.shape}, expected ({self.space_x.dimension},)")
            if q.shape != (self.space_x.dimension, self.space_x.dimension):
                raise StructuralError(
                    f"quadratic form has shape {q.shape}, expected square of dimension {self.space_x.dimension}")
            out = zero_vector(self.space_y)
            out[0] = float(a @ x) * float(z @ q @ z)
            return out
        return as_vector(self.space_y, self.core.func(x, z))

    def _perturbation_value(self, x: np.ndarray, z: np.ndarray) -> np.ndarray:
        pert = self.perturbation
        out = zero_vector(self.space_y)
        if pert is None or pert.amplitude == 0.0:
            return out
        x1 = float(x[0])
        z1 = float(z[0])
        if pert.kind == POWER_PRODUCT:
            value = pert.amplitude * sgnpow(x1, pert.first_exp) * sgnpow(z1, pert.second_exp)
        elif pert.kind == OSCILLATORY:
            value = (pert.amplitude * sgnpow(x1, pert.first_exp)
                     * sgnpow(z1, pert.second_exp)
                     * math.cos(pert.freq * x1 * z1))
        else:
            value = pert.amplitude * pert.table.interpolate(x1, z1)
        out[0] = value
        return out

    def __call__(self, x, z) -> np.ndarray:
        xv = as_vector(self.space_x, x)
        zv = as_vector(self.space_x, z)
        # Exact vanishing on the axes: every solution of the identity has it,
        # and keeping it exact (not merely approximate) preserves admissibility.
        if not xv.any() or not zv.any():
            return zero_vector(self.space_y)
        value = self._core_value(xv, zv) + self._perturbation_value(xv, zv)
        finite = (math.isfinite(value[0]) if value.shape[0] == 1
                  else bool(np.isfinite(value).all()))
        if not finite:
            raise NumericError(f"mapping produced non-finite value at ({xv!r}, {zv!r})",
                               point=(xv, zv))
        return value


def defect(mapping: Mapping, x, y, z, w) -> float:
    """Target-norm size of the identity residual at (x, y, z, w)."""
    xv = as_vector(mapping.space_x, x)
    yv = as_vector(mapping.space_x, y)
    zv = as_vector(mapping.space_x, z)
    wv = as_vector(mapping.space_x, w)
    residual = (mapping(xv + yv, zv + wv) + mapping(xv - yv, zv - wv)
                - 2.0 * mapping(xv, zv) - 2.0 * mapping(xv, wv))
    return norm_value(mapping.space_y, residual)


def admissibility_check(mapping: Mapping, phi, tuples, tol: float = 0.0,
                        id_prefix: str = "") -> AuditEntry:
    """Check defect(x, y, z, w) <= phi(x, y) * phi(z, w) over sampled tuples.

    ``phi`` is called as phi(u, v) -> float.  The entry's margin is the
    smallest slack; the witness is the first tuple attaining it.
    """
    min_slack = math.inf
    witness = None
    worst_excess = 0.0
    count = 0
    for x, y, z, w in tuples:
        count += 1
        lhs = defect(mapping, x, y, z, w)
        rhs = phi(x, y) * phi(z, w)
        slack = rhs + tol * max(1.0, rhs) - lhs
        if slack < min_slack:
            min_slack = slack
            witness = {"tuple": [x, y, z, w], "defect": lhs, "budget": rhs}
        worst_excess = max(worst_excess, lhs - rhs)
    if count == 0:
        raise InputError("admissibility check needs at least one tuple")
    status = PASS if min_slack >= 0.0 else FAIL
    return AuditEntry(
        check_id=id_prefix + "admissibility",
        status=status,
        margin=min_slack,
        witness=witness,
        values={"tuples": count, "worst_excess": worst_excess},
    )


def calibrate_amplitude(mapping: Mapping, phi, tuples, id_prefix: str = "") -> float:
    """Largest perturbation amplitude keeping the mapping admissible on the tuples.

    Deterministic: doubles an upper bracket from max(|amplitude|, 1) until the
    budget is violated (capped at 2^60), then runs 100 bisection steps and
    returns the admissible lower end.  Raises CalibrationError when the core
    alone (amplitude zero) already violates the budget.
    """
    tuples = list(tuples)

    def admissible(amplitude: float) -> bool:
        candidate = Mapping(
            mapping.space_x, mapping.space_y, mapping.core,
            _with_amplitude(mapping.perturbation, amplitude))
        for x, y, z, w in tuples:
            if defect(candidate, x, y, z, w) > phi(x, y) * phi(z, w):
                return False
        return True

    if not admissible(0.0):
        raise CalibrationError("core mapping alone violates the control budget")
    lo = 0.0
    hi = max(abs(mapping.perturbation.amplitude), 1.0)
    doublings = 0
    while admissible(hi):
        lo = hi
        hi *= 2.0
        doublings += 1
        if doublings > 60:
            return lo
    for _ in range(100):
        mid = 0.5 * (lo + hi)
        if admissible(mid):
            lo = mid
        else:
            hi = mid
    return lo


def _with_amplitude(pert: PerturbationSpec, amplitude: float) -> PerturbationSpec:
    return PerturbationSpec(kind=pert.kind, amplitude=amplitude,
                            first_exp=pert.first_exp, second_exp=pert.second_exp,
                            freq=pert.freq, table=pert.table)
