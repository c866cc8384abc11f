"""Direct-method extraction of the approximating mapping via scaled dyadic iterates.

Each extraction route follows one argument slot of f with the matching scaling:

* additive-halving:   s_k = 2^k f(x / 2^k, z)
* quadratic-halving:  s_k = 4^k f(x, z / 2^k)
* additive-doubling:  s_k = f(2^k x, z) / 2^k
* quadratic-doubling: s_k = f(x, 2^k z) / 4^k

For an admissible f (defect at most phi(x, y) phi(z, w)) the consecutive gaps
are majorized by explicit products of phi values; summing those step bounds
gives a Cauchy estimate for any gap ||s_l - s_m|| and, in the limit, an
analytic bound on the distance to the extracted limit.  Convergence verdicts
use both the observed gaps and the analytic tail: observed-only stopping can
be fooled by slow geometric rates, and the analytic majorant is available.

The route identifiers are shared with the series of :mod:`aqstab.control`:
route "additive-halving" is certified by the series of the same name.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .control import (ADDITIVE_DOUBLING, ADDITIVE_HALVING, QUADRATIC_DOUBLING,
                      QUADRATIC_HALVING, SERIES_IDS, ControlFunction, phi_eval,
                      power_term_ratio, series_eval)
from .errors import InputError
from .reporting import FAIL, PASS, REFUSED, AuditEntry
from .spaces import as_vector, norm_value

ROUTES = SERIES_IDS
HALVING = "halving"
DOUBLING = "doubling"
FAMILY_ROUTES = {
    HALVING: (ADDITIVE_HALVING, QUADRATIC_HALVING),
    DOUBLING: (ADDITIVE_DOUBLING, QUADRATIC_DOUBLING),
}

CONVERGED = "converged"
DIVERGED = "diverged"
UNDECIDED = "undecided"

#: Consecutive small observed gaps required before the verdict may be converged.
_SMALL_GAP_STREAK = 3
#: Consecutive growth steps of the iterate magnitude before declaring divergence.
_GROWTH_STREAK = 5
_GROWTH_SLACK = 1e-9


def family_of(route: str) -> str:
    if route in FAMILY_ROUTES[HALVING]:
        return HALVING
    if route in FAMILY_ROUTES[DOUBLING]:
        return DOUBLING
    raise InputError(f"unknown extraction route {route!r}")


@dataclass(frozen=True)
class ScaledMapping:
    """Lazy view of a route's k-th scaled iterate of a base mapping.

    Also serves as the k-fold application of the route's scaling operator, so
    the fixed-point iteration and the direct iteration share one object.
    """

    base: object
    route: str
    depth: int = 1

    def __post_init__(self):
        if self.route not in ROUTES:
            raise InputError(f"unknown extraction route {self.route!r}")
        if self.depth < 0:
            raise InputError(f"depth must be >= 0, got {self.depth}")

    @property
    def space_x(self):
        return self.base.space_x

    @property
    def space_y(self):
        return self.base.space_y

    def __call__(self, x, z) -> np.ndarray:
        return scaled_iterate_value(self.base, self.route, self.depth, x, z)


def scaled_iterate_value(f, route: str, k: int, x, z) -> np.ndarray:
    """Value of the route's k-th scaled iterate s_k at (x, z)."""
    xv = as_vector(f.space_x, x)
    zv = as_vector(f.space_x, z)
    if route == ADDITIVE_HALVING:
        return 2.0 ** k * f(xv / 2.0 ** k, zv)
    if route == QUADRATIC_HALVING:
        return 4.0 ** k * f(xv, zv / 2.0 ** k)
    if route == ADDITIVE_DOUBLING:
        return f(2.0 ** k * xv, zv) / 2.0 ** k
    if route == QUADRATIC_DOUBLING:
        return f(xv, 2.0 ** k * zv) / 4.0 ** k
    raise InputError(f"unknown extraction route {route!r}")


def step_bound(phi: ControlFunction, beta: float, route: str, j: int, x, z) -> float:
    """Analytic majorant of the j-th consecutive gap ||s_(j+1) - s_j|| at (x, z).

    additive-halving:   2^(j b)      phi(x/2^(j+1), x/2^(j+1)) phi(z, 0)
    quadratic-halving:  4^(j b)      phi(x, 0) phi(z/2^(j+1), z/2^(j+1))
    additive-doubling:  2^(-(j+1) b) phi(2^j x, 2^j x) phi(z, 0)
    quadratic-doubling: 4^(-(j+1) b) phi(x, 0) phi(2^j z, 2^j z)
    """
    xv = as_vector(phi.space, x)
    zv = as_vector(phi.space, z)
    zero = np.zeros(phi.space.dimension)
    if route == ADDITIVE_HALVING:
        u = xv / 2.0 ** (j + 1)
        return 2.0 ** (j * beta) * phi_eval(phi, u, u) * phi_eval(phi, zv, zero)
    if route == QUADRATIC_HALVING:
        u = zv / 2.0 ** (j + 1)
        return 4.0 ** (j * beta) * phi_eval(phi, xv, zero) * phi_eval(phi, u, u)
    if route == ADDITIVE_DOUBLING:
        u = 2.0 ** j * xv
        return 2.0 ** (-(j + 1) * beta) * phi_eval(phi, u, u) * phi_eval(phi, zv, zero)
    if route == QUADRATIC_DOUBLING:
        u = 2.0 ** j * zv
        return 4.0 ** (-(j + 1) * beta) * phi_eval(phi, xv, zero) * phi_eval(phi, u, u)
    raise InputError(f"unknown extraction route {route!r}")


def _series_tail_from(phi: ControlFunction, beta: float, route: str, l: int,
                      x: np.ndarray, z: np.ndarray, tol: float, max_terms: int) -> float:
    """Upper bound for the full tail sum_(j>=l) of step bounds, via the
    shifted-argument identity that folds the tail back into the route series."""
    zero = np.zeros(phi.space.dimension)
    if route == ADDITIVE_HALVING:
        u = x / 2.0 ** l
        res = series_eval(phi, u, u, route, beta, tol, max_terms)
        outer = 2.0 ** (l * beta) * phi_eval(phi, z, zero)
    elif route == QUADRATIC_HALVING:
        u = z / 2.0 ** l
        res = series_eval(phi, u, u, route, beta, tol, max_terms)
        outer = 4.0 ** (l * beta) * phi_eval(phi, x, zero)
    elif route == ADDITIVE_DOUBLING:
        u = 2.0 ** l * x
        res = series_eval(phi, u, u, route, beta, tol, max_terms)
        outer = 2.0 ** (-l * beta) * phi_eval(phi, z, zero)
    else:
        u = 2.0 ** l * z
        res = series_eval(phi, u, u, route, beta, tol, max_terms)
        outer = 4.0 ** (-l * beta) * phi_eval(phi, x, zero)
    if not res.converged:
        return math.inf
    return outer * (res.value + res.tail_bound)


def cauchy_gap_bound(phi: ControlFunction, beta: float, route: str, l: int,
                     m: int | None, x, z, tol: float = 1e-12,
                     max_terms: int = 2000) -> float:
    """Analytic bound for ||s_l - s_m||; m = None bounds the distance to the limit.

    The finite case is the exact partial sum of step bounds from l to m - 1.
    The infinite case folds the tail into the matching series and includes
    that series' own certified tail, so the result is a genuine upper bound.
    """
    if l < 0 or (m is not None and m <= l):
        raise InputError(f"need 0 <= l < m, got l={l}, m={m}")
    if m is not None:
        return sum(step_bound(phi, beta, route, j, x, z) for j in range(l, m))
    xv = as_vector(phi.space, x)
    zv = as_vector(phi.space, z)
    return _series_tail_from(phi, beta, route, l, xv, zv, tol, max_terms)


@dataclass
class ExtractionTrace:
    """Full record of one extraction run at a single sample point."""

    route: str
    x: np.ndarray
    z: np.ndarray
    iterates: list
    gaps: list
    step_bounds: list
    tail_bounds: list
    verdict: str
    limit: np.ndarray | None
    k_stop: int

    @property
    def last_gap(self) -> float:
        return self.gaps[-1] if self.gaps else 0.0

    @property
    def last_tail(self) -> float:
        return self.tail_bounds[-1] if self.tail_bounds else math.inf


def _tail_factor(phi: ControlFunction, beta: float, route: str) -> float | None:
    """Geometric factor rho with step bounds b_(j+1) <= rho b_j, when licensed."""
    if phi.kind == "power":
        return power_term_ratio(phi.r, beta, route)
    return phi.claimed_ratio


def extract(f, phi: ControlFunction, beta: float, x, z, route: str,
            tol: float = 1e-10, k_max: int = 60) -> ExtractionTrace:
    """Run one extraction route at (x, z) and return the full trace.

    Converged requires both three consecutive observed gaps at most
    tol * max(1, ||s_k||) and the analytic tail bound at k at most tol.
    Diverged on a non-finite iterate (scaling overflow) or on the iterate
    magnitude growing for five consecutive steps.  Otherwise undecided at
    k_max.  The limit is the last iterate, never an extrapolation.
    """
    if tol <= 0.0:
        raise InputError(f"tolerance must be positive, got {tol!r}")
    xv = as_vector(f.space_x, x)
    zv = as_vector(f.space_x, z)
    rho = _tail_factor(phi, beta, route)

    iterates: list = []
    gaps: list = []
    bounds: list = []
    tails: list = []
    small_streak = 0
    growth_streak = 0
    prev_norm = 0.0
    b_prev = 0.0
    verdict = UNDECIDED
    k_stop = k_max

    for k in range(k_max + 1):
        s_k = scaled_iterate_value(f, route, k, xv, zv)
        if not np.all(np.isfinite(s_k)):
            verdict = DIVERGED
            k_stop = k
            break
        iterates.append(s_k)
        n_k = norm_value(f.space_y, s_k)

        b_k = step_bound(phi, beta, route, k, xv, zv)
        if rho is not None and rho < 1.0:
            tail_k = b_k / (1.0 - rho)
        elif b_k == 0.0:
            tail_k = 0.0
        else:
            tail_k = math.inf
        tails.append(tail_k)

        if k > 0:
            gap = norm_value(f.space_y, s_k - iterates[k - 1])
            gaps.append(gap)
            bounds.append(b_prev)
            if gap <= tol * max(1.0, n_k):
                small_streak += 1
            else:
                small_streak = 0
            if n_k > max(prev_norm * (1.0 + _GROWTH_SLACK), tol):
                growth_streak += 1
            else:
                growth_streak = 0

        if small_streak >= _SMALL_GAP_STREAK and tail_k <= tol:
            verdict = CONVERGED
            k_stop = k
            break
        if growth_streak >= _GROWTH_STREAK:
            verdict = DIVERGED
            k_stop = k
            break
        prev_norm = n_k
        b_prev = b_k

    limit = iterates[-1] if (verdict == CONVERGED and iterates) else None
    return ExtractionTrace(route, xv, zv, iterates, gaps, bounds, tails,
                           verdict, limit, k_stop)


def verify_gap_domination(trace: ExtractionTrace, space_y) -> tuple[bool, float, object, int]:
    """Check ||s_l - s_m|| <= sum of recorded step bounds for every pair l < m.

    Returns (ok, worst_excess, witness_pair, pairs_checked).  The prefix sums
    of the recorded per-step bounds reproduce the finite Cauchy estimates
    exactly, so no re-evaluation of phi is needed.
    """
    n = len(trace.iterates)
    prefix = [0.0]
    for b in trace.step_bounds:
        prefix.append(prefix[-1] + b)
    worst = 0.0
    witness = None
    checked = 0
    for l in range(n - 1):
        for m in range(l + 1, n):
            observed = norm_value(space_y, trace.iterates[m] - trace.iterates[l])
            allowed = prefix[m] - prefix[l]
            checked += 1
            excess = observed - allowed
            if excess > worst:
                worst = excess
                witness = (l, m, observed, allowed)
    return worst <= 0.0, worst, witness, checked


def extract_family(f, phi: ControlFunction, beta: float, samples, family: str,
                   tol: float = 1e-10, k_max: int = 60, id_prefix: str = ""):
    """Extract both routes of a family on all samples and reconcile the limits.

    Returns (limits, entries, traces): limits is a list of per-sample limit
    vectors (the first route's, once agreement is established) or None when
    reconciliation is refused or fails; entries is the report fragment; traces
    holds every per-point trace in deterministic route-major order.
    """
    if family not in FAMILY_ROUTES:
        raise InputError(f"unknown extraction family {family!r}")
    route_a, route_b = FAMILY_ROUTES[family]
    samples = [(as_vector(f.space_x, x), as_vector(f.space_x, z)) for x, z in samples]
    if not samples:
        raise InputError("extraction needs at least one sample point")

    traces = {route: [extract(f, phi, beta, x, z, route, tol, k_max)
                      for x, z in samples]
              for route in (route_a, route_b)}
    all_traces = traces[route_a] + traces[route_b]

    failures = [(t.route, t.x, t.z, t.verdict)
                for t in all_traces if t.verdict != CONVERGED]
    check_id = id_prefix + f"reconcile-{family}"
    if failures:
        route, x, z, verdict = failures[0]
        entry = AuditEntry(
            check_id=check_id,
            status=REFUSED,
            witness={"route": route, "point": [x, z], "verdict": verdict},
            values={"unconverged": len(failures), "samples": len(samples)},
            notes="reconciliation refused: not every route converged on every sample",
        )
        return None, [entry], all_traces

    worst = -math.inf
    witness = None
    for (x, z), ta, tb in zip(samples, traces[route_a], traces[route_b]):
        dev = norm_value(f.space_y, ta.limit - tb.limit)
        if dev > worst:
            worst = dev
            witness = {"point": [x, z], "deviation": dev}
    status = PASS if worst <= tol else FAIL
    entry = AuditEntry(
        check_id=check_id,
        status=status,
        margin=tol - worst,
        witness=witness,
        values={"max_route_deviation": worst, "samples": len(samples)},
    )
    limits = [t.limit for t in traces[route_a]] if status == PASS else None
    return limits, [entry], all_traces


def rassias_calibration(g, p_exp: float, eps: float, x_samples,
                        tol: float = 1e-10, n_max: int = 200,
                        id_prefix: str = "") -> tuple[list[AuditEntry], dict]:
    """Single-variable additive calibration case with the classical bound.

    For g with g(0) = 0 and additive defect at most eps (|x|^p + |y|^p),
    extracts T(x) = lim 2^(-n) g(2^n x) and verifies
    |g(x) - T(x)| <= (2 eps / (2 - 2^p)) |x|^p on the samples.  Also reports
    the measured tightness factor |g - T| / (eps |x|^p) against the worst-case
    factor 2 / (2 - 2^p).
    """
    if not (p_exp < 1.0):
        raise InputError(f"exponent must be < 1, got {p_exp!r}")
    if eps < 0.0:
        raise InputError(f"defect level must be >= 0, got {eps!r}")
    if abs(float(g(0.0))) != 0.0:
        raise InputError("calibration requires g(0) = 0")
    xs = [float(x) for x in x_samples]
    if not xs:
        raise InputError("need at least one sample")

    ratio = 2.0 ** (p_exp - 1.0)
    coeff = 2.0 * eps / (2.0 - 2.0 ** p_exp)
    limits = {}
    worst_tail = 0.0
    worst_n = 0
    converged_all = True
    for x in xs:
        t_n = float(g(x))
        n_used = 0
        for n in range(1, n_max + 1):
            t_next = float(g(2.0 ** n * x)) / 2.0 ** n
            n_used = n
            if t_next == t_n:
                break
            t_n = t_next
            tail = eps * abs(x) ** p_exp * ratio ** n / (1.0 - ratio)
            if tail <= tol * max(1.0, abs(t_n)):
                break
        else:
            converged_all = False
        final_tail = eps * abs(x) ** p_exp * ratio ** n_used / (1.0 - ratio) if x != 0.0 else 0.0
        worst_tail = max(worst_tail, final_tail)
        worst_n = max(worst_n, n_used)
        limits[x] = t_n

    entries = [AuditEntry(
        check_id=id_prefix + "rassias-extraction",
        status=PASS if converged_all else FAIL,
        margin=tol - worst_tail if converged_all else -math.inf,
        values={"samples": len(xs), "max_iterations": worst_n,
                "worst_tail_bound": worst_tail},
    )]

    min_slack = math.inf
    bound_witness = None
    tight = 0.0
    tight_witness = None
    for x in xs:
        measured = abs(float(g(x)) - limits[x])
        allowed = coeff * abs(x) ** p_exp
        slack = allowed - measured
        if slack < min_slack:
            min_slack = slack
            bound_witness = {"point": x, "measured": measured, "bound": allowed}
        if x != 0.0 and eps > 0.0:
            factor = measured / (eps * abs(x) ** p_exp)
            if factor > tight:
                tight = factor
                tight_witness = {"point": x, "factor": factor}
    entries.append(AuditEntry(
        check_id=id_prefix + "rassias-bound",
        status=PASS if min_slack >= 0.0 else FAIL,
        margin=min_slack,
        witness=bound_witness,
        values={"coefficient": coeff},
    ))
    entries.append(AuditEntry(
        check_id=id_prefix + "rassias-tight-factor",
        status=PASS,
        margin=2.0 / (2.0 - 2.0 ** p_exp) - tight,
        witness=tight_witness,
        values={"measured_factor": tight,
                "theorem_factor": 2.0 / (2.0 - 2.0 ** p_exp)},
    ))
    return entries, limits
