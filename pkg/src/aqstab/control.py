"""Control functions and the four majorant series driving the stability bounds.

A control function phi(x, y) >= 0 measures how far the additive-quadratic
identity is allowed to fail at a pair of arguments (the defect budget is the
product phi(x, y) phi(z, w)).  The ``power`` kind is
phi(x, y) = sqrt(theta) (||x||^r + ||y||^r), so that the product budget is
linear in theta; the ``custom`` kind wraps a caller callable, optionally with
a claimed geometric decay ratio that licenses tail estimates.

Each extraction route has a companion series in one argument slot.  With b the
homogeneity degree of the norms (written beta elsewhere):

* additive-halving:   sum_{j>=1} 2^((j-1) b) phi(x / 2^j, y / 2^j)
* quadratic-halving:  sum_{j>=1} 4^((j-1) b) phi(x / 2^j, y / 2^j)
* additive-doubling:  sum_{j>=0} 2^(-(j+1) b) phi(2^j x, 2^j y)
* quadratic-doubling: sum_{j>=0} 4^(-(j+1) b) phi(2^j x, 2^j y)

For power controls the terms form a geometric progression and the policies
below (convergence tests, tail bounds, closed-form coefficients) are exact.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ContractError, InputError
from .spaces import SpaceSpec, as_vector, norm_value

POWER = "power"
CUSTOM = "custom"

ADDITIVE_HALVING = "additive-halving"
QUADRATIC_HALVING = "quadratic-halving"
ADDITIVE_DOUBLING = "additive-doubling"
QUADRATIC_DOUBLING = "quadratic-doubling"
SERIES_IDS = (ADDITIVE_HALVING, QUADRATIC_HALVING, ADDITIVE_DOUBLING, QUADRATIC_DOUBLING)
HALVING_IDS = (ADDITIVE_HALVING, QUADRATIC_HALVING)
DOUBLING_IDS = (ADDITIVE_DOUBLING, QUADRATIC_DOUBLING)

#: Per-term weight base: 2 for the additive series, 4 for the quadratic ones.
_WEIGHT_BASE = {
    ADDITIVE_HALVING: 2.0,
    QUADRATIC_HALVING: 4.0,
    ADDITIVE_DOUBLING: 2.0,
    QUADRATIC_DOUBLING: 4.0,
}

#: Consecutive non-shrinking term ratios before a series is declared divergent.
_DIVERGENCE_STREAK = 8
#: Consecutive exactly-zero terms before the remaining tail is taken as zero.
_ZERO_STREAK = 8
_RATIO_SLACK = 1e-9


@dataclass(frozen=True)
class ControlFunction:
    """A nonnegative control phi on pairs of vectors from ``space``."""

    space: SpaceSpec
    kind: str = POWER
    theta: float = 1.0
    r: float = 3.0
    func: object = None
    claimed_ratio: float | None = None

    def __post_init__(self):
        if self.kind not in (POWER, CUSTOM):
            raise InputError(f"unknown control kind {self.kind!r}")
        if self.kind == POWER:
            if not math.isfinite(self.theta) or self.theta < 0.0:
                raise InputError(f"theta must be finite and >= 0, got {self.theta!r}")
            if not math.isfinite(self.r):
                raise InputError(f"exponent r must be finite, got {self.r!r}")
        else:
            if not callable(self.func):
                raise ContractError("custom controls require a callable 'func'")
            if self.claimed_ratio is not None and not (0.0 < self.claimed_ratio < 1.0):
                raise InputError(f"claimed ratio must lie in (0, 1), got {self.claimed_ratio!r}")


def phi_eval(phi: ControlFunction, x, y) -> float:
    """Evaluate the control at a pair of vectors; must be nonnegative."""
    xv = as_vector(phi.space, x)
    yv = as_vector(phi.space, y)
    if phi.kind == POWER:
        return math.sqrt(phi.theta) * (norm_value(phi.space, xv) ** phi.r
                                       + norm_value(phi.space, yv) ** phi.r)
    value = float(phi.func(xv, yv))
    if math.isnan(value) or value < 0.0:
        raise ContractError(f"custom control returned {value!r} at ({xv!r}, {yv!r})")
    return value


@dataclass(frozen=True)
class SeriesResult:
    """Outcome of a truncated series evaluation with an explicit tail bound."""

    series_id: str
    value: float
    terms_used: int
    tail_bound: float
    converged: bool


def _term(phi: ControlFunction, x: np.ndarray, y: np.ndarray, series_id: str,
          beta: float, j: int) -> float:
    base = _WEIGHT_BASE[series_id]
    if series_id in HALVING_IDS:
        scale = 0.5 ** j
        exponent = (j - 1) * beta
    else:
        scale = 2.0 ** j
        exponent = -(j + 1) * beta
    value = phi_eval(phi, scale * x, scale * y)
    if value == 0.0:
        return 0.0
    try:
        weight = base ** exponent
    except OverflowError:
        weight = math.inf
    return weight * value


def series_eval(phi: ControlFunction, x, y, series_id: str, beta: float,
                tol: float = 1e-12, max_terms: int = 2000) -> SeriesResult:
    """Sum the named majorant series at (x, y) with a certified stopping rule.

    For power controls the term ratio is the exact constant
    :func:`power_term_ratio` and the geometric tail estimate
    ``t * rho / (1 - rho)`` is included in ``tail_bound``.  For custom controls
    a claimed ratio (if given) plays the same role; otherwise the sum is never
    reported as converged and ``tail_bound`` is infinite.
    """
    if series_id not in SERIES_IDS:
        raise InputError(f"unknown series id {series_id!r}")
    xv = as_vector(phi.space, x)
    yv = as_vector(phi.space, y)
    if max_terms < 1:
        raise InputError(f"max_terms must be >= 1, got {max_terms}")

    if phi.kind == POWER:
        known_ratio = power_term_ratio(phi.r, beta, series_id)
    else:
        known_ratio = phi.claimed_ratio

    start = 1 if series_id in HALVING_IDS else 0
    partial = 0.0
    prev_term = None
    rise_streak = 0
    zero_streak = 0
    terms = 0
    for j in range(start, start + max_terms):
        t = _term(phi, xv, yv, series_id, beta, j)
        terms = j - start + 1
        if not math.isfinite(t) or not math.isfinite(partial + t):
            return SeriesResult(series_id, math.inf, terms, math.inf, False)
        partial += t

        if t == 0.0:
            zero_streak += 1
            # A run of exact zeros certifies the tail only under a licensed
            # decay law (power scaling or a claimed ratio); an unlicensed
            # custom control could revive at deeper scales.
            if zero_streak >= _ZERO_STREAK and (phi.kind == POWER or known_ratio is not None):
                return SeriesResult(series_id, partial, terms, 0.0, True)
            prev_term = t
            continue
        zero_streak = 0

        if known_ratio is not None:
            rho = known_ratio
            if rho >= 1.0:
                return SeriesResult(series_id, math.inf, terms, math.inf, False)
            tail = t * rho / (1.0 - rho)
            if tail <= tol * max(1.0, partial):
                return SeriesResult(series_id, partial, terms, tail, True)
        else:
            # No licensed decay rate: watch measured ratios for divergence only.
            if prev_term is not None and prev_term > 0.0:
                if t / prev_term >= 1.0 - _RATIO_SLACK:
                    rise_streak += 1
                    if rise_streak >= _DIVERGENCE_STREAK:
                        return SeriesResult(series_id, math.inf, terms, math.inf, False)
                else:
                    rise_streak = 0
        prev_term = t

    tail = math.inf
    if known_ratio is not None and known_ratio < 1.0 and prev_term is not None:
        tail = prev_term * known_ratio / (1.0 - known_ratio)
    return SeriesResult(series_id, partial, terms, tail,
                        known_ratio is not None and known_ratio < 1.0)


def power_term_ratio(r: float, beta: float, series_id: str) -> float:
    """Exact ratio of consecutive series terms for a power control.

    additive-halving: 2^(b (1 - r));  quadratic-halving: 2^(b (2 - r));
    additive-doubling: 2^(b (r - 1)); quadratic-doubling: 2^(b (r - 2)).
    """
    if series_id == ADDITIVE_HALVING:
        return 2.0 ** (beta * (1.0 - r))
    if series_id == QUADRATIC_HALVING:
        return 2.0 ** (beta * (2.0 - r))
    if series_id == ADDITIVE_DOUBLING:
        return 2.0 ** (beta * (r - 1.0))
    if series_id == QUADRATIC_DOUBLING:
        return 2.0 ** (beta * (r - 2.0))
    raise InputError(f"unknown series id {series_id!r}")


def power_series_coefficient(r: float, beta: float, series_id: str) -> float | None:
    """Closed-form value of the series for phi = ||x||^r + ||y||^r at ||x|| = ||y|| = 1.

    Equivalently, the multiplier c with series = c * phi(x, y) for power
    controls (any theta), valid on the series' convergence range:

    * additive-halving (r > 1):    1 / (2^(b r) - 2^b)
    * quadratic-halving (r > 2):   1 / (2^(b r) - 4^b)
    * additive-doubling (r < 1):   1 / (2^b - 2^(b r))
    * quadratic-doubling (r < 2):  1 / (4^b - 2^(b r))

    Returns None outside the convergence range.
    """
    if power_term_ratio(r, beta, series_id) >= 1.0:
        return None
    if series_id == ADDITIVE_HALVING:
        return 1.0 / (2.0 ** (beta * r) - 2.0 ** beta)
    if series_id == QUADRATIC_HALVING:
        return 1.0 / (2.0 ** (beta * r) - 4.0 ** beta)
    if series_id == ADDITIVE_DOUBLING:
        return 1.0 / (2.0 ** beta - 2.0 ** (beta * r))
    return 1.0 / (4.0 ** beta - 2.0 ** (beta * r))


def _condition_ratios(phi: ControlFunction, beta: float, samples, family: str):
    """Yield (ratio, pair) with ratio the per-step contraction the condition demands.

    halving: phi(x/2, y/2) <= (L / 4^b) phi(x, y)   -> ratio = 4^b phi(x/2, y/2) / phi(x, y)
    doubling: phi(x, y) <= 2^b L phi(x/2, y/2)      -> ratio = phi(x, y) / (2^b phi(x/2, y/2))
    """
    four_b = 4.0 ** beta
    two_b = 2.0 ** beta
    for x, y in samples:
        xv = as_vector(phi.space, x)
        yv = as_vector(phi.space, y)
        full = phi_eval(phi, xv, yv)
        half = phi_eval(phi, 0.5 * xv, 0.5 * yv)
        if family == "halving":
            if full == 0.0:
                if half == 0.0:
                    continue
                yield math.inf, (xv, yv)
            else:
                yield four_b * half / full, (xv, yv)
        else:
            if half == 0.0:
                if full == 0.0:
                    continue
                yield math.inf, (xv, yv)
            else:
                yield full / (two_b * half), (xv, yv)


def _check_condition(phi: ControlFunction, beta: float, lipschitz: float, samples,
                     family: str):
    if not (0.0 < lipschitz < 1.0):
        raise InputError(f"Lipschitz constant must lie in (0, 1), got {lipschitz!r}")
    worst = 0.0
    witness = None
    seen = False
    for ratio, pair in _condition_ratios(phi, beta, samples, family):
        seen = True
        if ratio > worst:
            worst = ratio
            witness = pair
    ok = (not seen) or worst <= lipschitz
    return ok, worst, witness, seen


def check_halving_condition(phi: ControlFunction, beta: float, lipschitz: float,
                            samples) -> tuple[bool, float, object]:
    """Test phi(x/2, y/2) <= (L / 4^beta) phi(x, y) over the sample pairs.

    Returns (holds, worst_ratio, witness).  Pairs where both sides vanish are
    skipped; an all-skipped sample set passes vacuously with ratio 0.
    """
    ok, worst, witness, _ = _check_condition(phi, beta, lipschitz, samples, "halving")
    return ok, worst, witness


def check_doubling_condition(phi: ControlFunction, beta: float, lipschitz: float,
                             samples) -> tuple[bool, float, object]:
    """Test phi(x, y) <= 2^beta L phi(x/2, y/2) over the sample pairs."""
    ok, worst, witness, _ = _check_condition(phi, beta, lipschitz, samples, "doubling")
    return ok, worst, witness


def smallest_lipschitz(phi: ControlFunction, beta: float, samples, family: str) -> float:
    """Smallest L for which the named step condition holds on the samples.

    This is the sampled supremum of the per-pair ratios; it may be >= 1
    (condition unsatisfiable on the samples) or 0 (vacuous).  For power
    controls it equals :func:`power_term_ratio` of the matching series.
    """
    if family not in ("halving", "doubling"):
        raise InputError(f"unknown condition family {family!r}")
    worst = 0.0
    for ratio, _ in _condition_ratios(phi, beta, samples, family):
        worst = max(worst, ratio)
    return worst
