"""Independent reference computations for the test suite.

Everything in this file is a literal transcription of the defining formulas,
written with plain loops and without importing the package, so the tests can
compare library output against a second, independent opinion.
"""

import math

ADDITIVE_HALVING = "additive-halving"
QUADRATIC_HALVING = "quadratic-halving"
ADDITIVE_DOUBLING = "additive-doubling"
QUADRATIC_DOUBLING = "quadratic-doubling"

HALVING = (ADDITIVE_HALVING, QUADRATIC_HALVING)
DOUBLING = (ADDITIVE_DOUBLING, QUADRATIC_DOUBLING)


def power_phi(theta, r, nx, ny):
    """Power control evaluated on two norm values."""
    return math.sqrt(theta) * (nx ** r + ny ** r)


def term_ratio(r, beta, series_id):
    """Exact one-step ratio of consecutive terms of the named series."""
    if series_id == ADDITIVE_HALVING:
        return 2.0 ** (beta * (1.0 - r))
    if series_id == QUADRATIC_HALVING:
        return 2.0 ** (beta * (2.0 - r))
    if series_id == ADDITIVE_DOUBLING:
        return 2.0 ** (beta * (r - 1.0))
    if series_id == QUADRATIC_DOUBLING:
        return 2.0 ** (beta * (r - 2.0))
    raise ValueError(series_id)


def series_partial(series_id, theta, r, beta, nx, ny, terms):
    """Plain-loop partial sum of the named series at given argument norms.

    Halving series: sum over j >= 1 of base^((j-1) beta) phi(x/2^j, y/2^j).
    Doubling series: sum over j >= 0 of base^(-(j+1) beta) phi(2^j x, 2^j y).
    The base is 2 for additive slots and 4 for quadratic slots; scaling a
    vector by s scales a beta-homogeneous norm by s^beta.
    """
    base = 2.0 if series_id.startswith("additive") else 4.0
    total = 0.0
    if series_id in HALVING:
        for j in range(1, terms + 1):
            s = 0.5 ** (j * beta)
            total += base ** ((j - 1) * beta) * power_phi(theta, r, s * nx, s * ny)
    else:
        for j in range(terms):
            s = 2.0 ** (j * beta)
            total += base ** (-(j + 1) * beta) * power_phi(theta, r, s * nx, s * ny)
    return total


def series_closed(series_id, theta, r, beta, nx, ny):
    """Closed form of the full series for a power control (inf if divergent)."""
    phi0 = power_phi(theta, r, nx, ny)
    ratio = term_ratio(r, beta, series_id)
    if ratio >= 1.0:
        return math.inf if phi0 > 0.0 else 0.0
    if series_id in HALVING:
        first = 2.0 ** (-beta * r) * phi0
    elif series_id == ADDITIVE_DOUBLING:
        first = 2.0 ** (-beta) * phi0
    else:
        first = 4.0 ** (-beta) * phi0
    return first / (1.0 - ratio)


def scalar_defect(g, x, y, z, w, beta=1.0):
    """Defect of a scalar bivariate g under the 1-dimensional |.|^beta norm."""
    val = g(x + y, z + w) + g(x - y, z - w) - 2.0 * g(x, z) - 2.0 * g(x, w)
    return abs(val) ** beta
