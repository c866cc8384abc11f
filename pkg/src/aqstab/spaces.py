"""Finite-dimensional model spaces: beta-homogeneous F-norms, quasi-norms, p-norms.

Three norm laws are supported on coordinate vectors v of a fixed dimension:

* ``beta_homogeneous``: ||v|| = m(v)^beta where m is the Euclidean magnitude
  (plain absolute value in dimension one).  Satisfies ||t v|| = |t|^beta ||v||
  and the plain triangle inequality for beta in (0, 1].
* ``quasi``: an l_q coordinate law (sum |v_i|^q)^(1/q) with q chosen so that the
  declared modulus C is attained on basis-vector pairs, q = 1/(1 + log2 C).
  Homogeneous of degree one; triangle inequality holds with constant C.
* ``p_norm``: the l_p law (sum |v_i|^p)^(1/p) for p in (0, 1], which is
  p-subadditive: ||x+y||^p <= ||x||^p + ||y||^p.

``induce_fnorm_from_pnorm`` wraps a p-norm space so that the induced norm is
literally the p-th power of the original norm (hence exactly equal to it
pointwise raised to p), turning a p-norm into a p-homogeneous F-norm.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, ContractError, InputError, StructuralError
from .reporting import FAIL, PASS, AuditEntry

BETA_HOMOGENEOUS = "beta_homogeneous"
QUASI = "quasi"
P_NORM = "p_norm"
KINDS = (BETA_HOMOGENEOUS, QUASI, P_NORM)

#: Null sequences must drop by at least this factor over the sampled prefix
#: for the convergence axioms (the checker works on finite prefixes only).
NULL_TREND_FACTOR = 1e-3

#: Fixed scalars used when turning scalar null sequences into vector ones.
_AUX_SCALARS = (0.5, 2.0)


@dataclass(frozen=True)
class SpaceSpec:
    """A model space: dimension plus the norm law and its parameters.

    ``power_base``/``power`` represent a derived space whose norm is a fixed
    power of another space's norm; it is produced by
    :func:`induce_fnorm_from_pnorm` and is never read from configuration.
    """

    dimension: int
    kind: str = BETA_HOMOGENEOUS
    beta: float = 1.0
    quasi_constant: float = 1.0
    p_exponent: float = 1.0
    power_base: "SpaceSpec | None" = None
    power: float = 1.0

    def __post_init__(self):
        if not isinstance(self.dimension, int) or self.dimension < 1:
            raise StructuralError(f"dimension must be a positive integer, got {self.dimension!r}")
        if self.kind not in KINDS:
            raise ConfigError(f"unknown norm kind {self.kind!r}")
        if not (0.0 < self.beta <= 1.0) or not math.isfinite(self.beta):
            raise InputError(f"beta must lie in (0, 1], got {self.beta!r}")
        if not (self.quasi_constant >= 1.0) or not math.isfinite(self.quasi_constant):
            raise InputError(f"quasi constant must be >= 1, got {self.quasi_constant!r}")
        if not (0.0 < self.p_exponent <= 1.0) or not math.isfinite(self.p_exponent):
            raise InputError(f"p exponent must lie in (0, 1], got {self.p_exponent!r}")


def as_vector(space: SpaceSpec, v) -> np.ndarray:
    """Validate and coerce ``v`` to a float vector of the space's dimension."""
    if isinstance(v, np.ndarray) and v.dtype == np.float64:
        arr = v
    else:
        arr = np.atleast_1d(np.asarray(v, dtype=float))
    if arr.shape != (space.dimension,):
        raise StructuralError(
            f"expected a vector of dimension {space.dimension}, got shape {arr.shape}"
        )
    if arr.shape[0] == 1:
        if not math.isfinite(arr[0]):
            raise InputError(f"non-finite coordinate in {arr!r}")
    elif not np.isfinite(arr).all():
        raise InputError(f"non-finite coordinate in {arr!r}")
    return arr


def zero_vector(space: SpaceSpec) -> np.ndarray:
    return np.zeros(space.dimension)


def _coord_magnitude(arr: np.ndarray, q: float) -> float:
    # Dimension one reduces to |v| exactly under every l_q law.
    if arr.shape[0] == 1:
        return abs(float(arr[0]))
    if q == 2.0:
        return float(np.sqrt(np.sum(arr * arr)))
    return float(np.sum(np.abs(arr) ** q) ** (1.0 / q))


def norm_value(space: SpaceSpec, arr: np.ndarray) -> float:
    """Norm of an already-validated vector (fast path for inner loops)."""
    if space.power_base is not None:
        return norm_value(space.power_base, arr) ** space.power
    if space.kind == BETA_HOMOGENEOUS:
        return _coord_magnitude(arr, 2.0) ** space.beta
    if space.kind == QUASI:
        return _coord_magnitude(arr, aoki_rolewicz_exponent(space.quasi_constant))
    return _coord_magnitude(arr, space.p_exponent)


def norm_eval(space: SpaceSpec, v) -> float:
    """Evaluate the space's norm at ``v``."""
    return norm_value(space, as_vector(space, v))


def aoki_rolewicz_exponent(quasi_constant: float) -> float:
    """Exponent p = 1/(1 + log2 C) of the p-norm equivalent to a C-quasi-norm.

    Strictly decreasing in C, with C = 1 mapped to p = 1.
    """
    if not math.isfinite(quasi_constant) or quasi_constant < 1.0:
        raise InputError(f"quasi constant must be >= 1, got {quasi_constant!r}")
    return 1.0 / (1.0 + math.log2(quasi_constant))


def induce_fnorm_from_pnorm(space: SpaceSpec) -> SpaceSpec:
    """Turn a p-norm space into the p-homogeneous F-norm space with norm ||.||^p.

    The induced norm is computed as the literal p-th power of the base norm,
    so ``norm(induced, v) == norm(base, v) ** p`` holds exactly, pointwise.
    """
    if space.kind != P_NORM:
        raise ContractError(f"expected a p_norm space, got kind {space.kind!r}")
    p = space.p_exponent
    return SpaceSpec(
        dimension=space.dimension,
        kind=BETA_HOMOGENEOUS,
        beta=p,
        power_base=space,
        power=p,
    )


def quasi_constant_estimate(space: SpaceSpec, samples) -> float:
    """Largest sampled ratio ||x+y|| / (||x|| + ||y||) over unordered pairs.

    A lower estimate of the true modulus of concavity; monotone nondecreasing
    in the sample set.  Pairs with ||x|| + ||y|| = 0 are skipped.
    """
    vecs = [as_vector(space, v) for v in samples]
    if not vecs:
        raise InputError("need at least one sample vector")
    best = None
    for i, x in enumerate(vecs):
        nx = norm_value(space, x)
        for y in vecs[i:]:
            denom = nx + norm_value(space, y)
            if denom == 0.0:
                continue
            ratio = norm_value(space, x + y) / denom
            if best is None or ratio > best:
                best = ratio
    if best is None:
        raise InputError("all sample pairs are degenerate (zero norms)")
    return best


def check_beta_homogeneity(space: SpaceSpec, samples, scalars, tol: float = 1e-12,
                           id_prefix: str = "") -> AuditEntry:
    """Check ||t v|| = |t|^beta ||v|| on all sampled (t, v) pairs.

    The comparison is scaled: deviations up to ``tol * (1 + ||v||)`` pass.
    """
    if space.kind != BETA_HOMOGENEOUS:
        raise ContractError(f"homogeneity check requires a beta_homogeneous space, got {space.kind!r}")
    vecs = [as_vector(space, v) for v in samples]
    if not vecs or not scalars:
        raise InputError("need nonempty samples and scalars")
    worst_dev = 0.0
    min_slack = math.inf
    witness = None
    for v in vecs:
        nv = norm_value(space, v)
        allowed = tol * (1.0 + nv)
        for t in scalars:
            t = float(t)
            if not math.isfinite(t):
                raise InputError(f"non-finite scalar {t!r}")
            dev = abs(norm_value(space, t * v) - abs(t) ** space.beta * nv)
            slack = allowed - dev
            if slack < min_slack:
                min_slack = slack
                witness = {"point": v, "scalar": t, "deviation": dev}
            worst_dev = max(worst_dev, dev)
    status = PASS if min_slack >= 0.0 else FAIL
    return AuditEntry(
        check_id=id_prefix + "beta-homogeneity",
        status=status,
        margin=min_slack,
        witness=witness,
        values={"worst_deviation": worst_dev, "beta": space.beta, "samples": len(vecs)},
    )


def _null_trend(values) -> float:
    """Worst-case decay ratio last/first of a finite prefix meant to tend to 0."""
    first, last = values[0], values[-1]
    if first == 0.0:
        return 0.0 if last == 0.0 else math.inf
    return last / first


def check_fnorm_axioms(space: SpaceSpec, samples, scalar_sequences, tol: float = 1e-12,
                       id_prefix: str = "") -> list[AuditEntry]:
    """Empirically check the six F-norm axioms on the sampled data.

    Axioms: (1) ||x|| = 0 iff x = 0, (2) ||l x|| = ||x|| for |l| = 1,
    (3) triangle inequality, (4)-(6) null-sequence continuity.  The first three
    are checked with scaled tolerance ``tol``; the last three work on the
    finite prefixes of the provided scalar null sequences and require the
    normed sequence to drop by :data:`NULL_TREND_FACTOR` over the prefix.
    """
    vecs = [as_vector(space, v) for v in samples]
    if not vecs:
        raise InputError("need at least one sample vector")
    if not scalar_sequences:
        raise InputError("need at least one scalar null sequence")
    entries = []

    # Axiom 1: definiteness.
    n_zero = norm_value(space, zero_vector(space))
    min_nonzero = math.inf
    nz_witness = None
    for v in vecs:
        if not v.any():
            continue
        nv = norm_value(space, v)
        if nv < min_nonzero:
            min_nonzero = nv
            nz_witness = v
    ok = n_zero <= tol and (min_nonzero == math.inf or min_nonzero > 0.0)
    margin = min(tol - n_zero, min_nonzero if min_nonzero != math.inf else tol)
    entries.append(AuditEntry(
        check_id=id_prefix + "axiom-definiteness",
        status=PASS if ok else FAIL,
        margin=margin,
        witness=None if ok else {"point": nz_witness, "norm_at_zero": n_zero},
        values={"norm_at_zero": n_zero,
                "min_nonzero_norm": min_nonzero if min_nonzero != math.inf else None},
    ))

    # Axiom 2: invariance under unimodular scalars (real case: -1 and +1).
    min_slack = math.inf
    worst = 0.0
    witness = None
    for v in vecs:
        nv = norm_value(space, v)
        dev = abs(norm_value(space, -v) - nv)
        slack = tol * (1.0 + nv) - dev
        if slack < min_slack:
            min_slack, witness = slack, {"point": v, "deviation": dev}
        worst = max(worst, dev)
    entries.append(AuditEntry(
        check_id=id_prefix + "axiom-unimodular",
        status=PASS if min_slack >= 0.0 else FAIL,
        margin=min_slack,
        witness=witness if min_slack < 0.0 else None,
        values={"worst_deviation": worst},
    ))

    # Axiom 3: triangle inequality over all sample pairs.
    min_slack = math.inf
    worst = 0.0
    witness = None
    for i, x in enumerate(vecs):
        nx = norm_value(space, x)
        for y in vecs[i:]:
            ny = norm_value(space, y)
            dev = norm_value(space, x + y) - nx - ny
            slack = tol * (1.0 + nx + ny) - dev
            if slack < min_slack:
                min_slack = slack
                witness = {"pair": [x, y], "violation": dev}
            worst = max(worst, dev)
    entries.append(AuditEntry(
        check_id=id_prefix + "axiom-triangle",
        status=PASS if min_slack >= 0.0 else FAIL,
        margin=min_slack,
        witness=witness,
        values={"worst_violation": worst},
    ))

    # Axioms 4-6: null-sequence continuity on finite prefixes.
    trends = {"axiom-scalar-null": 0.0, "axiom-vector-null": 0.0, "axiom-joint-null": 0.0}
    trend_witness = {k: None for k in trends}
    for seq_idx, seq in enumerate(scalar_sequences):
        seq = [float(t) for t in seq]
        if len(seq) < 2:
            raise InputError("null sequences need at least two terms")
        for v in vecs:
            if not v.any():
                continue
            # (4) fixed x, scalars -> 0
            vals = [norm_value(space, t * v) for t in seq]
            r = _null_trend(vals)
            if r > trends["axiom-scalar-null"]:
                trends["axiom-scalar-null"] = r
                trend_witness["axiom-scalar-null"] = {"sequence": seq_idx, "point": v}
            # (5) fixed scalar, vectors x_n = t_n v -> 0
            for lam in _AUX_SCALARS:
                vals = [norm_value(space, lam * (t * v)) for t in seq]
                r = _null_trend(vals)
                if r > trends["axiom-vector-null"]:
                    trends["axiom-vector-null"] = r
                    trend_witness["axiom-vector-null"] = {"sequence": seq_idx, "point": v, "scalar": lam}
            # (6) scalars and vectors tend to 0 jointly
            vals = [norm_value(space, t * (t * v)) for t in seq]
            r = _null_trend(vals)
            if r > trends["axiom-joint-null"]:
                trends["axiom-joint-null"] = r
                trend_witness["axiom-joint-null"] = {"sequence": seq_idx, "point": v}
    for name, worst_ratio in trends.items():
        margin = NULL_TREND_FACTOR - worst_ratio
        entries.append(AuditEntry(
            check_id=id_prefix + name,
            status=PASS if margin >= 0.0 else FAIL,
            margin=margin,
            witness=trend_witness[name] if margin < 0.0 else None,
            values={"worst_prefix_ratio": worst_ratio, "required": NULL_TREND_FACTOR},
        ))
    return entries


def space_to_config(space: SpaceSpec) -> dict:
    """Serialize to the JSON configuration keys (dimension, kind, beta, C, p)."""
    if space.power_base is not None:
        raise ContractError("derived power-of-norm spaces are not serializable")
    return {
        "dimension": space.dimension,
        "kind": space.kind,
        "beta": space.beta,
        "C": space.quasi_constant,
        "p": space.p_exponent,
    }


def space_from_config(data: dict) -> SpaceSpec:
    if not isinstance(data, dict):
        raise ConfigError(f"space spec must be an object, got {type(data).__name__}")
    allowed = {"dimension", "kind", "beta", "C", "p"}
    unknown = set(data) - allowed
    if unknown:
        raise ConfigError(f"unknown space keys: {sorted(unknown)}")
    if "dimension" not in data or "kind" not in data:
        raise ConfigError("space spec requires 'dimension' and 'kind'")
    try:
        return SpaceSpec(
            dimension=int(data["dimension"]),
            kind=data["kind"],
            beta=float(data.get("beta", 1.0)),
            quasi_constant=float(data.get("C", 1.0)),
            p_exponent=float(data.get("p", 1.0)),
        )
    except (InputError, StructuralError) as exc:
        raise ConfigError(str(exc)) from exc
