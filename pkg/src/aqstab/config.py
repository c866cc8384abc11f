"""JSON experiment configs: strict parsing into validated runtime objects.

A config is a single JSON object with a ``version`` field.  Unknown keys are
rejected at every level rather than silently ignored, so a typo surfaces as a
config error (exit code 3) instead of a misleadingly clean run.  Paths inside
a config (the table-perturbation CSV) resolve relative to the config file.

Only constructs that round-trip through JSON are accepted here: power-type
control functions and the declarative mapping cores.  Custom callables remain
available through the library API.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

from .control import POWER, ControlFunction
from .errors import ConfigError
from .mappings import (CoreSpec, Mapping, PerturbationSpec, TABLE,
                       perturbation_from_csv)
from .sampling import SampleSpec
from .spaces import BETA_HOMOGENEOUS, SpaceSpec, space_from_config

CONFIG_VERSION = 1

DIRECT_HALVING = "direct_halving"
DIRECT_DOUBLING = "direct_doubling"
FIXPOINT_HALVING = "fixpoint_halving"
FIXPOINT_DOUBLING = "fixpoint_doubling"
CLAIMS = "claims"
ALL = "all"

METHOD_NAMES = (DIRECT_HALVING, DIRECT_DOUBLING, FIXPOINT_HALVING,
                FIXPOINT_DOUBLING, CLAIMS)

DEFAULT_SWEEP_GRID = (0.5, 0.9, 1.1, 1.5, 2.5, 3.0)


@dataclass(frozen=True)
class Tolerances:
    """Per-stage tolerances; each stage reads exactly one of these."""

    identity: float = 1e-12
    series: float = 1e-12
    extraction: float = 1e-10
    fixpoint: float = 1e-10
    consistency: float = 1e-10


@dataclass(frozen=True)
class RunLimits:
    """Hard iteration ceilings for the unbounded loops."""

    k_max: int = 60
    n_max: int = 60
    max_terms: int = 2000


@dataclass(frozen=True)
class ExperimentConfig:
    """Fully validated experiment description."""

    label: str
    space_x: SpaceSpec
    space_y: SpaceSpec
    phi: ControlFunction
    mapping: Mapping
    methods: tuple
    samples: SampleSpec
    tolerances: Tolerances
    limits: RunLimits
    lipschitz: float | None
    sweep_grid: tuple


def _require_keys(section: dict, allowed: set, required: set, where: str) -> None:
    if not isinstance(section, dict):
        raise ConfigError(f"{where} must be a JSON object")
    unknown = set(section) - allowed
    if unknown:
        raise ConfigError(f"unknown keys in {where}: {sorted(unknown)}")
    missing = required - set(section)
    if missing:
        raise ConfigError(f"missing keys in {where}: {sorted(missing)}")


def _number(section: dict, key: str, where: str, default=None) -> float:
    value = section.get(key, default)
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{where}.{key} must be a number, got {value!r}")
    if not math.isfinite(value):
        raise ConfigError(f"{where}.{key} must be finite, got {value!r}")
    return float(value)


def _integer(section: dict, key: str, where: str, default=None) -> int:
    value = section.get(key, default)
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(f"{where}.{key} must be an integer, got {value!r}")
    return value


def _parse_spaces(section) -> tuple:
    _require_keys(section, {"X", "Y"}, {"X", "Y"}, "spaces")
    try:
        space_x = space_from_config(section["X"])
        space_y = space_from_config(section["Y"])
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"invalid space config: {exc}") from exc
    return space_x, space_y


def _parse_phi(section, space_x: SpaceSpec) -> ControlFunction:
    _require_keys(section, {"kind", "theta", "r"}, {"kind"}, "phi")
    if section["kind"] != POWER:
        raise ConfigError(
            f"config phi kind must be {POWER!r} (custom control functions "
            f"are library-only), got {section['kind']!r}")
    theta = _number(section, "theta", "phi", default=1.0)
    r = _number(section, "r", "phi", default=3.0)
    try:
        return ControlFunction(space=space_x, kind=POWER, theta=theta, r=r)
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"invalid phi config: {exc}") from exc


def _parse_core(section) -> CoreSpec:
    _require_keys(section, {"kind", "a_coeffs", "q_matrix"}, {"kind"},
                  "mapping.core")
    kind = section["kind"]
    if kind == "custom":
        raise ConfigError("custom cores are library-only, not configurable")
    a_coeffs = tuple(section.get("a_coeffs", ()))
    q_matrix = tuple(tuple(row) for row in section.get("q_matrix", ()))
    if kind == "separable" and (not a_coeffs or not q_matrix):
        raise ConfigError("separable cores need a_coeffs and q_matrix")
    try:
        return CoreSpec(kind=kind, a_coeffs=a_coeffs, q_matrix=q_matrix)
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"invalid core config: {exc}") from exc


def _parse_perturbation(section, base_dir: Path) -> PerturbationSpec | None:
    if section is None:
        return None
    allowed = {"kind", "amplitude", "first_exp", "second_exp", "freq", "path"}
    _require_keys(section, allowed, {"kind"}, "mapping.perturbation")
    kind = section["kind"]
    table = None
    if kind == TABLE:
        if "path" not in section:
            raise ConfigError("table perturbations need mapping.perturbation.path")
        table = perturbation_from_csv(base_dir / section["path"])
    elif "path" in section:
        raise ConfigError("mapping.perturbation.path only applies to table kind")
    try:
        return PerturbationSpec(
            kind=kind,
            amplitude=_number(section, "amplitude", "mapping.perturbation", 0.0),
            first_exp=_number(section, "first_exp", "mapping.perturbation", 1.0),
            second_exp=_number(section, "second_exp", "mapping.perturbation", 2.0),
            freq=_number(section, "freq", "mapping.perturbation", 1.0),
            table=table,
        )
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"invalid perturbation config: {exc}") from exc


def _parse_mapping(section, space_x: SpaceSpec, space_y: SpaceSpec,
                   base_dir: Path) -> Mapping:
    if section is None:
        section = {"core": {"kind": "zero"}}
    _require_keys(section, {"core", "perturbation"}, {"core"}, "mapping")
    core = _parse_core(section["core"])
    pert = _parse_perturbation(section.get("perturbation"), base_dir)
    try:
        return Mapping(space_x=space_x, space_y=space_y, core=core,
                       perturbation=pert)
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"invalid mapping config: {exc}") from exc


def _parse_methods(raw) -> tuple:
    if raw is None:
        raw = [ALL]
    if isinstance(raw, str):
        raw = [raw]
    if not isinstance(raw, list) or not all(isinstance(m, str) for m in raw):
        raise ConfigError("method must be a string or a list of strings")
    methods = []
    for name in raw:
        if name == ALL:
            expansion = METHOD_NAMES
        elif name in METHOD_NAMES:
            expansion = (name,)
        else:
            raise ConfigError(
                f"unknown method {name!r}; choose from "
                f"{sorted(METHOD_NAMES + (ALL,))}")
        for m in expansion:
            if m not in methods:
                methods.append(m)
    if not methods:
        raise ConfigError("method list must not be empty")
    return tuple(methods)


def _parse_samples(section) -> SampleSpec:
    if section is None:
        section = {}
    allowed = {"extent", "dyadic_depth", "random_count", "seed"}
    _require_keys(section, allowed, set(), "samples")
    seed = section.get("seed")
    if seed is not None and (isinstance(seed, bool) or not isinstance(seed, int)):
        raise ConfigError(f"samples.seed must be an integer, got {seed!r}")
    try:
        return SampleSpec(
            extent=_number(section, "extent", "samples", 2.0),
            dyadic_depth=_integer(section, "dyadic_depth", "samples", 3),
            random_count=_integer(section, "random_count", "samples", 0),
            seed=seed,
        )
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"invalid samples config: {exc}") from exc


def _parse_tolerances(section) -> Tolerances:
    if section is None:
        section = {}
    fields = {"identity", "series", "extraction", "fixpoint", "consistency"}
    _require_keys(section, fields, set(), "tolerances")
    values = {}
    for name in sorted(fields):
        values[name] = _number(section, name, "tolerances",
                               getattr(Tolerances, name))
        if values[name] <= 0.0:
            raise ConfigError(f"tolerances.{name} must be positive")
    return Tolerances(**values)


def _parse_limits(section) -> RunLimits:
    if section is None:
        section = {}
    fields = {"k_max", "n_max", "max_terms"}
    _require_keys(section, fields, set(), "limits")
    values = {}
    for name in sorted(fields):
        values[name] = _integer(section, name, "limits", getattr(RunLimits, name))
        if values[name] < 1:
            raise ConfigError(f"limits.{name} must be at least 1")
    return RunLimits(**values)


def _parse_sweep(section) -> tuple:
    if section is None:
        return DEFAULT_SWEEP_GRID
    _require_keys(section, {"r_values"}, {"r_values"}, "sweep")
    raw = section["r_values"]
    if not isinstance(raw, list):
        raise ConfigError("sweep.r_values must be a list of numbers")
    values = []
    for i, value in enumerate(raw):
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"sweep.r_values[{i}] must be a number")
        if not (math.isfinite(value) and value > 0.0):
            raise ConfigError(f"sweep.r_values[{i}] must be positive and finite")
        values.append(float(value))
    return tuple(values)


def parse_config(data: dict, base_dir=".") -> ExperimentConfig:
    """Validate a decoded JSON object and build the runtime config."""
    base_dir = Path(base_dir)
    allowed = {"version", "label", "spaces", "phi", "mapping", "method",
               "samples", "tolerances", "limits", "lipschitz", "sweep"}
    _require_keys(data, allowed, {"version", "spaces", "phi"}, "config")
    if data["version"] != CONFIG_VERSION:
        raise ConfigError(
            f"unsupported config version {data['version']!r}; "
            f"expected {CONFIG_VERSION}")
    label = data.get("label", "")
    if not isinstance(label, str):
        raise ConfigError(f"label must be a string, got {label!r}")
    space_x, space_y = _parse_spaces(data["spaces"])
    phi = _parse_phi(data["phi"], space_x)
    mapping = _parse_mapping(data.get("mapping"), space_x, space_y, base_dir)
    lipschitz = data.get("lipschitz")
    if lipschitz is not None:
        if isinstance(lipschitz, bool) or not isinstance(lipschitz, (int, float)):
            raise ConfigError(f"lipschitz must be a number or null, got {lipschitz!r}")
        if not (0.0 < lipschitz < 1.0):
            raise ConfigError(f"lipschitz must lie in (0, 1), got {lipschitz!r}")
        lipschitz = float(lipschitz)
    return ExperimentConfig(
        label=label,
        space_x=space_x,
        space_y=space_y,
        phi=phi,
        mapping=mapping,
        methods=_parse_methods(data.get("method")),
        samples=_parse_samples(data.get("samples")),
        tolerances=_parse_tolerances(data.get("tolerances")),
        limits=_parse_limits(data.get("limits")),
        lipschitz=lipschitz,
        sweep_grid=_parse_sweep(data.get("sweep")),
    )


def load_config(path) -> ExperimentConfig:
    """Read and validate a JSON config file."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError(f"config {path} must contain a JSON object")
    return parse_config(data, base_dir=path.parent)


def shared_beta(cfg: ExperimentConfig) -> float:
    """The common homogeneity degree of both spaces, or a config error.

    Every stage beyond the axiom checks scales arguments in X and reads norms
    in Y with one beta; the theory's constants are only meaningful when the
    two agree.  Quasi-normed and p-normed spaces should first be renormed
    (see spaces.induce_fnorm_from_pnorm) into the homogeneous form.
    """
    for name, space in (("X", cfg.space_x), ("Y", cfg.space_y)):
        if space.kind != BETA_HOMOGENEOUS:
            raise ConfigError(
                f"space {name} has kind {space.kind!r}; series and extraction "
                "stages need beta-homogeneous norms (renorm first)")
    if cfg.space_x.beta != cfg.space_y.beta:
        raise ConfigError(
            f"spaces disagree on beta ({cfg.space_x.beta} vs "
            f"{cfg.space_y.beta}); the stability constants assume one degree")
    return cfg.space_x.beta
