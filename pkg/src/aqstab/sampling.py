"""Deterministic sample generation: dyadic grids plus seeded random clouds.

Grids are dyadic (coordinates k / 2^depth) so that halving an argument never
rounds: the extraction iterates then scale exactly in binary floating point.
Scalar null sequences are fixed geometric families used by the norm-axiom
trend checks.  All randomness flows through one seeded generator, so a config
with the same seed reproduces every sample byte for byte.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, InputError
from .spaces import SpaceSpec


@dataclass(frozen=True)
class SampleSpec:
    """Sampling plan: grid extent and depth, plus optional random points."""

    extent: float = 2.0
    dyadic_depth: int = 3
    random_count: int = 0
    seed: int | None = None

    def __post_init__(self):
        if not (self.extent > 0.0) or not math.isfinite(self.extent):
            raise InputError(f"extent must be positive and finite, got {self.extent!r}")
        if not isinstance(self.dyadic_depth, int) or self.dyadic_depth < 0:
            raise InputError(f"dyadic depth must be a nonnegative integer, got {self.dyadic_depth!r}")
        if not isinstance(self.random_count, int) or self.random_count < 0:
            raise InputError(f"random count must be a nonnegative integer, got {self.random_count!r}")
        if self.random_count > 0 and self.seed is None:
            raise ConfigError("random samples require a seed")


def dyadic_axis(extent: float, depth: int) -> np.ndarray:
    """Symmetric 1-D dyadic grid over [-extent, extent] with step 2^(-depth)."""
    steps = int(round(extent * 2 ** depth))
    return np.arange(-steps, steps + 1, dtype=float) / 2.0 ** depth


#: Scalar null sequences for the norm-axiom trend checks: fixed geometric
#: families with ratios 1/2, 1/4, 1/3 and prefix lengths long enough for the
#: required decay across beta in (0, 1].
NULL_SEQUENCES = (
    tuple(2.0 ** -n for n in range(16)),
    tuple(4.0 ** -n for n in range(12)),
    tuple(3.0 ** -n for n in range(10)),
)


@dataclass(frozen=True)
class SampleSet:
    """Concrete samples drawn for one experiment."""

    vectors: list
    scalars: list
    scalar_sequences: tuple
    pairs: list
    tuples: list
    axis: np.ndarray
    random_count: int

    @property
    def count(self) -> int:
        return len(self.pairs)


def _embed(space: SpaceSpec, value: float) -> np.ndarray:
    out = np.zeros(space.dimension)
    out[0] = value
    return out


def build_samples(space: SpaceSpec, spec: SampleSpec) -> SampleSet:
    """Materialize the sampling plan for one model space.

    * vectors: axis values embedded on the first coordinate (plus, in higher
      dimensions, a diagonal family), used by norm-axiom checks.
    * pairs: the full dyadic grid product, used as (x, z) extraction samples.
    * tuples: a coarse grid fourth power plus the seeded random cloud, used by
      defect and structure checks (the fourth power of the full grid would be
      unreasonably large).
    """
    axis = dyadic_axis(spec.extent, spec.dyadic_depth)
    rng = np.random.default_rng(spec.seed) if spec.seed is not None else None

    vectors = [_embed(space, v) for v in axis]
    if space.dimension > 1:
        vectors.extend(np.full(space.dimension, v) for v in axis if v != 0.0)

    scalars = [-2.0, -1.0, -0.5, -0.25, 0.0, 0.25, 0.5, 1.0, 2.0]

    pairs = [(_embed(space, a), _embed(space, b)) for a in axis for b in axis]

    coarse_depth = max(spec.dyadic_depth - 3, 0)
    coarse = dyadic_axis(spec.extent, coarse_depth)
    tuples = [(_embed(space, a), _embed(space, b), _embed(space, c), _embed(space, d))
              for a in coarse for b in coarse for c in coarse for d in coarse]
    if spec.random_count > 0:
        draws = rng.uniform(-spec.extent, spec.extent,
                            size=(spec.random_count, 4, space.dimension))
        tuples.extend(tuple(row for row in draw) for draw in draws)

    return SampleSet(
        vectors=vectors,
        scalars=scalars,
        scalar_sequences=NULL_SEQUENCES,
        pairs=pairs,
        tuples=tuples,
        axis=axis,
        random_count=spec.random_count,
    )
