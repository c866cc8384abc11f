import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from aqstab.control import ControlFunction
from aqstab.mappings import CoreSpec, Mapping, PerturbationSpec
from aqstab.sampling import SampleSpec, build_samples
from aqstab.spaces import SpaceSpec

settings.register_profile(
    "suite",
    deadline=None,
    derandomize=True,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("suite")


@pytest.fixture(scope="session")
def line():
    """One-dimensional space with norm |v| (beta = 1)."""
    return SpaceSpec(dimension=1)


@pytest.fixture(scope="session")
def phi_r3(line):
    return ControlFunction(space=line, theta=1.0, r=3.0)


@pytest.fixture(scope="session")
def phi_r05(line):
    return ControlFunction(space=line, theta=1.0, r=0.5)


@pytest.fixture(scope="session")
def fixture_mapping(line):
    """The calibrated fixture f(x, z) = 0.01 x^3 z^3 (zero core)."""
    return Mapping(
        line,
        line,
        core=CoreSpec(kind="zero"),
        perturbation=PerturbationSpec(
            kind="power_product", amplitude=0.01, first_exp=3.0, second_exp=3.0
        ),
    )


@pytest.fixture(scope="session")
def separable_mapping(line):
    """f(x, z) = x z^2: additive in the first slot, quadratic in the second."""
    return Mapping(line, line, core=CoreSpec(kind="separable", a_coeffs=(1.0,), q_matrix=((1.0,),)))


@pytest.fixture(scope="session")
def grid(line):
    """The 33-point dyadic axis on [-2, 2] and its 33^2 pair grid."""
    return build_samples(line, SampleSpec(extent=2.0, dyadic_depth=3))


@pytest.fixture(scope="session")
def small_grid(line):
    """A 9-point axis on [-1, 1] (81 pairs) for the slower iteration tests."""
    return build_samples(line, SampleSpec(extent=1.0, dyadic_depth=2))


@pytest.fixture(scope="session")
def unit(line):
    return np.array([1.0])
