import copy
import json
from pathlib import Path

import numpy as np
import pytest

from aqstab.config import (
    CLAIMS,
    CONFIG_VERSION,
    DEFAULT_SWEEP_GRID,
    METHOD_NAMES,
    load_config,
    parse_config,
    shared_beta,
)
from aqstab.errors import ConfigError, InputError
from aqstab.mappings import InterpolationTable
from aqstab.sampling import SampleSpec, build_samples, dyadic_axis
from aqstab.spaces import SpaceSpec

CONFIG_DIR = Path(__file__).resolve().parent.parent / "configs"


def _template():
    return json.loads((CONFIG_DIR / "power_r3.json").read_text(encoding="utf-8"))


def test_dyadic_axis_shape_and_spacing():
    axis = dyadic_axis(2.0, 3)
    assert len(axis) == 33
    assert axis[0] == -2.0 and axis[-1] == 2.0
    assert 0.0 in axis
    diffs = np.diff(axis)
    assert np.all(diffs == 2.0 ** -3)
    assert len(dyadic_axis(2.0, 0)) == 5


def test_build_samples_materializes_the_grid(line):
    samples = build_samples(line, SampleSpec(extent=2.0, dyadic_depth=3))
    assert samples.count == 33 ** 2
    assert len(samples.pairs) == samples.count
    assert all(len(t) == 4 for t in samples.tuples)
    assert samples.vectors
    assert samples.scalar_sequences


def test_random_samples_are_seeded_and_reproducible(line):
    spec = SampleSpec(extent=2.0, dyadic_depth=2, random_count=5, seed=7)
    a = build_samples(line, spec)
    b = build_samples(line, spec)
    assert repr(a.tuples) == repr(b.tuples)
    c = build_samples(line, SampleSpec(extent=2.0, dyadic_depth=2, random_count=5, seed=8))
    assert repr(a.tuples) != repr(c.tuples)


def test_sample_spec_validation():
    with pytest.raises(InputError):
        SampleSpec(extent=0.0)
    with pytest.raises(InputError):
        SampleSpec(dyadic_depth=-1)
    with pytest.raises(InputError):
        SampleSpec(random_count=-2, seed=1)
    with pytest.raises(ConfigError):
        SampleSpec(random_count=3)


def test_bundled_config_loads(line):
    cfg = load_config(CONFIG_DIR / "power_r3.json")
    assert cfg.label
    assert cfg.methods == ("direct_halving", "fixpoint_halving")
    assert cfg.phi.r == 3.0
    assert cfg.samples.extent == 2.0
    assert cfg.tolerances.extraction == 1e-10
    assert cfg.limits.k_max == 60
    assert cfg.lipschitz is None
    assert cfg.sweep_grid == DEFAULT_SWEEP_GRID
    assert shared_beta(cfg) == 1.0


def test_every_bundled_config_parses():
    for path in sorted(CONFIG_DIR.glob("*.json")):
        cfg = load_config(path)
        assert cfg.methods


def test_unknown_keys_are_rejected():
    data = _template()
    data["bogus"] = 1
    with pytest.raises(ConfigError):
        parse_config(data)
    data = _template()
    data["phi"]["bogus"] = 1
    with pytest.raises(ConfigError):
        parse_config(data)
    data = _template()
    del data["version"]
    with pytest.raises(ConfigError):
        parse_config(data)
    data = _template()
    data["version"] = CONFIG_VERSION + 1
    with pytest.raises(ConfigError):
        parse_config(data)


def test_method_expansion_and_validation():
    data = _template()
    data["method"] = ["all", "claims"]
    cfg = parse_config(data)
    assert cfg.methods == METHOD_NAMES
    assert CLAIMS in cfg.methods
    data["method"] = ["sideways"]
    with pytest.raises(ConfigError):
        parse_config(data)
    data["method"] = []
    with pytest.raises(ConfigError):
        parse_config(data)


def test_lipschitz_bounds_are_enforced():
    data = _template()
    data["lipschitz"] = 0.5
    assert parse_config(data).lipschitz == 0.5
    for bad in (0.0, 1.0, 1.5, -0.25):
        data["lipschitz"] = bad
        with pytest.raises(ConfigError):
            parse_config(data)


def test_custom_control_and_core_are_not_configurable():
    data = _template()
    data["phi"] = {"kind": "custom"}
    with pytest.raises(ConfigError):
        parse_config(data)
    data = _template()
    data["mapping"]["core"] = {"kind": "custom"}
    with pytest.raises(ConfigError):
        parse_config(data)


def test_table_path_resolves_relative_to_the_config(tmp_path):
    (tmp_path / "grid.csv").write_text(
        "x,z,value\n0.0,0.0,0.0\n0.0,1.0,1.0\n1.0,0.0,1.0\n1.0,1.0,2.0\n",
        encoding="utf-8",
    )
    data = _template()
    data["mapping"]["perturbation"] = {"kind": "table", "amplitude": 0.5, "path": "grid.csv"}
    config_path = tmp_path / "experiment.json"
    config_path.write_text(json.dumps(data), encoding="utf-8")
    cfg = load_config(config_path)
    assert isinstance(cfg.mapping.perturbation.table, InterpolationTable)
    data["mapping"]["perturbation"] = {"kind": "power_product", "path": "grid.csv"}
    config_path.write_text(json.dumps(data), encoding="utf-8")
    with pytest.raises(ConfigError):
        load_config(config_path)


def test_shared_beta_requires_matching_homogeneous_spaces():
    data = _template()
    data["spaces"]["Y"] = {"dimension": 1, "kind": "beta_homogeneous", "beta": 0.5}
    cfg = parse_config(data)
    with pytest.raises(ConfigError):
        shared_beta(cfg)
    data["spaces"]["Y"] = {"dimension": 1, "kind": "p_norm", "p": 0.5}
    cfg = parse_config(data)
    with pytest.raises(ConfigError):
        shared_beta(cfg)


def test_missing_config_file_is_a_config_error(tmp_path):
    with pytest.raises(ConfigError):
        load_config(tmp_path / "nope.json")
    broken = tmp_path / "broken.json"
    broken.write_text("{not json", encoding="utf-8")
    with pytest.raises(ConfigError):
        load_config(broken)
