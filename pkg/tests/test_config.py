"""Tests for the config module."""

import pytest

from wickcalc.config import ModelParams, ScenarioConfig, TunnelingConfig, load_config
from wickcalc.errors import ErrorCode, WickCalcError


def test_config_defaults():
    """Test that ScenarioConfig has default values."""
    config = ScenarioConfig()
    assert config.model == "su2-sphere"
    assert config.output_directory == "wickcalc-out"
    assert config.kernel.truncation == 256
    assert config.tolerances.relation == 1e-10


def test_model_alias_resolved():
    """The su11 alias maps to the disk model."""
    assert ScenarioConfig(model="su11").model == "su11-variant1"


def test_unknown_model_lists_registry():
    """Unknown models are rejected with the registered names."""
    with pytest.raises(ValueError, match="cylinder"):
        ScenarioConfig(model="torus")


def test_lambda_alias():
    """The YAML key lambda fills the lam field."""
    params = ModelParams(**{"lambda": 2.0, "hbar": 0.5})
    assert params.as_kwargs() == {"hbar": 0.5, "lam": 2.0}


def test_tunneling_needs_three_hbars():
    """Exponential fits need at least three points."""
    with pytest.raises(ValueError):
        TunnelingConfig(hbars=[1.0, 2.0])
    assert TunnelingConfig(hbars=[2.0, 0.5, 1.0]).hbars == [0.5, 1.0, 2.0]


def test_jobs_from_environment(monkeypatch):
    """WICKCALC_JOBS sets the default worker count."""
    monkeypatch.setenv("WICKCALC_JOBS", "3")
    assert ScenarioConfig().jobs == 3
    assert ScenarioConfig(jobs=2).jobs == 2


def test_load_config_default():
    """Test loading default config."""
    config = load_config()
    assert isinstance(config, ScenarioConfig)


def test_load_config_with_path(tmp_path):
    """Test loading config from a file."""
    config_file = tmp_path / "scenario.yml"
    config_file.write_text(
        """
model: cylinder
params:
  hbar: 0.5
suite: tunneling
output_directory: test/output
"""
    )

    config = load_config(str(config_file))
    assert config.model == "cylinder"
    assert config.params.hbar == 0.5
    assert config.suite == "tunneling"
    assert config.output_directory == "test/output"


def test_load_config_json(tmp_path):
    """JSON scenario files are read through the YAML loader."""
    config_file = tmp_path / "scenario.json"
    config_file.write_text('{"model": "zeeman", "params": {"N": 3, "hbar": 0.5}}')
    config = load_config(config_file)
    assert config.model == "zeeman"
    assert config.params.N == 3


def test_load_config_unknown_model(tmp_path):
    """An unknown model raises UNKNOWN_MODEL."""
    config_file = tmp_path / "scenario.yml"
    config_file.write_text("model: torus\n")
    with pytest.raises(WickCalcError) as excinfo:
        load_config(config_file)
    assert excinfo.value.code == ErrorCode.UNKNOWN_MODEL


def test_load_config_invalid(tmp_path):
    """Bad field values raise CONFIG_INVALID."""
    config_file = tmp_path / "scenario.yml"
    config_file.write_text("jobs: 0\n")
    with pytest.raises(WickCalcError) as excinfo:
        load_config(config_file)
    assert excinfo.value.code == ErrorCode.CONFIG_INVALID


def test_load_config_missing_file(tmp_path):
    """A missing file raises CONFIG_INVALID."""
    with pytest.raises(WickCalcError) as excinfo:
        load_config(tmp_path / "absent.yml")
    assert excinfo.value.code == ErrorCode.CONFIG_INVALID


def test_sample_configs_load(configs_dir):
    """Every shipped scenario parses."""
    paths = sorted(configs_dir.glob("*.yaml")) + sorted(configs_dir.glob("*.json"))
    assert paths
    for path in paths:
        assert isinstance(load_config(path), ScenarioConfig)
