"""Pytest configuration for wickcalc tests."""

import sys
from pathlib import Path

import numpy as np
import pytest
from click.testing import CliRunner

# Add src to Python path for imports
sys.path.insert(0, str(Path(__file__).parent.parent / "src"))


@pytest.fixture
def runner():
    """Create a CLI runner for testing."""
    return CliRunner()


@pytest.fixture
def rng():
    """Seeded random generator."""
    return np.random.default_rng(1234)


@pytest.fixture(scope="session")
def configs_dir():
    """Sample scenario files shipped with the project."""
    return Path(__file__).parent.parent / "configs"


@pytest.fixture
def write_scenario(tmp_path):
    """Write a YAML scenario file and return its path."""

    def _write(text: str, name: str = "scenario.yml") -> Path:
        path = tmp_path / name
        path.write_text(text)
        return path

    return _write
