"""Tests for the model registry."""

import pytest

from wickcalc.errors import ErrorCode, WickCalcError
from wickcalc.models import (
    MODEL_NAMES,
    PrimeSeriesModel,
    SphereModel,
    Su11DiskModel,
    ZeemanModel,
    create_model,
    solve_density,
)


def test_registry_names():
    """The registry is alphabetized."""
    assert list(MODEL_NAMES) == [
        "cylinder",
        "su11-prime",
        "su11-variant1",
        "su11-variant2",
        "su2-sphere",
        "zeeman",
    ]


def test_create_model_defaults_and_alias():
    """Defaults fill unset parameters; su11 is an alias."""
    sphere = create_model("su2-sphere")
    assert isinstance(sphere, SphereModel)
    assert sphere.N == 1
    disk = create_model("su11", a=2.0, hbar=None)
    assert isinstance(disk, Su11DiskModel)
    assert disk.a == 2.0


def test_create_model_unknown():
    """Unknown names raise UNKNOWN_MODEL with the registry in the message."""
    with pytest.raises(WickCalcError) as excinfo:
        create_model("torus")
    assert excinfo.value.code == ErrorCode.UNKNOWN_MODEL
    assert "zeeman" in str(excinfo.value)


def test_create_model_bad_parameter():
    """Parameters a model does not take are a configuration error."""
    with pytest.raises(WickCalcError) as excinfo:
        create_model("cylinder", lam=2.0, N=3)
    assert excinfo.value.code == ErrorCode.CONFIG_INVALID


def test_sphere_level_zero_excluded():
    """N = 0 has no solution."""
    with pytest.raises(WickCalcError) as excinfo:
        SphereModel(N=0)
    assert excinfo.value.code == ErrorCode.NO_SOLUTION


def test_zeeman_level_from_N():
    """a1 = -(N + 1) hbar."""
    model = ZeemanModel(hbar=1.0, N=1)
    assert model.a1 == -2.0
    assert model.level == 1
    with pytest.raises(WickCalcError):
        ZeemanModel(hbar=1.0, N=1, a1=-3.0)


def test_zeeman_product_coefficients():
    """Direct product of the Jacobi-type coefficients at N = 1 is (1, 1)."""
    coefficients = ZeemanModel(hbar=1.0, N=1).product_coefficients()
    assert coefficients.tolist() == pytest.approx([1.0, 1.0], rel=1e-14)


def test_with_hbar_keeps_parameters():
    """with_hbar rebuilds the model at another Planck constant."""
    model = Su11DiskModel(a=1.5, hbar=0.5).with_hbar(0.25)
    assert model.hbar == 0.25
    assert model.a == 1.5
    assert SphereModel(N=2).with_hbar(0.5).N == 4


def test_describe():
    """describe() echoes chart, level and parameters."""
    info = SphereModel(N=2).describe()
    assert info["name"] == "su2-sphere"
    assert info["level"] == 2
    assert info["compact"] is True
    assert info["closed_form"] == "geometric"
    assert PrimeSeriesModel(lam=2.0).describe()["params"]["lam"] == 2.0


@pytest.mark.parametrize(
    "model",
    [SphereModel(N=4), Su11DiskModel(a=1.0, hbar=0.5), create_model("cylinder", hbar=1.0)],
    ids=["sphere", "disk", "cylinder"],
)
def test_solve_density_normalized(model):
    """(1/hbar) int l = 1 to 1e-10."""
    density = solve_density(model)
    assert density.normalization() == pytest.approx(1.0, abs=1e-10)


def test_solve_density_zeeman():
    """Euler-integral density of the Zeeman model is normalized to 1e-8."""
    density = solve_density(ZeemanModel(hbar=0.5, N=3), tol=1e-8)
    assert density.normalization() == pytest.approx(1.0, abs=1e-8)
