"""Tests for kernel and density solving."""

import math
from dataclasses import replace

import numpy as np
import pytest

from wickcalc.algebra import AxisPolynomial
from wickcalc.errors import ErrorCode, WickCalcError
from wickcalc.kernel import (
    density_equation_residual,
    semiclassical_potential,
    solve_kernel,
)
from wickcalc.models import (
    CylinderModel,
    SphereModel,
    Su11DiskModel,
    Su11PlaneModel,
    ZeemanModel,
)


def test_su11_disk_kernel_coefficients():
    """a = 1, hbar = 1: c = 1, 3, 6 as in (1 - r)^-3, radius 1."""
    kernel = Su11DiskModel(a=1.0, hbar=1.0).kernel()
    np.testing.assert_allclose(kernel.coefficients[:3], [1.0, 3.0, 6.0], rtol=1e-14)
    assert kernel.radius == pytest.approx(1.0, abs=1e-2)
    assert kernel.degree is None
    assert kernel.tag == "geometric"


def test_series_matches_closed_form():
    """Truncated series and closed forms agree inside the radius."""
    disk = Su11DiskModel(a=1.0, hbar=1.0).kernel()
    r = np.array([0.1, 0.3, 0.5])
    np.testing.assert_allclose(disk.log_series(r), disk.log_value(r), rtol=1e-12)

    plane = Su11PlaneModel(a=1.0, hbar=0.5).kernel()
    r = np.array([0.1, 1.0, 4.0])
    np.testing.assert_allclose(plane.log_series(r), plane.log_value(r), rtol=1e-12)
    assert plane.radius == math.inf or plane.radius > 1e3

    cylinder = CylinderModel(hbar=1.0).kernel()
    r = np.linspace(-2.0, 3.0, 11)
    np.testing.assert_allclose(cylinder.log_series(r), cylinder.log_value(r), rtol=1e-12)


def test_compact_kernels_are_polynomials():
    """Sphere kernels are (1 + r)^N; Zeeman at N = 1 is 1 + r."""
    kernel = SphereModel(N=3).kernel()
    assert kernel.degree == 3
    np.testing.assert_allclose(kernel.coefficients, [1.0, 3.0, 3.0, 1.0], rtol=1e-13)

    zeeman = ZeemanModel(hbar=1.0, a1=-2.0, a2=1.0).kernel()
    assert zeeman.degree == 1
    np.testing.assert_allclose(zeeman.coefficients, [1.0, 1.0], rtol=1e-13)


def test_recurrence_residual():
    """conj(E(n h)) c_n = D(n h) c_(n-1) for the solved coefficients."""
    for model in (Su11DiskModel(a=1.0, hbar=0.5), SphereModel(N=6), ZeemanModel(hbar=0.5, N=3)):
        kernel = model.kernel()
        assert kernel.recurrence_residual(model.spec, model.fact) < 1e-14


def test_wrong_level_detected():
    """A factorization that claims the wrong level is refused."""
    model = SphereModel(N=3)
    fact = replace(model.fact, level=2)
    with pytest.raises(WickCalcError) as excinfo:
        solve_kernel(model.spec, fact)
    assert excinfo.value.code == ErrorCode.DIVISION_BY_ZERO_RECURRENCE


def test_negative_weight_detected():
    """A multiplier changing sign gives a negative coefficient."""
    model = Su11DiskModel(a=1.0, hbar=1.0)
    fact = replace(model.fact, D=AxisPolynomial(1, {(0,): -3.0, (1,): 1.0}))
    with pytest.raises(WickCalcError) as excinfo:
        solve_kernel(model.spec, fact)
    assert excinfo.value.code == ErrorCode.NEGATIVE_WEIGHT


def test_su11_disk_density():
    """a = 1, hbar = 1: l(r) = 2 (1 - r), normalized."""
    density = Su11DiskModel(a=1.0, hbar=1.0).density()
    r = np.array([0.0, 0.25, 0.75])
    np.testing.assert_allclose(density.value(r), 2.0 * (1.0 - r), rtol=1e-13)
    assert density.normalization() == pytest.approx(1.0, abs=1e-10)


def test_cylinder_density_is_gaussian():
    """Normalized Gaussian density around r = hbar."""
    hbar = 1.0
    density = CylinderModel(hbar=hbar).density()
    r = np.array([-1.0, 1.0, 2.5])
    expected = math.sqrt(hbar / (4.0 * math.pi)) * np.exp(-((r - hbar) ** 2) / (4.0 * hbar))
    np.testing.assert_allclose(density.value(r), expected, rtol=1e-13)
    assert density.normalization() == pytest.approx(1.0, abs=1e-10)


def test_density_equation_residual():
    """The disk density solves the flipped kernel equation."""
    model = Su11DiskModel(a=1.0, hbar=0.5)
    residual = density_equation_residual(model.spec, model.fact, model.density(), [0.2, 0.4, 0.6])
    assert residual < 1e-6


def test_semiclassical_potential_disk():
    """F0 = -2a log(1 - r) for the disk model."""
    model = Su11DiskModel(a=1.0, hbar=0.5)
    r = np.array([0.1, 0.5, 0.8])
    values = semiclassical_potential(model.spec, model.fact, r)
    np.testing.assert_allclose(values, -2.0 * np.log1p(-r), rtol=1e-9)


def test_semiclassical_kernel_law():
    """hbar log k(r) approaches F0(r) at rate hbar."""
    r = 0.5
    gaps = []
    for hbar in (0.2, 0.1, 0.05):
        model = Su11DiskModel(a=1.0, hbar=hbar)
        gaps.append(abs(hbar * float(model.kernel().log_value(r)) + 2.0 * math.log1p(-r)))
    assert gaps[1] / gaps[0] == pytest.approx(0.5, rel=0.05)
    assert gaps[2] / gaps[1] == pytest.approx(0.5, rel=0.05)
