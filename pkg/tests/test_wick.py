"""Tests for coherent states, Wick symbols and the star product routes."""

import numpy as np
import pytest

from wickcalc.errors import ErrorCode, WickCalcError
from wickcalc.models import CylinderModel, SphereModel, Su11DiskModel
from wickcalc.quadrature import disk_grid, grid_for, sphere_grid
from wickcalc.representation import build_operators, build_space
from wickcalc.restriction import random_normal_polynomial
from wickcalc.wick import (
    KahlerData,
    coherent_states,
    compare_star_routes,
    dimension_formula,
    hbar_expansion_check,
    probability_bounds,
    probability_normalization,
    resolution_of_identity,
    sphere_eigenvalue,
    symbol_from_operator,
    trace_by_quadrature,
    wick_operator_from_symbol,
)


@pytest.fixture
def sphere_states():
    model = SphereModel(N=3)
    return coherent_states(model, build_space(model), sphere_grid())


def test_probability_normalization_sphere():
    """p integrates to one on the sphere."""
    model = SphereModel(N=4)
    x = np.sqrt(np.array([0.25, 1.0, 4.0])) * np.exp(0.7j)
    values = probability_normalization(model, sphere_grid(), x)
    np.testing.assert_allclose(values, 1.0, atol=1e-10)


def test_probability_normalization_disk():
    """p integrates to one on the disk inside the resolved radius."""
    model = Su11DiskModel(a=1.0, hbar=0.5)
    x = np.sqrt(np.array([0.0, 0.2, 0.5])) * np.exp(0.7j)
    values = probability_normalization(model, disk_grid(), x)
    np.testing.assert_allclose(values, 1.0, atol=1e-8)


def test_probability_normalization_cylinder():
    """p integrates to one on the strip."""
    model = CylinderModel(hbar=1.0)
    x = (1.0 + np.array([-1.0, 0.0, 1.0])) / 2.0 + 1.1j
    values = probability_normalization(model, grid_for(model), x)
    np.testing.assert_allclose(values, 1.0, atol=1e-8)


def test_probability_bounds():
    """0 <= p <= 1 with p = 1 only on the diagonal."""
    model = SphereModel(N=2)
    grid = sphere_grid(24, 24)
    bounds = probability_bounds(model, grid, np.arange(0, grid.size, 7))
    assert bounds.minimum >= 0.0
    assert bounds.maximum <= 1.0 + 1e-12
    assert bounds.separation_violations == 0


def test_resolution_of_identity(sphere_states):
    """Coherent projectors integrate to the identity."""
    resolution = resolution_of_identity(sphere_states).matrix
    np.testing.assert_allclose(resolution, np.eye(4), atol=1e-10)


def test_trace_by_quadrature(sphere_states, rng):
    """The integral of a symbol is the trace of its operator."""
    ops = build_operators(sphere_states.model, sphere_states.space)
    op = random_normal_polynomial(1, rng).to_operator(ops)
    symbol = symbol_from_operator(op, sphere_states)
    assert trace_by_quadrature(symbol, sphere_states) == pytest.approx(op.trace(), abs=1e-9)


def test_symbol_round_trip(sphere_states, rng):
    """An operator is recovered from its symbol on the full grid."""
    ops = build_operators(sphere_states.model, sphere_states.space)
    op = random_normal_polynomial(1, rng).to_operator(ops)
    symbol = symbol_from_operator(op, sphere_states)
    recovered = wick_operator_from_symbol(symbol, sphere_states)
    np.testing.assert_allclose(recovered.matrix, op.matrix, atol=1e-8)


def test_symbol_round_trip_needs_full_grid(sphere_states):
    """Symbols restricted to a subset of nodes cannot be inverted."""
    ops = build_operators(sphere_states.model, sphere_states.space)
    symbol = symbol_from_operator(ops.B, sphere_states, np.arange(5))
    with pytest.raises(WickCalcError) as exc:
        wick_operator_from_symbol(symbol, sphere_states)
    assert exc.value.code is ErrorCode.ILL_CONDITIONED


def test_star_routes_agree(sphere_states, rng):
    """Operator product and quadrature of the extended symbols give the same star product."""
    ops = build_operators(sphere_states.model, sphere_states.space)
    psi = random_normal_polynomial(1, rng).to_operator(ops)
    chi = random_normal_polynomial(1, rng).to_operator(ops)
    assert compare_star_routes(psi, chi, sphere_states) < 1e-7


def test_sphere_eigenvalues():
    """Eigenvalues of the probability operator on the sphere."""
    assert sphere_eigenvalue(4, 0) == pytest.approx(1.0)
    assert sphere_eigenvalue(1, 1) == pytest.approx(1.0 / 3.0)
    assert sphere_eigenvalue(2, 3) == 0.0


def test_dimension_formula_sphere():
    """Quadrature of (1 + hbar sigma1) omega gives N + 1; Gauss-Bonnet gives 2."""
    result = dimension_formula(SphereModel(N=5), sphere_grid())
    assert result.expected == 6
    assert result.residual < 1e-6
    assert result.gauss_bonnet == pytest.approx(2.0, abs=1e-6)


def test_dimension_formula_requires_compact():
    with pytest.raises(WickCalcError) as exc:
        dimension_formula(Su11DiskModel(a=1.0, hbar=0.5), disk_grid())
    assert exc.value.code is ErrorCode.CONFIG_INVALID


def test_sphere_curvature_is_constant():
    """sigma1 is constant on the round sphere."""
    data = KahlerData(SphereModel(N=4))
    sigma = data.sigma1(np.array([0.1, 1.0, 9.0]))
    np.testing.assert_allclose(sigma, sigma[0], rtol=1e-8)


def test_hbar_expansion_exact_for_linear_symbols():
    """xi3 * xi3 has no remainder beyond second order."""
    fit = hbar_expansion_check("xi3", "xi3")
    assert fit.exact
    assert fit.passed(2.7)


def test_hbar_expansion_order_for_quadratic_symbols():
    """The remainder for xi3^2 * xi3^2 is of order hbar^3."""
    fit = hbar_expansion_check("xi3^2", "xi3^2")
    assert not fit.exact
    assert fit.order is not None
    assert fit.order >= 2.7


def test_hbar_expansion_unknown_symbol():
    with pytest.raises(WickCalcError) as exc:
        hbar_expansion_check("xi1", "xi3")
    assert exc.value.code is ErrorCode.CONFIG_INVALID
