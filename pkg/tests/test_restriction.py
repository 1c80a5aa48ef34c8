"""Tests for quantum restriction, group elements and characters on the sphere."""

import math

import numpy as np
import pytest

from wickcalc.algebra import AxisPolynomial
from wickcalc.errors import ErrorCode, WickCalcError
from wickcalc.models import SphereModel, Su11DiskModel
from wickcalc.quadrature import sphere_grid
from wickcalc.representation import build_operators, build_space
from wickcalc.restriction import (
    SPHERE_CASIMIR,
    casimir_eigenvalue,
    character,
    character_oracle,
    e1_normal_coefficients,
    group_element,
    group_element_operator,
    group_element_unitarity,
    lie_generators,
    quantum_restriction,
    random_sphere_points,
    restriction_symbol_closed,
    restriction_symbol_ode,
    weyl_operator,
)
from wickcalc.wick import coherent_states


@pytest.fixture
def sphere_setup():
    model = SphereModel(N=3)
    space = build_space(model)
    ops = build_operators(model, space)
    states = coherent_states(model, space, sphere_grid())
    return model, ops, states


def test_restriction_of_one(sphere_setup):
    """The constant 1 restricts to 1."""
    model, ops, states = sphere_setup
    one = AxisPolynomial.constant(3, 1.0)
    symbol = quantum_restriction(one, model, ops, states, states.sample(32))
    np.testing.assert_allclose(symbol.values, 1.0, atol=1e-12)


def test_casimir_restricts_to_one_plus_hbar(sphere_setup):
    """x1^2 + x2^2 + x3^2 restricts to the constant 1 + hbar."""
    model, ops, states = sphere_setup
    eigen = casimir_eigenvalue(model, ops, states)
    assert eigen.value == pytest.approx(1.0 + model.hbar, abs=1e-10)
    assert eigen.matrix_value == pytest.approx(1.0 + model.hbar, abs=1e-10)


def test_weyl_ordering_is_symmetric(sphere_setup):
    """The Weyl-ordered x1 x2 is self-adjoint."""
    model, ops, _ = sphere_setup
    op = weyl_operator(AxisPolynomial(3, {(1, 1, 0): 1.0}), lie_generators(model, ops))
    np.testing.assert_allclose(op.matrix, op.matrix.conj().T, atol=1e-12)


def test_weyl_degree_limit(sphere_setup):
    model, ops, _ = sphere_setup
    with pytest.raises(WickCalcError) as exc:
        weyl_operator(AxisPolynomial(3, {(7, 0, 0): 1.0}), lie_generators(model, ops))
    assert exc.value.code is ErrorCode.DEGREE_LIMIT


def test_lie_generators_need_lie_coordinates():
    model = Su11DiskModel(a=1.0, hbar=0.5)
    ops = build_operators(model, build_space(model, dim=16))
    with pytest.raises(WickCalcError) as exc:
        lie_generators(model, ops)
    assert exc.value.code is ErrorCode.CONFIG_INVALID


def test_e1_does_not_depend_on_casimir_coordinate(rng):
    """K and 2K + K^2 give the same normal coefficient."""
    coefficients = e1_normal_coefficients(random_sphere_points(16, rng))
    np.testing.assert_allclose(coefficients["K"], coefficients["2K+K^2"], atol=1e-12)
    assert SPHERE_CASIMIR.degree == 2


def test_restriction_symbol_ode_matches_closed_form(rng):
    """The characteristic ODE reproduces the closed restriction symbol."""
    N = 6
    xi = random_sphere_points(3, rng)
    eta = random_sphere_points(3, rng) * 1.3
    for point, vector in zip(xi, eta, strict=True):
        closed = complex(restriction_symbol_closed(point, vector, N)[0])
        solved = restriction_symbol_ode(point, vector, 2.0 / N)
        assert abs(solved - closed) <= 1e-7 * abs(closed)


def test_restriction_symbol_at_zero():
    """eta = 0 gives the constant symbol 1."""
    xi = np.array([0.0, 0.0, 1.0])
    assert restriction_symbol_ode(xi, np.zeros(3), 0.5) == 1.0
    np.testing.assert_allclose(restriction_symbol_closed(xi, np.zeros(3), 4), 1.0)


def test_character_oracle():
    """sin((N+1) t/2) / sin(t/2) with its limit at t = 0."""
    assert character_oracle(3, 0.0) == pytest.approx(4.0)
    assert character_oracle(1, 1.0) == pytest.approx(2.0 * math.cos(0.5))


def test_character_by_trace_and_quadrature(sphere_setup):
    """Matrix trace and quadrature of the group element agree with the oracle."""
    model, ops, _ = sphere_setup
    eta = np.array([1.0, 2.0, 2.0]) / 3.0
    oracle = character_oracle(model.N, 1.0)
    assert group_element_operator(ops, eta).trace() == pytest.approx(oracle, abs=1e-10)
    assert character(model, eta, sphere_grid()) == pytest.approx(oracle, abs=1e-8)


def test_group_element_branch():
    """Odd levels leave the first sheet at |eta| = 2 pi."""
    eta = np.array([0.0, 0.0, 7.0])
    with pytest.raises(WickCalcError) as exc:
        group_element(1, eta)
    assert exc.value.code is ErrorCode.BRANCH
    assert group_element(1, eta, second_sheet=True).norm == pytest.approx(7.0)
    assert group_element(2, eta).N == 2


def test_group_element_unitarity(sphere_setup):
    """e(eta) * e(-eta) = 1."""
    _, _, states = sphere_setup
    assert group_element_unitarity(np.array([0.4, -0.3, 0.5]), states) < 1e-8


def test_restriction_symbol_ode_refines_coarse_steps(rng):
    """Starting from a coarse step the action is refined until it settles."""
    xi = random_sphere_points(1, rng)[0]
    eta = random_sphere_points(1, rng)[0] * 1.3
    closed = complex(restriction_symbol_closed(xi, eta, 4)[0])
    solved = restriction_symbol_ode(xi, eta, 0.5, steps=25, refinements=5)
    assert abs(solved - closed) <= 1e-7 * abs(closed)


def test_restriction_symbol_ode_unsettled_action():
    """An action that keeps changing under step halving is an error, not a warning."""
    xi = np.array([0.0, 0.6, 0.8])
    eta = np.array([1.0, 0.5, -0.7])
    with pytest.raises(WickCalcError) as exc:
        restriction_symbol_ode(xi, eta, 0.5, steps=2, rtol=1e-14, refinements=0)
    assert exc.value.code is ErrorCode.ODE_DIVERGED
    assert exc.value.details["steps"] == 4
    assert exc.value.details["error_estimate"] > 0.0
