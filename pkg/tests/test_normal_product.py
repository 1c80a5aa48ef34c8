"""Tests for the normal star product."""

import numpy as np
import pytest

from wickcalc.algebra import AxisPolynomial
from wickcalc.models import SphereModel, Su11DiskModel, ZeemanModel
from wickcalc.normal_product import (
    NormalPolynomial,
    associativity_residual,
    casimir_centrality,
    classical_limit_defect,
    format_normal,
    parse_normal,
    poisson_bracket,
    star,
)
from wickcalc.representation import build_operators, build_space
from wickcalc.restriction import random_normal_polynomial


def test_generators_commute_to_lambda():
    """C * B - B * C is lambda^hbar(A) = -2 hbar A + hbar^2 on the sphere."""
    spec = SphereModel(N=2).spec
    b = NormalPolynomial.generator(1, "B")
    c = NormalPolynomial.generator(1, "C")
    commutator = star(c, b, spec) - star(b, c, spec)
    expected = NormalPolynomial.from_axis(spec.lambda_h_poly())
    assert commutator.allclose(expected)
    h = spec.hbar
    assert commutator.allclose(
        NormalPolynomial.from_terms(1, {(0, (1,), 0): -2 * h, (0, (0,), 0): h**2})
    )


def test_product_is_normally_ordered():
    """B * C needs no reordering; C * A moves A through C with the flow."""
    spec = SphereModel(N=2).spec
    b = NormalPolynomial.generator(1, "B")
    c = NormalPolynomial.generator(1, "C")
    a = NormalPolynomial.generator(1, "A")
    assert star(b, c, spec).terms == {(1, (0,), 1): 1.0}
    # C A = (A + hbar) C for the translation flow
    assert star(c, a, spec).allclose(
        NormalPolynomial.from_terms(1, {(0, (1,), 1): 1.0, (0, (0,), 1): spec.hbar})
    )


@pytest.mark.parametrize(
    "model", [SphereModel(N=3), Su11DiskModel(a=1.0, hbar=0.5), ZeemanModel(hbar=0.5, N=3)],
    ids=lambda m: m.name,
)
def test_associativity_and_centrality(model, rng):
    """Random polynomials associate, and the Casimir is central."""
    nvars = model.spec.flow.dimension
    f, g, k = (random_normal_polynomial(nvars, rng) for _ in range(3))
    assert associativity_residual(f, g, k, model.spec) < 1e-9
    assert casimir_centrality(model.spec, f) < 1e-9


def test_matches_operator_products(rng):
    """to_operator is multiplicative on the compact sphere representation."""
    model = SphereModel(N=4)
    ops = build_operators(model, build_space(model))
    f = random_normal_polynomial(1, rng)
    g = random_normal_polynomial(1, rng)
    lhs = star(f, g, model.spec).to_operator(ops).matrix
    rhs = (f.to_operator(ops) @ g.to_operator(ops)).matrix
    np.testing.assert_allclose(lhs, rhs, atol=1e-9 * max(1.0, np.abs(rhs).max()))


def test_classical_limit_is_linear_in_hbar():
    """(i/hbar)[C, B] - {C, B} is exactly hbar for rho = -A^2."""
    spec = SphereModel(N=2).spec
    b = NormalPolynomial.generator(1, "B")
    c = NormalPolynomial.generator(1, "C")
    for h in (1e-1, 1e-2, 1e-3):
        assert classical_limit_defect(spec, c, b, h) == pytest.approx(h, rel=1e-9)


def test_poisson_bracket_of_axis_and_raising():
    """{B, A} = -i v B with unit velocity on the sphere."""
    spec = SphereModel(N=2).spec
    b = NormalPolynomial.generator(1, "B")
    a = NormalPolynomial.generator(1, "A")
    bracket = poisson_bracket(spec, b, a)
    assert bracket.allclose(NormalPolynomial.from_terms(1, {(1, (0,), 0): -1j}))


def test_evaluate_and_degree():
    """Commutative evaluation ignores ordering."""
    poly = NormalPolynomial.from_terms(1, {(1, (2,), 1): 2.0, (0, (0,), 0): -1.0})
    assert poly.degree == 4
    assert poly.evaluate(2.0, 3.0, 0.5) == pytest.approx(2.0 * 2.0 * 9.0 * 0.5 - 1.0)
    assert (poly - poly).is_zero()


def test_text_format_round_trip():
    """format_normal and parse_normal are inverse on a mixed polynomial."""
    poly = NormalPolynomial.from_terms(
        2, {(1, (0, 2), 0): 1.5 - 2j, (0, (1, 0), 3): -0.25, (0, (0, 0), 0): 3.0}
    )
    text = format_normal(poly)
    assert "B^1 A^(0,2)" in text
    assert parse_normal(text, nvars=2).allclose(poly, tol=0.0)


def test_parse_rejects_garbage():
    """Unknown factors are rejected."""
    with pytest.raises(ValueError):
        parse_normal("(1+0j) * Q^2")
    with pytest.raises(ValueError):
        parse_normal("(1+0j) * A^(1,2)", nvars=1)


def test_axis_polynomial_mismatch():
    """Blocks must agree on the number of axis variables."""
    with pytest.raises(ValueError):
        NormalPolynomial(1, {(0, 0): AxisPolynomial.constant(2, 1.0)})
