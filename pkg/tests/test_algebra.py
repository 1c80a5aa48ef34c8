"""Tests for the algebra module."""

from dataclasses import replace

import numpy as np
import pytest

from wickcalc.algebra import (
    AlgebraSpec,
    AxisPolynomial,
    Factorization,
    FlowSpec,
    find_t_star,
    quantize_level,
    validate_factorization,
)
from wickcalc.errors import ErrorCode, WickCalcError
from wickcalc.models import SphereModel, Su11DiskModel, ZeemanModel


def test_polynomial_arithmetic():
    """Products and substitutions of axis polynomials."""
    x = AxisPolynomial.variable(1, 0)
    square = (x + 1) ** 2
    assert square.univariate_coefficients().tolist() == [1, 2, 1]
    assert square.compose([x - 1]).allclose(x**2)
    assert square(2.0) == pytest.approx(9.0)
    assert square.derivative(0).allclose(2 * x + 2)


def test_su11_factorization_valid():
    """D = A + a, E = A - a on A -> A + t: valid with t_star = inf."""
    model = Su11DiskModel(a=1.0, hbar=0.5)
    assert model.validation.passed
    assert model.fact.t_star == float("inf")
    assert model.level is None


def test_su11_swapped_factorization_rejected():
    """Swapping D and E violates E(a) = 0."""
    model = Su11DiskModel(a=1.0, hbar=0.5)
    spec, fact = model.family(0.5, None)
    swapped = replace(fact, D=fact.E, E=fact.D)
    with pytest.raises(WickCalcError) as excinfo:
        validate_factorization(spec, swapped)
    assert excinfo.value.code == ErrorCode.INCONSISTENT_FACTORIZATION


def test_zeeman_t_star():
    """hbar = 1, a = (-2, 1): t_star = 2 and N = 1."""
    model = ZeemanModel(hbar=1.0, a1=-2.0, a2=1.0)
    assert model.fact.t_star == pytest.approx(2.0, abs=1e-10)
    assert model.level == 1


def test_sphere_quantization():
    """The sphere at N = 1 has hbar = 2; t_star = (N + 1) hbar."""
    model = SphereModel(N=1)
    assert model.hbar == 2.0
    assert model.fact.t_star == pytest.approx(4.0, abs=1e-10)
    assert find_t_star(model.spec, model.fact.vacuum) == pytest.approx(4.0, abs=1e-10)


def test_quantize_level_zeeman_vacuum():
    """Adjusting a1 at hbar = 1 gives a1 = -(N + 1) hbar."""
    model = ZeemanModel(hbar=1.0)
    spec, fact = quantize_level(model.family, 1, 1.0, vacuum=(-1.5, 1.0))
    assert fact.vacuum[0] == pytest.approx(-2.0, abs=1e-9)
    assert fact.level == 1


def test_quantize_level_rejects_zero():
    """N = 0 is excluded."""
    with pytest.raises(WickCalcError) as excinfo:
        quantize_level(ZeemanModel(hbar=1.0).family, 0, 1.0)
    assert excinfo.value.code == ErrorCode.NO_SOLUTION


def test_sphere_non_quantized_hbar():
    """hbar that is not 2/N is refused."""
    with pytest.raises(WickCalcError) as excinfo:
        SphereModel(hbar=0.7)
    assert excinfo.value.code == ErrorCode.NON_QUANTIZED_LEVEL


def test_lambda_h_su11():
    """lambda(A) = 2 hbar A - hbar^2 and Lambda(A, t) = 2 hbar A + hbar^2 t - hbar^2."""
    spec = Su11DiskModel(a=1.0, hbar=0.5).spec
    assert spec.lambda_h(np.array([1.0])) == pytest.approx(0.75)
    assert spec.Lambda_h([1.0], 2.0).real == pytest.approx(1.25)


def test_Lambda_at_zero_is_lambda(rng):
    """Lambda(A, 0) = lambda(A) on samples."""
    for model in (Su11DiskModel(a=1.0, hbar=0.5), ZeemanModel(hbar=1.0)):
        spec = model.spec
        for _ in range(5):
            a = rng.uniform(-2.0, 2.0, spec.flow.dimension)
            assert spec.Lambda_h(a, 0.0) == pytest.approx(complex(spec.lambda_h(a)), abs=1e-12)


def test_flow_group_law_and_invariants():
    """The Zeeman flow composes and preserves A1^2 + 4 A2."""
    flow = ZeemanModel(hbar=1.0).spec.flow
    assert flow.check_group_law() < 1e-12
    assert flow.check_invariants() < 1e-12


def test_classical_limit_of_lambda():
    """(lambda^h - 2 lambda^(h/2)) / h^2 stays bounded as h -> 0."""
    A = np.array([0.7])
    ratios = []
    for h in (1e-1, 1e-2, 1e-3):
        full = Su11DiskModel(a=1.0, hbar=h).spec.lambda_h(A)
        half = Su11DiskModel(a=1.0, hbar=h / 2.0).spec.lambda_h(A)
        ratios.append(abs(full - 2.0 * half) / h**2)
    assert max(ratios) < 1.0


@pytest.mark.parametrize("N", range(1, 17))
def test_sphere_levels_validate(N):
    """Every sphere level passes validation with t_star = (N + 1) hbar."""
    model = SphereModel(N=N)
    report = model.validation
    assert report.passed
    assert report.level == N
    assert report.t_star == pytest.approx((N + 1) * model.hbar, rel=1e-12)
    names = [check.name for check in report.checks]
    assert "rho-increasing" in names
    assert "D(a*)=0" in names


@pytest.mark.parametrize("N", [1, 2, 3, 4])
def test_zeeman_levels_validate(N):
    model = ZeemanModel(N=N, hbar=0.5, a2=1.0)
    assert model.validation.passed
    assert model.level == N


def _translation_spec() -> AlgebraSpec:
    flow = FlowSpec(components=(AxisPolynomial(2, {(1, 0): 1.0, (0, 1): 1.0}),))
    return AlgebraSpec(flow=flow, rho=AxisPolynomial(1, {(2,): 1.0}), hbar=1.0)


def test_rho_must_increase_before_t_star():
    """rho = A^2 from a = -1 first decreases, so the factorization is refused."""
    fact = Factorization(
        g=AxisPolynomial.constant(1, 1.0),
        D=AxisPolynomial(1, {(1,): 1.0, (0,): -1.0}),
        E=AxisPolynomial(1, {(1,): 1.0, (0,): 1.0}),
        vacuum=(-1.0,),
    )
    with pytest.raises(WickCalcError) as excinfo:
        validate_factorization(_translation_spec(), fact)
    assert excinfo.value.code == ErrorCode.INCONSISTENT_FACTORIZATION
    assert "rho(gamma^t a)" in excinfo.value.message


def test_rising_rho_records_invariant():
    """A vacuum on the rising branch passes with a rho-increasing entry."""
    fact = Factorization(
        g=AxisPolynomial.constant(1, 1.0),
        D=AxisPolynomial(1, {(1,): 1.0, (0,): 1.0}),
        E=AxisPolynomial(1, {(1,): 1.0, (0,): -1.0}),
        vacuum=(1.0,),
    )
    checked, report = validate_factorization(_translation_spec(), fact)
    assert checked.t_star == float("inf")
    assert [c.name for c in report.checks if c.name == "rho-increasing"] == ["rho-increasing"]
    assert report.passed
