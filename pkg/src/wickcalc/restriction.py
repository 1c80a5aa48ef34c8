"""Quantum restriction onto leaves, group elements, characters and Casimir eigenvalues."""

import itertools
import math
from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np
from loguru import logger
from pydantic import BaseModel
from scipy.integrate import simpson
from scipy.linalg import expm

from .algebra import AxisPolynomial, monomials
from .errors import ErrorCode, WickCalcError
from .models import Model, SphereModel, ZeemanModel
from .normal_product import NormalPolynomial, casimir_polynomial, star
from .quadrature import ChartGrid
from .representation import (
    OperatorSet,
    WickOperator,
    build_operators,
    build_space,
    casimir_matrix,
)
from .utils import fit_power_law
from .wick import (
    CoherentStates,
    SymbolField,
    star_operator_route,
    star_quadrature_route,
    symbol_at_nodes,
    symbol_from_operator,
    wick_operator_from_symbol,
)

MAX_WEYL_DEGREE = 6

# K = (xi1)^2 + (xi2)^2 + (xi3)^2
SPHERE_CASIMIR = AxisPolynomial(3, {(2, 0, 0): 1.0, (0, 2, 0): 1.0, (0, 0, 2): 1.0})


def lie_generators(model: Model, ops: OperatorSet) -> tuple[WickOperator, ...]:
    """Represented Lie coordinates: ``x1..x3`` on the sphere, ``S0..S3`` for Zeeman."""
    if isinstance(model, SphereModel):
        names = ("x1", "x2", "x3")
    elif isinstance(model, ZeemanModel):
        names = ("S0", "S1", "S2", "S3")
    else:
        raise WickCalcError(ErrorCode.CONFIG_INVALID, f"{model.name} has no Lie coordinates")
    return tuple(ops.extras[name] for name in names)


def weyl_operator(poly: AxisPolynomial, generators: Sequence[WickOperator]) -> WickOperator:
    """``poly(x)`` with every monomial averaged over the orderings of its factors."""
    if poly.nvars != len(generators):
        raise ValueError(f"polynomial has {poly.nvars} variables, got {len(generators)} generators")
    space = generators[0].space
    total = np.zeros((space.dim, space.dim), dtype=complex)
    for exponent, coeff in poly.terms.items():
        degree = sum(exponent)
        if degree > MAX_WEYL_DEGREE:
            raise WickCalcError(
                ErrorCode.DEGREE_LIMIT,
                f"Weyl ordering of degree {degree} exceeds {MAX_WEYL_DEGREE}",
            )
        word = [j for j, power in enumerate(exponent) for _ in range(power)]
        orderings = set(itertools.permutations(word))
        block = np.zeros_like(total)
        for order in orderings:
            product = np.eye(space.dim, dtype=complex)
            for j in order:
                product = product @ generators[j].matrix
            block += product
        total += coeff * block / len(orderings)
    return WickOperator(total, space)


def restriction_operator(
    f: "NormalPolynomial | AxisPolynomial", model: Model, ops: OperatorSet
) -> WickOperator:
    """Normally ordered ``f(B, A, C)`` or Weyl-ordered ``f(x)`` in the representation."""
    if isinstance(f, NormalPolynomial):
        return f.to_operator(ops)
    return weyl_operator(f, lie_generators(model, ops))


def quantum_restriction(
    f: "NormalPolynomial | AxisPolynomial",
    model: Model,
    ops: OperatorSet,
    states: CoherentStates,
    points: np.ndarray | None = None,
) -> SymbolField:
    """``f`` restricted to the quantum leaf: the symbol of its ordered operator."""
    return symbol_from_operator(restriction_operator(f, model, ops), states, points)


# -- first quantum correction on the sphere ----------------------------------------------


def polarized_tensor(xi: np.ndarray) -> np.ndarray:
    """``g_-(xi) = (delta - xi xi^T) / 2`` on the sphere, shape ``(..., 3, 3)``."""
    xi = np.asarray(xi)
    return 0.5 * (np.eye(3) - xi[..., :, None] * xi[..., None, :])


def e1_correction(f: AxisPolynomial, xi: np.ndarray) -> np.ndarray:
    """``e1(f) = (1/2) g_-^(jl) D_j D_l f`` at sphere points ``xi``."""
    xi = np.atleast_2d(np.asarray(xi, dtype=float))
    tensor = polarized_tensor(xi)
    total = np.zeros(xi.shape[0], dtype=complex)
    for j in range(3):
        first = f.derivative(j)
        for l in range(3):
            second = first.derivative(l)
            if second.terms:
                total += tensor[:, j, l] * second(*xi.T)
    return 0.5 * total


def e1_normal_coefficients(xi: np.ndarray) -> dict[str, np.ndarray]:
    """Coefficient of the normal field on ``d/dK`` computed from ``K`` and from ``2K + K^2``."""
    K = SPHERE_CASIMIR
    other = 2.0 * K + K * K
    k_values = K(*np.atleast_2d(xi).T)
    return {
        "K": e1_correction(K, xi),
        # d/dK' = d/dK / (2 + 2K)
        "2K+K^2": e1_correction(other, xi) / (2.0 + 2.0 * k_values),
    }


def random_sphere_points(count: int, rng: np.random.Generator) -> np.ndarray:
    points = rng.normal(size=(count, 3))
    return points / np.linalg.norm(points, axis=1, keepdims=True)


class RestrictionFit(BaseModel):
    hbars: list[float]
    remainders: list[float]
    order: float
    residual: float


def restriction_expansion(
    f: AxisPolynomial,
    xi: np.ndarray,
    levels: Sequence[int] = (8, 16, 32, 64),
) -> RestrictionFit:
    """Order in ``hbar`` of ``f|quantum - f|classical - hbar e1(f)`` on the sphere."""
    nodes = SphereModel.chart_point(xi)
    classical = f(*np.asarray(xi).T)
    correction = e1_correction(f, xi)
    hbars, remainders = [], []
    for N in levels:
        model = SphereModel(N=N)
        ops = build_operators(model, build_space(model))
        quantum = symbol_at_nodes(restriction_operator(f, model, ops), model, nodes)
        remainder = quantum - classical - model.hbar * correction
        hbars.append(model.hbar)
        remainders.append(float(np.max(np.abs(remainder))))
    if max(remainders) <= 1e-12:
        return RestrictionFit(hbars=hbars, remainders=remainders, order=math.inf, residual=0.0)
    order, residual = fit_power_law(hbars, remainders)
    return RestrictionFit(hbars=hbars, remainders=remainders, order=order, residual=residual)


# -- restriction symbol and group elements on the sphere -----------------------------------


def restriction_symbol_closed(xi: np.ndarray, eta: np.ndarray, N: int) -> np.ndarray:
    """``(cos(|eta|/2) + i sin(|eta|/2) <eta, xi>/|eta|)^N exp(-i N <eta, xi> / 2)``."""
    xi = np.atleast_2d(np.asarray(xi, dtype=float))
    eta = np.asarray(eta, dtype=float)
    norm = float(np.linalg.norm(eta))
    projection = xi @ eta
    if norm == 0.0:
        return np.ones(xi.shape[0], dtype=complex)
    base = math.cos(norm / 2.0) + 1j * math.sin(norm / 2.0) * projection / norm
    return base**N * np.exp(-0.5j * N * projection)


def _characteristic(
    xi: np.ndarray, eta: np.ndarray, steps: int, bound: float
) -> tuple[np.ndarray, np.ndarray]:
    """RK4 for ``dXi/dt = i eta g_-(Xi)`` on ``[0, 1]``; returns times and ``<eta, Xi(t)>``."""

    def field(state: np.ndarray) -> np.ndarray:
        return 0.5j * (eta - (eta @ state) * state)

    dt = 1.0 / steps
    state = xi.astype(complex)
    values = np.empty(steps + 1, dtype=complex)
    values[0] = eta @ state
    for step in range(steps):
        k1 = field(state)
        k2 = field(state + 0.5 * dt * k1)
        k3 = field(state + 0.5 * dt * k2)
        k4 = field(state + dt * k3)
        state = state + dt * (k1 + 2.0 * k2 + 2.0 * k3 + k4) / 6.0
        size = float(np.linalg.norm(state))
        if not math.isfinite(size) or size > bound:
            raise WickCalcError(
                ErrorCode.ODE_DIVERGED,
                f"characteristic left |Xi| <= {bound:g} at t={(step + 1) * dt:.4f}",
            )
        values[step + 1] = eta @ state
    return np.linspace(0.0, 1.0, steps + 1), values


def restriction_symbol_ode(
    xi: np.ndarray,
    eta: np.ndarray,
    hbar: float,
    steps: int = 400,
    bound: float = 1e6,
    rtol: float = 1e-9,
    refinements: int = 3,
) -> complex:
    """``exp((i/hbar)(int_0^1 <eta, Xi> dt - <eta, xi>))`` along the complex characteristic.

    The step count doubles until two successive actions agree to ``rtol``; the last
    disagreement is the error estimate, and ``ODE_DIVERGED`` is raised when it stays above.
    """
    xi = np.asarray(xi, dtype=float)
    eta = np.asarray(eta, dtype=float)
    if not np.any(eta):
        return 1.0 + 0.0j

    def action(n_steps: int) -> complex:
        times, values = _characteristic(xi, eta, n_steps, bound)
        return complex(simpson(values, x=times)) - float(eta @ xi)

    previous = action(steps)
    change = math.inf
    for _ in range(refinements + 1):
        steps *= 2
        current = action(steps)
        change = abs(current - previous)
        if change <= rtol * max(1.0, abs(current)):
            return complex(np.exp(1j * current / hbar))
        logger.debug(f"characteristic action changed by {change:.2e} at {steps} steps")
        previous = current
    raise WickCalcError(
        ErrorCode.ODE_DIVERGED,
        f"characteristic action still changes by {change:.2e} at {steps} steps",
        error_estimate=change,
        steps=steps,
    )


@dataclass(frozen=True)
class GroupElementSymbol:
    """Symbol of ``exp((i/hbar) <eta, x>)`` on the level-N sphere."""

    eta: np.ndarray
    N: int

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.eta))

    def __call__(self, xi: np.ndarray) -> np.ndarray:
        xi = np.atleast_2d(np.asarray(xi, dtype=float))
        if self.norm == 0.0:
            return np.ones(xi.shape[0], dtype=complex)
        half = self.norm / 2.0
        projection = xi @ self.eta / self.norm
        return (math.cos(half) + 1j * math.sin(half) * projection) ** self.N


def group_element(N: int, eta: np.ndarray, second_sheet: bool = False) -> GroupElementSymbol:
    """Group element symbol; odd ``N`` needs ``second_sheet`` beyond ``|eta| = 2 pi``."""
    eta = np.asarray(eta, dtype=float)
    norm = float(np.linalg.norm(eta))
    limit = 4.0 * math.pi if second_sheet else 2.0 * math.pi
    if N % 2 == 1 and norm >= limit:
        raise WickCalcError(
            ErrorCode.BRANCH,
            f"|eta|={norm:.6g} leaves the {'second' if second_sheet else 'first'} sheet for odd N={N}",
        )
    return GroupElementSymbol(eta=eta, N=N)


def group_element_operator(ops: OperatorSet, eta: np.ndarray) -> WickOperator:
    """``exp((i/hbar) <eta, x>)`` by matrix exponential."""
    generator = sum(
        (complex(e) * ops.extras[name].matrix for e, name in zip(eta, ("x1", "x2", "x3"), strict=True)),
        np.zeros((ops.space.dim, ops.space.dim), dtype=complex),
    )
    return WickOperator(expm(1j * generator / ops.space.hbar), ops.space)


def character_oracle(N: int, norm: float) -> float:
    """``sin((N+1) t/2) / sin(t/2)``."""
    if abs(math.sin(norm / 2.0)) < 1e-14:
        return (N + 1) * math.cos(norm / 2.0) ** N
    return math.sin((N + 1) * norm / 2.0) / math.sin(norm / 2.0)


def liouville_weights(model: SphereModel, grid: ChartGrid) -> np.ndarray:
    """Weights of ``(1 + hbar/2) dm^omega0 / (2 pi hbar)`` with ``omega0`` the round form."""
    h = model.hbar
    density = 2.0 / (1.0 + grid.radial) ** 2
    return grid.area * (1.0 + h / 2.0) * density / (2.0 * math.pi * h)


def character(model: SphereModel, eta: np.ndarray, grid: ChartGrid) -> complex:
    """``(1/2 pi hbar) int e_* dm`` by quadrature."""
    symbol = group_element(model.N, eta)
    xi = SphereModel.sphere_point(grid.nodes)
    return complex(np.sum(liouville_weights(model, grid) * symbol(xi)))


class CharacterRow(BaseModel):
    norm: float
    re: float
    im: float
    trace: complex
    oracle: float
    abs_err: float


def character_table(
    model: SphereModel,
    ops: OperatorSet,
    grid: ChartGrid,
    norms: Sequence[float] = (0.3, 1.0, 2.0),
    direction: Sequence[float] = (1.0, 2.0, 2.0),
) -> list[CharacterRow]:
    """Quadrature character, matrix trace and oracle for each ``|eta|``."""
    unit = np.asarray(direction, dtype=float)
    unit = unit / np.linalg.norm(unit)
    rows = []
    for norm in norms:
        eta = norm * unit
        value = character(model, eta, grid)
        trace = group_element_operator(ops, eta).trace()
        oracle = character_oracle(model.N, norm)
        error = max(abs(value - oracle), abs(trace - oracle))
        rows.append(
            CharacterRow(
                norm=norm, re=value.real, im=value.imag, trace=trace, oracle=oracle, abs_err=error
            )
        )
    return rows


def group_element_unitarity(eta: np.ndarray, states: CoherentStates) -> float:
    """Sup over interior nodes of ``|e_*(eta) * e_*(-eta) - 1|`` with operators read off symbols."""
    model = states.model
    if not isinstance(model, SphereModel):
        raise WickCalcError(ErrorCode.CONFIG_INVALID, "group elements are defined on the sphere")
    xi = SphereModel.sphere_point(states.grid.nodes)
    forward = SymbolField(states.grid, group_element(model.N, eta)(xi))
    backward = SymbolField(states.grid, group_element(model.N, -np.asarray(eta))(xi))
    product = star_operator_route(
        wick_operator_from_symbol(forward, states),
        wick_operator_from_symbol(backward, states),
        states,
        states.sample(),
    )
    return float(np.max(np.abs(product.values - 1.0)))


def concentration_rate(
    eta: np.ndarray, levels: Sequence[int] = (8, 16, 32), xi: np.ndarray | None = None
) -> float:
    """Largest ``c`` with ``|e_*(xi)| <= exp(-c N dist(xi, +-eta/|eta|)^2)`` on sample points."""
    eta = np.asarray(eta, dtype=float)
    unit = eta / np.linalg.norm(eta)
    if xi is None:
        xi = random_sphere_points(400, np.random.default_rng(7))
    distance = np.minimum(np.linalg.norm(xi - unit, axis=1), np.linalg.norm(xi + unit, axis=1))
    keep = distance > 1e-3
    rate = math.inf
    for N in levels:
        modulus = np.abs(group_element(N, eta)(xi[keep]))
        with np.errstate(divide="ignore"):
            ratios = -np.log(modulus) / (N * distance[keep] ** 2)
        rate = min(rate, float(np.min(ratios)))
    return rate


# -- Casimir eigenvalues and the homomorphism property --------------------------------------


class CasimirEigenvalue(BaseModel):
    value: float
    spread: float
    matrix_value: float


def casimir_eigenvalue(
    model: Model,
    ops: OperatorSet,
    states: CoherentStates,
    points: np.ndarray | None = None,
    tol: float = 1e-10,
    margin: int = 2,
) -> CasimirEigenvalue:
    """Restriction of the Casimir element; constant over the leaf."""
    casimir: "NormalPolynomial | AxisPolynomial"
    if isinstance(model, SphereModel):
        casimir = SPHERE_CASIMIR
    else:
        casimir = casimir_polynomial(model.spec)
    points = states.sample() if points is None else points
    symbol = quantum_restriction(casimir, model, ops, states, points)
    values = symbol.values
    mean = complex(np.mean(values))
    spread = float(np.max(np.abs(values - mean)))
    if spread > tol * max(1.0, abs(mean)):
        raise WickCalcError(
            ErrorCode.NOT_CONSTANT,
            f"Casimir restriction of {model.name} varies by {spread:.3e}",
        )
    matrix = casimir_matrix(model, ops, margin)
    index = ops.space.interior(margin)
    matrix_value = float(np.mean(np.real(np.diag(matrix.matrix)[index])))
    return CasimirEigenvalue(value=mean.real, spread=spread, matrix_value=matrix_value)


def random_normal_polynomial(
    nvars: int, rng: np.random.Generator, max_degree: int = 2
) -> NormalPolynomial:
    """Normally ordered polynomial with Gaussian complex coefficients up to ``max_degree``."""
    terms = {}
    for beta in range(max_degree + 1):
        for gamma in range(max_degree + 1 - beta):
            for alpha in monomials(nvars, max_degree - beta - gamma):
                terms[(beta, alpha, gamma)] = complex(rng.normal(), rng.normal())
    return NormalPolynomial.from_terms(nvars, terms)


def homomorphism_residual(
    f: NormalPolynomial,
    g: NormalPolynomial,
    model: Model,
    ops: OperatorSet,
    states: CoherentStates,
    points: np.ndarray,
) -> float:
    """``sup |(f star g)|quantum - f|quantum * g|quantum|`` with the Wick product by quadrature."""
    product = star(f, g, model.spec)
    lhs = quantum_restriction(product, model, ops, states, points)
    rhs = star_quadrature_route(f.to_operator(ops), g.to_operator(ops), states, points)
    return float(np.max(np.abs(lhs.values - rhs.values)))
