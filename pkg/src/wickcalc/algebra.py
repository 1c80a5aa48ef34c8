"""Algebra data of a quadratic Poisson model: flow, factorization, vacuum level."""

from collections.abc import Callable, Iterable, Mapping, Sequence
from dataclasses import dataclass, field, replace
from itertools import product as cartesian
from typing import Any

import numpy as np
from loguru import logger
from pydantic import BaseModel
from scipy.optimize import brentq

from .errors import ErrorCode, WickCalcError

Exponent = tuple[int, ...]

_COEFF_TOL = 1e-14
# Smallest relative tolerance brentq accepts.
BRENTQ_RTOL = 4.0 * float(np.finfo(float).eps)


class AxisPolynomial:
    """Multivariate polynomial with complex coefficients, keyed by exponent tuples."""

    __slots__ = ("nvars", "terms")

    def __init__(self, nvars: int, terms: Mapping[Exponent, complex] | None = None) -> None:
        self.nvars = nvars
        self.terms: dict[Exponent, complex] = {}
        for exponent, coeff in (terms or {}).items():
            if len(exponent) != nvars:
                raise ValueError(f"exponent {exponent} does not have {nvars} entries")
            value = complex(coeff)
            if value != 0:
                key = tuple(int(e) for e in exponent)
                self.terms[key] = self.terms.get(key, 0j) + value

    # -- constructors --------------------------------------------------------

    @classmethod
    def constant(cls, nvars: int, value: complex) -> "AxisPolynomial":
        return cls(nvars, {(0,) * nvars: value})

    @classmethod
    def variable(cls, nvars: int, index: int) -> "AxisPolynomial":
        exponent = [0] * nvars
        exponent[index] = 1
        return cls(nvars, {tuple(exponent): 1.0})

    @classmethod
    def from_coefficients(cls, coefficients: Sequence[complex]) -> "AxisPolynomial":
        """Univariate polynomial from ascending coefficients."""
        return cls(1, {(power,): c for power, c in enumerate(coefficients)})

    # -- inspection ----------------------------------------------------------

    @property
    def degree(self) -> int:
        return max((sum(e) for e in self.terms), default=0)

    @property
    def is_real(self) -> bool:
        return all(abs(c.imag) <= _COEFF_TOL * max(1.0, abs(c)) for c in self.terms.values())

    def is_zero(self, tol: float = 0.0) -> bool:
        return all(abs(c) <= tol for c in self.terms.values())

    def max_coefficient(self) -> float:
        return max((abs(c) for c in self.terms.values()), default=0.0)

    def coefficient(self, exponent: Exponent) -> complex:
        return self.terms.get(tuple(exponent), 0j)

    def __repr__(self) -> str:
        return f"AxisPolynomial({self.nvars}, {self.terms!r})"

    # -- arithmetic ----------------------------------------------------------

    def _coerce(self, other: Any) -> "AxisPolynomial":
        if isinstance(other, AxisPolynomial):
            if other.nvars != self.nvars:
                raise ValueError("polynomials over different variable counts")
            return other
        return AxisPolynomial.constant(self.nvars, complex(other))

    def __add__(self, other: Any) -> "AxisPolynomial":
        rhs = self._coerce(other)
        terms = dict(self.terms)
        for exponent, coeff in rhs.terms.items():
            terms[exponent] = terms.get(exponent, 0j) + coeff
        return AxisPolynomial(self.nvars, terms)

    __radd__ = __add__

    def __neg__(self) -> "AxisPolynomial":
        return AxisPolynomial(self.nvars, {e: -c for e, c in self.terms.items()})

    def __sub__(self, other: Any) -> "AxisPolynomial":
        return self + (-self._coerce(other))

    def __rsub__(self, other: Any) -> "AxisPolynomial":
        return self._coerce(other) - self

    def __mul__(self, other: Any) -> "AxisPolynomial":
        rhs = self._coerce(other)
        terms: dict[Exponent, complex] = {}
        for (e1, c1), (e2, c2) in cartesian(self.terms.items(), rhs.terms.items()):
            key = tuple(a + b for a, b in zip(e1, e2, strict=True))
            terms[key] = terms.get(key, 0j) + c1 * c2
        return AxisPolynomial(self.nvars, terms)

    __rmul__ = __mul__

    def __pow__(self, power: int) -> "AxisPolynomial":
        if power < 0:
            raise ValueError("negative powers are not polynomials")
        result = AxisPolynomial.constant(self.nvars, 1.0)
        base = self
        while power:
            if power & 1:
                result = result * base
            base = base * base
            power >>= 1
        return result

    def conjugate(self) -> "AxisPolynomial":
        return AxisPolynomial(self.nvars, {e: c.conjugate() for e, c in self.terms.items()})

    def allclose(self, other: "AxisPolynomial", tol: float = 1e-12) -> bool:
        return (self - other).is_zero(tol)

    # -- evaluation and substitution -------------------------------------------

    def __call__(self, *values: Any) -> Any:
        """Evaluate with numpy broadcasting; real inputs and coefficients give real output."""
        if len(values) != self.nvars:
            raise ValueError(f"expected {self.nvars} values, got {len(values)}")
        arrays = [np.asarray(v) for v in values]
        shape = np.broadcast_shapes(*(a.shape for a in arrays)) if arrays else ()
        total = np.zeros(shape, dtype=complex)
        for exponent, coeff in self.terms.items():
            term = np.full(shape, coeff, dtype=complex)
            for array, power in zip(arrays, exponent, strict=True):
                if power:
                    term = term * array**power
            total = total + term
        if self.is_real and all(not np.iscomplexobj(a) for a in arrays):
            total = total.real
        return total if shape else total[()]

    def compose(self, substitutions: Sequence["AxisPolynomial"]) -> "AxisPolynomial":
        """Substitute polynomial ``substitutions[i]`` for variable ``i``."""
        if len(substitutions) != self.nvars:
            raise ValueError("one substitution per variable is required")
        nvars = substitutions[0].nvars if substitutions else 0
        result = AxisPolynomial(nvars)
        powers: list[dict[int, AxisPolynomial]] = [{} for _ in substitutions]
        for exponent, coeff in self.terms.items():
            term = AxisPolynomial.constant(nvars, coeff)
            for index, power in enumerate(exponent):
                if power:
                    cache = powers[index]
                    if power not in cache:
                        cache[power] = substitutions[index] ** power
                    term = term * cache[power]
            result = result + term
        return result

    def partial(self, index: int, value: complex) -> "AxisPolynomial":
        """Fix variable ``index`` to a number; the result has one variable fewer."""
        terms: dict[Exponent, complex] = {}
        for exponent, coeff in self.terms.items():
            key = exponent[:index] + exponent[index + 1 :]
            terms[key] = terms.get(key, 0j) + coeff * complex(value) ** exponent[index]
        return AxisPolynomial(self.nvars - 1, terms)

    def lift(self, nvars: int, offset: int) -> "AxisPolynomial":
        """Embed into ``nvars`` variables, shifting variable ``i`` to ``i + offset``."""
        terms = {}
        for exponent, coeff in self.terms.items():
            key = [0] * nvars
            key[offset : offset + self.nvars] = exponent
            terms[tuple(key)] = coeff
        return AxisPolynomial(nvars, terms)

    def derivative(self, index: int) -> "AxisPolynomial":
        terms: dict[Exponent, complex] = {}
        for exponent, coeff in self.terms.items():
            power = exponent[index]
            if power:
                key = exponent[:index] + (power - 1,) + exponent[index + 1 :]
                terms[key] = terms.get(key, 0j) + coeff * power
        return AxisPolynomial(self.nvars, terms)

    def univariate_coefficients(self) -> np.ndarray:
        """Ascending coefficients of a one-variable polynomial."""
        if self.nvars != 1:
            raise ValueError("not a univariate polynomial")
        coeffs = np.zeros(self.degree + 1, dtype=complex)
        for (power,), coeff in self.terms.items():
            coeffs[power] += coeff
        return coeffs

    def to_dict(self) -> dict[str, Any]:
        ordered = sorted(self.terms.items())
        return {
            "nvars": self.nvars,
            "exponents": [list(e) for e, _ in ordered],
            "coefficients": [[c.real, c.imag] for _, c in ordered],
        }


def monomials(nvars: int, max_degree: int) -> Iterable[Exponent]:
    """All exponent tuples of total degree at most ``max_degree``."""
    for exponent in cartesian(range(max_degree + 1), repeat=nvars):
        if sum(exponent) <= max_degree:
            yield exponent


@dataclass(frozen=True)
class FlowSpec:
    """Polynomial flow ``gamma^t`` on the axis, written in variables ``(t, A_1..A_k)``."""

    components: tuple[AxisPolynomial, ...]
    invariants: tuple[AxisPolynomial, ...] = ()

    @property
    def dimension(self) -> int:
        return len(self.components)

    def at(self, t: float) -> tuple[AxisPolynomial, ...]:
        """Components of ``gamma^t`` as polynomials in the axis variables."""
        return tuple(component.partial(0, t) for component in self.components)

    def trajectory(self, t: float, a: Sequence[float]) -> np.ndarray:
        return np.array([c(t, *a) for c in self.components])

    def apply(self, t: float, values: np.ndarray) -> np.ndarray:
        """Apply ``gamma^t`` to an array of axis points of shape ``(k, ...)``."""
        return np.array([c(t, *values) for c in self.components])

    def check_group_law(self, samples: int = 16, seed: int = 0) -> float:
        """Max residual of ``gamma^s(gamma^t(a)) = gamma^(s+t)(a)`` and ``gamma^0 = id``."""
        rng = np.random.default_rng(seed)
        worst = 0.0
        for _ in range(samples):
            a = rng.uniform(-2.0, 2.0, self.dimension)
            s, t = rng.uniform(-2.0, 2.0, 2)
            lhs = self.trajectory(s, self.trajectory(t, a))
            rhs = self.trajectory(s + t, a)
            worst = max(worst, float(np.max(np.abs(lhs - rhs))))
            worst = max(worst, float(np.max(np.abs(self.trajectory(0.0, a) - a))))
        return worst

    def check_invariants(self, samples: int = 16, seed: int = 1) -> float:
        """Max variation of the declared invariants along trajectories."""
        rng = np.random.default_rng(seed)
        worst = 0.0
        for invariant in self.invariants:
            for _ in range(samples):
                a = rng.uniform(-2.0, 2.0, self.dimension)
                t = rng.uniform(-2.0, 2.0)
                delta = invariant(*self.trajectory(t, a)) - invariant(*a)
                worst = max(worst, float(abs(delta)))
        return worst


@dataclass(frozen=True)
class AlgebraSpec:
    """Flow, quadratic-structure potential ``rho`` and Planck constant."""

    flow: FlowSpec
    rho: AxisPolynomial
    hbar: float
    name: str = ""
    _rho_flow: AxisPolynomial = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        if self.rho.nvars != self.flow.dimension:
            raise ValueError("rho must be a polynomial on the axis")
        object.__setattr__(self, "_rho_flow", self.rho.compose(list(self.flow.components)))

    def along(self, poly: AxisPolynomial, t: float, a: Sequence[float]) -> complex:
        """Value of an axis polynomial on the flow line through ``a``."""
        return complex(poly(*self.flow.trajectory(t, a)))

    def rho_flow(self) -> AxisPolynomial:
        """``rho(gamma^t A)`` as a polynomial in ``(t, A)``."""
        return self._rho_flow

    def lambda_h_poly(self) -> AxisPolynomial:
        return self.rho - self._rho_flow.partial(0, -self.hbar)

    def lambda_h(self, values: Any) -> Any:
        """``lambda^hbar(A) = rho(A) - rho(gamma^(-hbar) A)``; ``values`` has shape ``(k, ...)``."""
        values = np.asarray(values)
        return self.lambda_h_poly()(*values)

    def Lambda_h(self, values: Sequence[float], t: float) -> complex:
        """``(rho(gamma^(t hbar) A) - rho(gamma^(-hbar) A)) / (t + 1)`` as a polynomial identity."""
        line = self._rho_flow
        for value in values:
            line = line.partial(1, value)
        s_poly = np.polynomial.Polynomial(line.univariate_coefficients())
        # s = hbar * (u - 1): the numerator vanishes at u = 0
        u_poly = s_poly(np.polynomial.Polynomial([-self.hbar, self.hbar]))
        quotient = np.polynomial.Polynomial(u_poly.coef[1:] if u_poly.coef.size > 1 else [0.0])
        return complex(quotient(t + 1.0))

    def Lambda_h_poly(self, beta: int) -> AxisPolynomial:
        """``rho(gamma^((beta-1) hbar) A) - rho(gamma^(-hbar) A)``, i.e. ``beta * Lambda(A, beta-1)``."""
        return self._rho_flow.partial(0, (beta - 1) * self.hbar) - self._rho_flow.partial(
            0, -self.hbar
        )


@dataclass(frozen=True)
class Factorization:
    """Factorization ``rho - g = D * E`` with vacuum ``a`` and derived level data."""

    g: AxisPolynomial
    D: AxisPolynomial
    E: AxisPolynomial
    vacuum: tuple[float, ...]
    chart: str = "radial"
    polar: tuple[float, ...] | None = None
    t_star: float | None = None
    level: int | None = None

    @property
    def compact(self) -> bool:
        return self.t_star is not None and bool(np.isfinite(self.t_star))

    def script_D(self, spec: AlgebraSpec, t: float) -> complex:
        return spec.along(self.D, t, self.vacuum)

    def script_E(self, spec: AlgebraSpec, t: float) -> complex:
        return spec.along(self.E, t, self.vacuum)


class InvariantCheck(BaseModel):
    name: str
    passed: bool
    residual: float


class ValidationReport(BaseModel):
    """Outcome of :func:`validate_factorization`."""

    t_star: float
    level: int | None
    checks: list[InvariantCheck]

    @property
    def passed(self) -> bool:
        return all(check.passed for check in self.checks)


def rho_gain(spec: AlgebraSpec, vacuum: Sequence[float]) -> np.polynomial.Polynomial:
    """``rho(gamma^t a) - rho(a)`` as a polynomial in ``t``."""
    rho_line = spec.rho_flow()
    for value in vacuum:
        rho_line = rho_line.partial(1, value)
    coeffs = rho_line.univariate_coefficients()
    coeffs[0] = 0.0
    return np.polynomial.Polynomial(coeffs.real)


def _scan_times(t_max: float, samples: int) -> np.ndarray:
    return np.unique(
        np.concatenate([np.geomspace(t_max * 1e-9, t_max, 512), np.linspace(0.0, t_max, samples + 1)[1:]])
    )


def find_t_star(
    spec: AlgebraSpec, vacuum: Sequence[float], t_max: float = 64.0, samples: int = 4096
) -> float:
    """Smallest ``t > 0`` with ``rho(gamma^t a) = rho(a)``; ``inf`` if none in ``(0, t_max]``."""
    poly = rho_gain(spec, vacuum)
    if np.max(np.abs(poly.coef), initial=0.0) == 0.0:
        return float("inf")
    grid = _scan_times(t_max, samples)
    values = poly(grid)
    scale = float(np.max(np.abs(values))) or 1.0
    reference = np.sign(values[0])
    for index, value in enumerate(values):
        if abs(value) <= 1e-15 * scale:
            return float(grid[index])
        if np.sign(value) != reference:
            left = grid[index - 1] if index else grid[0] * 1e-6
            return float(brentq(poly, left, grid[index], xtol=1e-12, rtol=BRENTQ_RTOL))
    return float("inf")


def validate_factorization(
    spec: AlgebraSpec,
    fact: Factorization,
    tol: float = 1e-9,
    t_max: float = 64.0,
) -> tuple[Factorization, ValidationReport]:
    """Check the factorization identities and derive ``t_star`` and the level ``N``."""
    k = spec.flow.dimension
    checks: list[InvariantCheck] = []
    scale = max(1.0, spec.rho.max_coefficient())

    identity = fact.D * fact.E - (spec.rho - fact.g)
    residual = identity.max_coefficient() / scale
    checks.append(InvariantCheck(name="rho-g=DE", passed=residual <= tol, residual=residual))
    if residual > tol:
        raise WickCalcError(
            ErrorCode.INCONSISTENT_FACTORIZATION,
            f"rho - g - D*E has coefficient {residual:.3e}",
            residual=residual,
        )

    lifted = [AxisPolynomial.variable(k + 1, i + 1) for i in range(k)]
    drift = fact.g.compose(list(spec.flow.components)) - fact.g.compose(lifted)
    residual = drift.max_coefficient() / scale
    checks.append(InvariantCheck(name="g-flow-invariant", passed=residual <= tol, residual=residual))
    if residual > tol:
        raise WickCalcError(
            ErrorCode.INCONSISTENT_FACTORIZATION, "g is not constant along the flow"
        )

    if fact.chart == "strip":
        # Strip models have no vacuum; the lowest weight lives at n -> -infinity.
        report = ValidationReport(t_star=float("inf"), level=None, checks=checks)
        return replace(fact, t_star=float("inf"), level=None), report

    e_at_vacuum = abs(fact.E(*fact.vacuum))
    d_at_vacuum = abs(fact.D(*fact.vacuum))
    checks.append(InvariantCheck(name="E(a)=0", passed=e_at_vacuum <= tol, residual=e_at_vacuum))
    checks.append(InvariantCheck(name="D(a)!=0", passed=d_at_vacuum > tol, residual=d_at_vacuum))
    if e_at_vacuum > tol or d_at_vacuum <= tol:
        raise WickCalcError(
            ErrorCode.INCONSISTENT_FACTORIZATION,
            f"vacuum conditions fail: |E(a)|={e_at_vacuum:.3e}, |D(a)|={d_at_vacuum:.3e}",
        )

    t_star = find_t_star(spec, fact.vacuum, t_max=t_max)
    times = _scan_times(min(t_star, t_max), 1024)
    if np.isfinite(t_star):
        times = times[times < t_star * (1.0 - 1e-9)]
    gain = rho_gain(spec, fact.vacuum)(times)
    drop = max(0.0, -float(np.min(gain))) / scale
    rising = bool(np.all(gain > 0.0))
    checks.append(InvariantCheck(name="rho-increasing", passed=rising, residual=drop))
    if not rising:
        first = float(times[np.argmax(gain <= 0.0)])
        raise WickCalcError(
            ErrorCode.INCONSISTENT_FACTORIZATION,
            f"rho(gamma^t a) <= rho(a) at t={first:.6g} before t_star={t_star:.6g}",
            t=first,
        )

    level = None
    if np.isfinite(t_star):
        d_at_polar = abs(fact.script_D(spec, t_star))
        residual = d_at_polar / max(1.0, d_at_vacuum)
        checks.append(InvariantCheck(name="D(a*)=0", passed=residual <= tol, residual=residual))
        if residual > tol:
            raise WickCalcError(
                ErrorCode.INCONSISTENT_FACTORIZATION,
                f"D does not vanish at gamma^t_star(a): |D(a*)|={d_at_polar:.3e}",
            )
        ratio = t_star / spec.hbar - 1.0
        level = int(round(ratio))
        gap = abs(ratio - level)
        checks.append(InvariantCheck(name="level-integer", passed=gap <= tol, residual=gap))
        if gap > tol or level < 0:
            raise WickCalcError(
                ErrorCode.NON_QUANTIZED_LEVEL,
                f"t_star/hbar - 1 = {ratio:.12g} is not a non-negative integer",
                t_star=t_star,
            )
    logger.debug(f"Validated factorization of {spec.name or 'model'}: t_star={t_star}, N={level}")
    report = ValidationReport(t_star=t_star, level=level, checks=checks)
    return replace(fact, t_star=t_star, level=level), report


FactorizationFamily = Callable[[float, tuple[float, ...] | None], tuple[AlgebraSpec, Factorization]]


def quantize_level(
    family: FactorizationFamily,
    N: int,
    hbar: float,
    vacuum: Sequence[float] | None = None,
    mode: str = "vacuum",
    t_max: float = 64.0,
) -> tuple[AlgebraSpec, Factorization]:
    """Adjust the vacuum (``mode="vacuum"``) or hbar (``mode="hbar"``) so ``t_star = (N+1) hbar``.

    ``family(hbar, vacuum)`` must build an unvalidated factorization; ``vacuum=None`` asks for
    the family's canonical vacuum at that hbar.
    """
    if N < 1:
        raise WickCalcError(ErrorCode.NO_SOLUTION, f"level N={N} is excluded (need N >= 1)")

    def t_star_of(h: float, a: tuple[float, ...] | None) -> float:
        spec, fact = family(h, a)
        return find_t_star(spec, fact.vacuum, t_max=t_max)

    if mode == "hbar":

        def mismatch(h: float) -> float:
            return t_star_of(h, None) / h - (N + 1)

        grid = np.geomspace(1e-4, 1e2, 241)
    elif mode == "vacuum":
        _, base = family(hbar, tuple(vacuum) if vacuum is not None else None)
        first, rest = base.vacuum[0], tuple(base.vacuum[1:])
        span = 4.0 * (N + 1) * hbar + 4.0 * abs(first) + 1.0

        def mismatch(x: float) -> float:
            return t_star_of(hbar, (x, *rest)) - (N + 1) * hbar

        grid = np.linspace(-span, span, 801)
    else:
        raise ValueError(f"unknown quantization mode {mode!r}")

    values = np.array([mismatch(float(x)) for x in grid])
    for left, right, f_left, f_right in zip(grid[:-1], grid[1:], values[:-1], values[1:]):
        if not (np.isfinite(f_left) and np.isfinite(f_right)):
            continue
        if f_left == 0.0 or np.sign(f_left) != np.sign(f_right):
            root = float(left) if f_left == 0.0 else float(brentq(mismatch, left, right, xtol=1e-14))
            if mode == "hbar":
                spec, fact = family(root, None)
            else:
                spec, fact = family(hbar, (root, *rest))
            fact, _ = validate_factorization(spec, fact, t_max=t_max)
            if fact.level != N:
                continue
            logger.debug(f"Quantized level N={N} ({mode}): root={root:.15g}")
            return spec, fact
    raise WickCalcError(ErrorCode.NO_SOLUTION, f"no {mode} gives level N={N}")
