"""Normal star product on polynomials in (B, A, C) through the left regular representation."""

import re
from collections.abc import Callable, Mapping
from dataclasses import replace
from typing import Any, NamedTuple

import numpy as np

from .algebra import AlgebraSpec, AxisPolynomial, Exponent
from .representation import OperatorSet, WickOperator

Block = tuple[int, int]
TermKey = tuple[int, Exponent, int]


class NormalPolynomial:
    """Sum of normally ordered monomials ``B^beta A^alpha C^gamma``.

    Terms are grouped by ``(beta, gamma)``; each group holds an :class:`AxisPolynomial` in ``A``.
    """

    __slots__ = ("nvars", "blocks")

    def __init__(self, nvars: int, blocks: Mapping[Block, AxisPolynomial] | None = None) -> None:
        self.nvars = nvars
        self.blocks: dict[Block, AxisPolynomial] = {}
        for key, poly in (blocks or {}).items():
            self._accumulate(key, poly)

    def _accumulate(self, key: Block, poly: AxisPolynomial) -> None:
        if poly.nvars != self.nvars:
            raise ValueError("axis polynomial has the wrong number of variables")
        total = self.blocks[key] + poly if key in self.blocks else poly
        if total.terms:
            self.blocks[key] = total
        else:
            self.blocks.pop(key, None)

    # -- constructors ----------------------------------------------------------

    @classmethod
    def from_terms(cls, nvars: int, terms: Mapping[TermKey, complex]) -> "NormalPolynomial":
        result = cls(nvars)
        for (beta, alpha, gamma), coeff in terms.items():
            result._accumulate((beta, gamma), AxisPolynomial(nvars, {tuple(alpha): coeff}))
        return result

    @classmethod
    def constant(cls, nvars: int, value: complex) -> "NormalPolynomial":
        return cls(nvars, {(0, 0): AxisPolynomial.constant(nvars, value)})

    @classmethod
    def from_axis(cls, poly: AxisPolynomial) -> "NormalPolynomial":
        return cls(poly.nvars, {(0, 0): poly})

    @classmethod
    def generator(cls, nvars: int, name: str) -> "NormalPolynomial":
        """``"B"``, ``"C"``, ``"A"`` (one-dimensional axis) or ``"A1"``, ``"A2"``, ..."""
        one = AxisPolynomial.constant(nvars, 1.0)
        if name == "B":
            return cls(nvars, {(1, 0): one})
        if name == "C":
            return cls(nvars, {(0, 1): one})
        index = 0 if name == "A" else int(name[1:]) - 1
        return cls(nvars, {(0, 0): AxisPolynomial.variable(nvars, index)})

    # -- inspection ------------------------------------------------------------

    @property
    def terms(self) -> dict[TermKey, complex]:
        return {
            (beta, alpha, gamma): coeff
            for (beta, gamma), poly in self.blocks.items()
            for alpha, coeff in poly.terms.items()
        }

    @property
    def degree(self) -> int:
        return max(
            (beta + gamma + poly.degree for (beta, gamma), poly in self.blocks.items()), default=0
        )

    def max_coefficient(self) -> float:
        return max((abs(c) for c in self.terms.values()), default=0.0)

    def is_zero(self, tol: float = 0.0) -> bool:
        return self.max_coefficient() <= tol

    def allclose(self, other: "NormalPolynomial", tol: float = 1e-12) -> bool:
        return (self - other).is_zero(tol)

    def __repr__(self) -> str:
        return f"NormalPolynomial({format_normal(self)})"

    # -- arithmetic ------------------------------------------------------------

    def _coerce(self, other: Any) -> "NormalPolynomial":
        if isinstance(other, NormalPolynomial):
            return other
        return NormalPolynomial.constant(self.nvars, complex(other))

    def __add__(self, other: Any) -> "NormalPolynomial":
        result = NormalPolynomial(self.nvars, self.blocks)
        for key, poly in self._coerce(other).blocks.items():
            result._accumulate(key, poly)
        return result

    __radd__ = __add__

    def __neg__(self) -> "NormalPolynomial":
        return NormalPolynomial(self.nvars, {k: -p for k, p in self.blocks.items()})

    def __sub__(self, other: Any) -> "NormalPolynomial":
        return self + (-self._coerce(other))

    def __rsub__(self, other: Any) -> "NormalPolynomial":
        return self._coerce(other) - self

    def scale(self, value: complex) -> "NormalPolynomial":
        return NormalPolynomial(self.nvars, {k: p * value for k, p in self.blocks.items()})

    def commutative_product(self, other: "NormalPolynomial") -> "NormalPolynomial":
        """Pointwise product treating ``B, A, C`` as commuting variables."""
        result = NormalPolynomial(self.nvars)
        for (b1, g1), p1 in self.blocks.items():
            for (b2, g2), p2 in other.blocks.items():
                result._accumulate((b1 + b2, g1 + g2), p1 * p2)
        return result

    def partial_derivative(self, name: str) -> "NormalPolynomial":
        result = NormalPolynomial(self.nvars)
        for (beta, gamma), poly in self.blocks.items():
            if name == "B" and beta:
                result._accumulate((beta - 1, gamma), poly * beta)
            elif name == "C" and gamma:
                result._accumulate((beta, gamma - 1), poly * gamma)
            elif name.startswith("A"):
                index = 0 if name == "A" else int(name[1:]) - 1
                result._accumulate((beta, gamma), poly.derivative(index))
        return result

    def evaluate(self, b: complex, a: Any, c: complex) -> complex:
        """Value as a commutative polynomial (classical function on the ambient space)."""
        a = np.atleast_1d(a)
        return complex(
            sum(
                b**beta * c**gamma * complex(poly(*a))
                for (beta, gamma), poly in self.blocks.items()
            )
        )

    def to_operator(self, ops: OperatorSet) -> WickOperator:
        """``sum c B^beta p(A) C^gamma`` with the represented generators, in that order."""
        space = ops.space
        axis = ops.axis_values()
        total = np.zeros((space.dim, space.dim), dtype=complex)
        powers_b: dict[int, np.ndarray] = {}
        powers_c: dict[int, np.ndarray] = {}
        for (beta, gamma), poly in self.blocks.items():
            if beta not in powers_b:
                powers_b[beta] = np.linalg.matrix_power(ops.B.matrix, beta)
            if gamma not in powers_c:
                powers_c[gamma] = np.linalg.matrix_power(ops.C.matrix, gamma)
            diagonal = np.broadcast_to(np.asarray(poly(*axis), dtype=complex), (space.dim,))
            total += (powers_b[beta] * diagonal[None, :]) @ powers_c[gamma]
        return WickOperator(total, space)


class LeftRegular(NamedTuple):
    """Left multiplication operators ``L_B``, ``L_A = (L_A1, ...)`` and ``L_C``."""

    B: Callable[[NormalPolynomial], NormalPolynomial]
    A: tuple[Callable[[NormalPolynomial], NormalPolynomial], ...]
    C: Callable[[NormalPolynomial], NormalPolynomial]


def left_regular(spec: AlgebraSpec) -> LeftRegular:
    """Left regular representation of the permutation relations.

    ``L_B`` multiplies by ``B``; ``L_A`` moves ``A`` through ``B^beta`` as ``gamma^(beta hbar)(A)``;
    ``L_C`` moves ``C`` through ``p(A)`` as a shift and through ``B^beta`` picking up
    ``rho(gamma^((beta-1) hbar) A) - rho(gamma^(-hbar) A)``.
    """
    h = spec.hbar
    flow_cache: dict[float, tuple[AxisPolynomial, ...]] = {}
    sum_cache: dict[int, AxisPolynomial] = {}

    def flow_at(t: float) -> tuple[AxisPolynomial, ...]:
        if t not in flow_cache:
            flow_cache[t] = spec.flow.at(t)
        return flow_cache[t]

    def lambda_sum(beta: int) -> AxisPolynomial:
        if beta not in sum_cache:
            sum_cache[beta] = spec.Lambda_h_poly(beta)
        return sum_cache[beta]

    def apply_b(g: NormalPolynomial) -> NormalPolynomial:
        return NormalPolynomial(g.nvars, {(b + 1, c): p for (b, c), p in g.blocks.items()})

    def make_apply_a(index: int) -> Callable[[NormalPolynomial], NormalPolynomial]:
        def apply_a(g: NormalPolynomial) -> NormalPolynomial:
            return NormalPolynomial(
                g.nvars, {(b, c): flow_at(b * h)[index] * p for (b, c), p in g.blocks.items()}
            )

        return apply_a

    def apply_c(g: NormalPolynomial) -> NormalPolynomial:
        result = NormalPolynomial(g.nvars)
        shifted = list(flow_at(h))
        for (b, c), p in g.blocks.items():
            result._accumulate((b, c + 1), p.compose(shifted))
            if b:
                result._accumulate((b - 1, c), lambda_sum(b) * p)
        return result

    return LeftRegular(
        B=apply_b,
        A=tuple(make_apply_a(j) for j in range(spec.flow.dimension)),
        C=apply_c,
    )


def star(f: NormalPolynomial, g: NormalPolynomial, spec: AlgebraSpec) -> NormalPolynomial:
    """``f(L_B, L_A, L_C) g``: ``L_C`` acts first, then the ``L_A``, then ``L_B``."""
    left = left_regular(spec)
    result = NormalPolynomial(g.nvars)
    for (beta, alpha, gamma), coeff in f.terms.items():
        term = g
        for _ in range(gamma):
            term = left.C(term)
        for index, power in enumerate(alpha):
            for _ in range(power):
                term = left.A[index](term)
        for _ in range(beta):
            term = left.B(term)
        result = result + term.scale(coeff)
    return result


def casimir_polynomial(spec: AlgebraSpec) -> NormalPolynomial:
    """``K = rho(A) - C * B`` written in normal order."""
    nvars = spec.flow.dimension
    c_star_b = star(
        NormalPolynomial.generator(nvars, "C"), NormalPolynomial.generator(nvars, "B"), spec
    )
    return NormalPolynomial.from_axis(spec.rho) - c_star_b


def casimir_centrality(spec: AlgebraSpec, f: NormalPolynomial) -> float:
    """Largest coefficient of ``K * f - f * K``."""
    casimir = casimir_polynomial(spec)
    return (star(casimir, f, spec) - star(f, casimir, spec)).max_coefficient()


def associativity_residual(
    f: NormalPolynomial, g: NormalPolynomial, k: NormalPolynomial, spec: AlgebraSpec
) -> float:
    return (star(star(f, g, spec), k, spec) - star(f, star(g, k, spec), spec)).max_coefficient()


def poisson_bracket(spec: AlgebraSpec, f: NormalPolynomial, g: NormalPolynomial) -> NormalPolynomial:
    """Classical bracket with ``{C,B} = i v(rho)``, ``{C,A_j} = i v_j C``, ``{B,A_j} = -i v_j B``."""
    nvars = spec.flow.dimension
    velocity = [c.derivative(0).partial(0, 0.0) for c in spec.flow.components]
    v_rho = spec.rho_flow().derivative(0).partial(0, 0.0)
    b = NormalPolynomial.generator(nvars, "B")
    c = NormalPolynomial.generator(nvars, "C")
    names = ["B", "C"] + ([f"A{j + 1}" for j in range(nvars)] if nvars > 1 else ["A"])

    def axis_index(name: str) -> int:
        return 0 if name == "A" else int(name[1:]) - 1

    def bracket(u: str, w: str) -> NormalPolynomial:
        if u == w or (u.startswith("A") and w.startswith("A")):
            return NormalPolynomial(nvars)
        if (u, w) == ("C", "B"):
            return NormalPolynomial.from_axis(v_rho).scale(1j)
        if (u, w) == ("B", "C"):
            return NormalPolynomial.from_axis(v_rho).scale(-1j)
        if u.startswith("A"):
            return -bracket(w, u)
        v_j = NormalPolynomial.from_axis(velocity[axis_index(w)])
        if u == "C":
            return v_j.commutative_product(c).scale(1j)
        return v_j.commutative_product(b).scale(-1j)

    result = NormalPolynomial(nvars)
    for u in names:
        df = f.partial_derivative(u)
        if df.is_zero():
            continue
        for w in names:
            dg = g.partial_derivative(w)
            if dg.is_zero():
                continue
            result = result + df.commutative_product(dg).commutative_product(bracket(u, w))
    return result


def classical_limit_defect(
    spec: AlgebraSpec, f: NormalPolynomial, g: NormalPolynomial, hbar: float
) -> float:
    """Largest coefficient of ``(i/hbar)(f*g - g*f) - {f, g}`` at the given hbar."""
    scaled = replace(spec, hbar=hbar)
    commutator = star(f, g, scaled) - star(g, f, scaled)
    return (commutator.scale(1j / hbar) - poisson_bracket(scaled, f, g)).max_coefficient()


# -- text format -------------------------------------------------------------------

_TERM = re.compile(
    r"^\s*(?P<coeff>\([^)]*\)|[-+]?[0-9.eEj+-]+)\s*(?:\*\s*(?P<body>.+?))?\s*$"
)
_FACTOR = re.compile(r"(?P<name>[BC])\^(?P<power>\d+)|A\^(?:\((?P<multi>[\d,\s]+)\)|(?P<single>\d+))")


def _format_coefficient(value: complex) -> str:
    sign = "+" if value.imag >= 0 or np.isnan(value.imag) else "-"
    return f"({value.real!r}{sign}{abs(value.imag)!r}j)"


def format_normal(poly: NormalPolynomial) -> str:
    """``c * B^i A^(j1,...,jk) C^l`` terms joined by ``" + "``; zero powers are omitted."""
    parts = []
    for (beta, alpha, gamma), coeff in sorted(poly.terms.items()):
        factors = []
        if beta:
            factors.append(f"B^{beta}")
        if any(alpha):
            factors.append(f"A^({','.join(str(a) for a in alpha)})")
        if gamma:
            factors.append(f"C^{gamma}")
        text = _format_coefficient(coeff)
        parts.append(f"{text} * {' '.join(factors)}" if factors else text)
    return " + ".join(parts) if parts else _format_coefficient(0j)


def parse_normal(text: str, nvars: int = 1) -> NormalPolynomial:
    """Inverse of :func:`format_normal`; also accepts ``A^j`` for a one-dimensional axis."""
    terms: dict[TermKey, complex] = {}
    for chunk in text.split(" + "):
        match = _TERM.match(chunk)
        if match is None:
            raise ValueError(f"cannot parse term {chunk!r}")
        coeff = complex(match.group("coeff").replace(" ", ""))
        beta, gamma, alpha = 0, 0, (0,) * nvars
        body = match.group("body") or ""
        consumed = _FACTOR.sub("", body).strip()
        if consumed:
            raise ValueError(f"unexpected text {consumed!r} in term {chunk!r}")
        for factor in _FACTOR.finditer(body):
            if factor.group("name") == "B":
                beta = int(factor.group("power"))
            elif factor.group("name") == "C":
                gamma = int(factor.group("power"))
            elif factor.group("multi") is not None:
                alpha = tuple(int(p) for p in factor.group("multi").split(","))
            else:
                alpha = (int(factor.group("single")),)
            if len(alpha) != nvars:
                raise ValueError(f"A exponent {alpha} does not match {nvars} axis variables")
        key = (beta, alpha, gamma)
        terms[key] = terms.get(key, 0j) + coeff
    return NormalPolynomial.from_terms(nvars, terms)
