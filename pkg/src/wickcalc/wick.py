"""Coherent states, Wick symbols and the star product on a quantized surface.

Symbols live on the nodes of a :class:`~wickcalc.quadrature.ChartGrid`. The holomorphic
extension ``psi#(x|y)`` is never continued analytically; it always comes from coherent
matrix elements of the operator in the truncated space.
"""

import math
from collections.abc import Callable, Sequence
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from loguru import logger
from pydantic import BaseModel
from scipy.special import eval_legendre, gammaln

from .errors import ErrorCode, WickCalcError
from .kernel import KernelFunction
from .models import Model, SphereModel
from .quadrature import ChartGrid, sphere_grid
from .representation import RepSpace, WickOperator, build_space
from .utils import fit_power_law


@dataclass(frozen=True)
class SymbolField:
    """Symbol values at grid nodes ``points`` (all nodes when ``points`` is None)."""

    grid: ChartGrid
    values: np.ndarray
    points: np.ndarray | None = None

    @property
    def nodes(self) -> np.ndarray:
        return self.grid.nodes if self.points is None else self.grid.nodes[self.points]

    def max_abs(self) -> float:
        return float(np.max(np.abs(self.values), initial=0.0))

    def max_imag(self) -> float:
        return float(np.max(np.abs(np.imag(self.values)), initial=0.0))

    def __sub__(self, other: "SymbolField") -> "SymbolField":
        return SymbolField(self.grid, self.values - other.values, self.points)


def chart_coordinates(chart: str, nodes) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """``(r, L, phi)`` with ``|b_n(x)| = e^(n L)`` and angular phase ``phi``."""
    z = np.asarray(nodes, dtype=complex)
    if chart == "strip":
        return 2.0 * z.real, z.real, z.imag
    r = np.abs(z) ** 2
    with np.errstate(divide="ignore"):
        return r, 0.5 * np.log(r), np.angle(z)


def coherent_vectors(
    model: Model, space: RepSpace, nodes, kernel: KernelFunction | None = None
) -> np.ndarray:
    """Normalized coherent vectors ``e_x`` in the orthonormal basis, shape ``(P, dim)``.

    Components are ``sqrt(c_n / k(r)) e^(n L) e^(i n phi)``; they are truncated to the space,
    so ``|e_x|^2 < 1`` where the index distribution leaks past the cut.
    """
    kernel = kernel or model.kernel()
    r, log_scale, phase = chart_coordinates(space.chart, np.atleast_1d(nodes))
    n = space.indices.astype(float)
    with np.errstate(invalid="ignore"):
        growth = np.where(n == 0, 0.0, np.multiply.outer(log_scale, n))
    log_norm = np.asarray(kernel.log_value(r), dtype=float)
    amplitude = np.exp(-0.5 * space.log_weights + growth - 0.5 * log_norm[:, None])
    return amplitude * np.exp(1j * np.multiply.outer(phase, n))


def measure_weights(model: Model, grid: ChartGrid) -> np.ndarray:
    """Node weights of ``dm / (2 pi hbar)``."""
    density = np.exp(model.log_measure_density(grid.radial))
    return grid.area * density / (2.0 * math.pi * model.hbar)


@dataclass(frozen=True, eq=False)
class CoherentStates:
    """Coherent vectors and measure weights of a model on a grid."""

    model: Model
    space: RepSpace
    grid: ChartGrid

    @cached_property
    def vectors(self) -> np.ndarray:
        vectors = coherent_vectors(self.model, self.space, self.grid.nodes)
        logger.debug(f"Coherent vectors for {self.model.name}: {vectors.shape}")
        return vectors

    @cached_property
    def captured(self) -> np.ndarray:
        """``|e_x|^2`` at each node; 1 for compact models."""
        return np.sum(np.abs(self.vectors) ** 2, axis=1)

    @cached_property
    def weights(self) -> np.ndarray:
        return measure_weights(self.model, self.grid)

    def interior(self, tol: float = 1e-12) -> np.ndarray:
        """Nodes whose coherent vector is captured by the truncation to ``1 - tol``."""
        return np.flatnonzero(self.captured >= 1.0 - tol)

    def sample(self, count: int = 256, tol: float = 1e-12) -> np.ndarray:
        """Evenly strided subset of the interior nodes."""
        inside = self.interior(tol)
        if inside.size <= count:
            return inside
        return inside[np.linspace(0, inside.size - 1, count).astype(int)]


def coherent_states(model: Model, space: RepSpace, grid: ChartGrid) -> CoherentStates:
    return CoherentStates(model=model, space=space, grid=grid)


# -- probability function --------------------------------------------------------------


def probability_function(model: Model, x, y) -> np.ndarray:
    """``p(x, y) = |K(x|y)|^2 / (K(x|x) K(y|y))`` from the kernel, broadcasting ``x`` and ``y``."""
    kernel = model.kernel()
    x = np.asarray(x, dtype=complex)
    y = np.asarray(y, dtype=complex)
    if model.chart == "strip":
        w = np.conj(x) + y
        rx, ry = 2.0 * x.real, 2.0 * y.real
    else:
        w = np.conj(x) * y
        rx, ry = np.abs(x) ** 2, np.abs(y) ** 2
    log_cross = np.real(kernel.log_value_complex(w))
    log_p = 2.0 * log_cross - kernel.log_value(rx) - kernel.log_value(ry)
    return np.exp(log_p)


def probability_matrix(model: Model, grid: ChartGrid, points: np.ndarray) -> np.ndarray:
    """``p(x, y)`` for ``x`` in ``points`` against every node ``y``."""
    nodes = grid.nodes
    return probability_function(model, nodes[points][:, None], nodes[None, :])


def probability_normalization(model: Model, grid: ChartGrid, x) -> np.ndarray:
    """``(1/2 pi hbar) int p(x, y) dm(y)``; equals 1 for a reproducing measure."""
    x = np.atleast_1d(np.asarray(x, dtype=complex))
    p = probability_function(model, x[:, None], grid.nodes[None, :])
    return p @ measure_weights(model, grid)


class ProbabilityBounds(BaseModel):
    """Range of ``p`` over node pairs and pairs that are close in ``p`` but apart on the chart."""

    minimum: float
    maximum: float
    separation_violations: int


def probability_bounds(
    model: Model, grid: ChartGrid, points: np.ndarray, threshold: float = 1e-9
) -> ProbabilityBounds:
    p = probability_matrix(model, grid, points)
    near = p > 1.0 - threshold
    distinct = grid.nodes[points][:, None] != grid.nodes[None, :]
    return ProbabilityBounds(
        minimum=float(np.min(p)),
        maximum=float(np.max(p)),
        separation_violations=int(np.count_nonzero(near & distinct)),
    )


def probability_operator_apply(
    model: Model, grid: ChartGrid, values: np.ndarray, points: np.ndarray
) -> SymbolField:
    """``(P psi)(x) = (1/2 pi hbar) int p(x, y) psi(y) dm(y)`` at the nodes ``points``."""
    weights = measure_weights(model, grid)
    p = probability_matrix(model, grid, points)
    return SymbolField(grid, p @ (weights * np.asarray(values)), points)


def probability_operator_spectrum(model: Model, grid: ChartGrid) -> np.ndarray:
    """Eigenvalues of the symmetrized quadrature matrix of ``P`` (use a coarse grid)."""
    weights = measure_weights(model, grid)
    root = np.sqrt(weights)
    p = probability_matrix(model, grid, np.arange(grid.size))
    return np.linalg.eigvalsh(root[:, None] * p * root[None, :])


# -- symbols and operators -------------------------------------------------------------


def symbol_from_operator(
    op: WickOperator, states: CoherentStates, points: np.ndarray | None = None
) -> SymbolField:
    """``psi(x) = <T e_x, e_x>`` at grid nodes."""
    vectors = states.vectors if points is None else states.vectors[points]
    values = np.einsum("pm,mn,pn->p", vectors.conj(), op.matrix, vectors)
    return SymbolField(states.grid, values, points)


def symbol_at_nodes(op: WickOperator, model: Model, nodes) -> np.ndarray:
    """Symbol of ``op`` at arbitrary chart points."""
    vectors = coherent_vectors(model, op.space, np.atleast_1d(nodes))
    return np.einsum("pm,mn,pn->p", vectors.conj(), op.matrix, vectors)


def wick_operator_from_symbol(
    symbol: SymbolField, states: CoherentStates, tol: float = 1e-10, rcond: float = 1e-13
) -> WickOperator:
    """Operator whose symbol is ``symbol``, solved mode by mode in the angle.

    The angular Fourier mode ``d`` of the symbol at radius ``r`` is
    ``sum_m a_m(r) a_(m+d)(r) T_(m, m+d)``; each mode is a least-squares problem over the
    radial nodes whose coherent vectors are captured by the truncation.
    """
    if symbol.points is not None:
        raise WickCalcError(ErrorCode.ILL_CONDITIONED, "symbol must be given on the full grid")
    grid, space = states.grid, states.space
    n_axis, n_angle = grid.shape
    dim = space.dim
    modes = np.fft.fft(np.asarray(symbol.values, dtype=complex).reshape(grid.shape), axis=1)
    modes /= n_angle
    rows = states.captured.reshape(grid.shape)[:, 0] >= 1.0 - tol
    if not np.any(rows):
        raise WickCalcError(ErrorCode.ILL_CONDITIONED, "no radial node is inside the truncation")
    amplitude = np.abs(states.vectors.reshape(n_axis, n_angle, dim)[rows, 0, :])
    if 2 * (dim - 1) >= n_angle:
        raise WickCalcError(
            ErrorCode.ILL_CONDITIONED,
            f"{n_angle} angular nodes cannot resolve {2 * dim - 1} modes",
        )

    matrix = np.zeros((dim, dim), dtype=complex)
    for d in range(-(dim - 1), dim):
        m = np.arange(max(0, -d), min(dim, dim - d))
        columns = amplitude[:, m] * amplitude[:, m + d]
        scale = np.linalg.norm(columns, axis=0)
        if np.any(scale == 0.0):
            raise WickCalcError(ErrorCode.ILL_CONDITIONED, f"empty column in mode {d}")
        solution, _, rank, _ = np.linalg.lstsq(
            columns / scale, modes[rows, d % n_angle], rcond=rcond
        )
        if rank < m.size:
            raise WickCalcError(
                ErrorCode.ILL_CONDITIONED,
                f"mode {d}: Gram rank {rank} < {m.size} on {int(rows.sum())} radial nodes",
            )
        matrix[m, m + d] = solution / scale
    return WickOperator(matrix, space)


def _as_operator(value: "WickOperator | SymbolField", states: CoherentStates) -> WickOperator:
    if isinstance(value, WickOperator):
        return value
    return wick_operator_from_symbol(value, states)


def coherent_projection(model: Model, space: RepSpace, x: complex) -> WickOperator:
    """Rank-one projector ``Pi(x)`` onto the coherent vector at ``x``."""
    vector = coherent_vectors(model, space, [x])[0]
    return WickOperator(np.outer(vector, vector.conj()), space)


def resolution_of_identity(states: CoherentStates) -> WickOperator:
    """``(1/2 pi hbar) int Pi(y) dm(y)`` by quadrature."""
    vectors = states.vectors
    return WickOperator((vectors.T * states.weights) @ vectors.conj(), states.space)


def trace_by_quadrature(symbol: SymbolField, states: CoherentStates) -> complex:
    """``(1/2 pi hbar) int psi dm``; equals the operator trace."""
    weights = states.weights if symbol.points is None else states.weights[symbol.points]
    return complex(np.sum(weights * symbol.values))


# -- star product ----------------------------------------------------------------------


def star_operator_route(
    psi: "WickOperator | SymbolField",
    chi: "WickOperator | SymbolField",
    states: CoherentStates,
    points: np.ndarray | None = None,
) -> SymbolField:
    """``psi * chi`` as the symbol of the operator product."""
    product = _as_operator(psi, states) @ _as_operator(chi, states)
    return symbol_from_operator(product, states, points)


def star_quadrature_route(
    psi: "WickOperator | SymbolField",
    chi: "WickOperator | SymbolField",
    states: CoherentStates,
    points: np.ndarray | None = None,
) -> SymbolField:
    """``(1/2 pi hbar) int psi#(x|y) chi#(y|x) p(x, y) dm(y)`` at the nodes ``points``."""
    psi_op = _as_operator(psi, states)
    chi_op = _as_operator(chi, states)
    points = states.sample() if points is None else points
    vectors = states.vectors
    at_x = vectors[points]
    # <psi e_y, e_x> and <chi e_x, e_y>
    left = at_x.conj() @ psi_op.matrix @ vectors.T
    right = vectors.conj() @ chi_op.matrix @ at_x.T
    values = np.einsum("xy,y,yx->x", left, states.weights, right)
    return SymbolField(states.grid, values, points)


def compare_star_routes(
    psi: "WickOperator | SymbolField",
    chi: "WickOperator | SymbolField",
    states: CoherentStates,
    points: np.ndarray | None = None,
    tol: float = 1e-7,
) -> float:
    """Max difference of the two routes on interior nodes; raises when above ``tol``."""
    points = states.sample() if points is None else points
    by_operator = star_operator_route(psi, chi, states, points)
    by_quadrature = star_quadrature_route(psi, chi, states, points)
    difference = (by_operator - by_quadrature).max_abs()
    logger.debug(f"Star routes differ by {difference:.3e} on {points.size} nodes")
    if difference > tol:
        raise WickCalcError(
            ErrorCode.QUADRATURE_RESOLUTION,
            f"star routes disagree by {difference:.3e} (tolerance {tol:.1e})",
            difference=difference,
        )
    return difference


def frobenius_residual(psi: WickOperator, chi: WickOperator, states: CoherentStates) -> float:
    """``|tr(conj(chi) * psi) - tr(psi * conj(chi))|`` with both traces taken by quadrature."""
    chi_bar = chi.adjoint()
    left = trace_by_quadrature(star_operator_route(chi_bar, psi, states), states)
    right = trace_by_quadrature(star_operator_route(psi, chi_bar, states), states)
    return abs(left - right)


def symbol_sup_bound(op: WickOperator, states: CoherentStates) -> tuple[float, float]:
    """``(max |psi| over nodes, Hilbert-Schmidt norm of the operator)``."""
    symbol = symbol_from_operator(op, states)
    return symbol.max_abs(), float(np.linalg.norm(op.matrix))


# -- sphere spectral check ---------------------------------------------------------------


class SpectralRow(BaseModel):
    k: int
    harmonic: str
    expected: float
    measured: float
    error: float


def sphere_eigenvalue(N: int, k: int) -> float:
    """``(N+1)! N! / ((N+1+k)! (N-k)!)``, zero for ``k > N``."""
    if k > N:
        return 0.0
    return math.exp(
        gammaln(N + 2) + gammaln(N + 1) - gammaln(N + 2 + k) - gammaln(N - k + 1)
    )


def sphere_harmonics(xi: np.ndarray, k: int) -> dict[str, np.ndarray]:
    """Zonal ``P_k(xi3)`` and sectoral ``Re (xi1 + i xi2)^k`` harmonics of degree ``k``."""
    return {
        "zonal": eval_legendre(k, xi[..., 2]),
        "sectoral": np.real((xi[..., 0] + 1j * xi[..., 1]) ** k),
    }


def sphere_spectral_check(
    N: int, k_max: int | None = None, grid: ChartGrid | None = None, count: int = 192
) -> list[SpectralRow]:
    """Apply the probability operator to spherical harmonics and read off the eigenvalues."""
    model = SphereModel(N=N)
    grid = grid or sphere_grid()
    k_max = N + 2 if k_max is None else k_max
    points = np.linspace(0, grid.size - 1, min(count, grid.size)).astype(int)
    xi = SphereModel.sphere_point(grid.nodes)
    rows = []
    for k in range(k_max + 1):
        expected = sphere_eigenvalue(N, k)
        for harmonic, values in sphere_harmonics(xi, k).items():
            image = probability_operator_apply(model, grid, values, points).values.real
            sample = values[points]
            measured = float(sample @ image / (sample @ sample))
            error = float(np.max(np.abs(image - expected * sample)))
            rows.append(
                SpectralRow(
                    k=k, harmonic=harmonic, expected=expected, measured=measured, error=error
                )
            )
    return rows


# -- hbar expansion ----------------------------------------------------------------------

DiagonalSymbol = Callable[[np.ndarray, int], np.ndarray]

# Diagonal operators f(n) on the level-N sphere whose symbols do not depend on N.
SPHERE_DIAGONAL_SYMBOLS: dict[str, DiagonalSymbol] = {
    "1": lambda n, N: np.ones_like(n, dtype=float),
    "xi3": lambda n, N: 2.0 * n / N - 1.0,
    "xi3^2": lambda n, N: 4.0 * n * (n - 1.0) / (N * (N - 1.0)) - 4.0 * n / N + 1.0,
}


def _index_moments(
    probs: np.ndarray, centered: np.ndarray, values: np.ndarray
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Symbol and its first two derivatives in ``s = log r`` from the index distribution."""
    psi = probs @ values
    fluctuation = values[None, :] - psi[:, None]
    psi_s = np.sum(probs * values[None, :] * centered, axis=-1)
    psi_ss = np.sum(probs * fluctuation * centered**2, axis=-1)
    return psi, psi_s, psi_ss


def expansion_remainder(
    kernel: KernelFunction, f: np.ndarray, g: np.ndarray, r: np.ndarray
) -> np.ndarray:
    """``psi * chi - (psi chi + hbar P1 + hbar^2 P2)`` for diagonal operators ``f(n)``, ``g(n)``.

    ``P1`` is the Laplacian term and ``P2`` includes the Ricci correction; both are written
    through the cumulants of the index distribution.
    """
    h = kernel.hbar
    probs = kernel.distribution(r)
    mean, c2, c3, _ = kernel.cumulants(r)
    centered = kernel.indices[None, :] - mean[:, None]
    psi, psi_s, psi_ss = _index_moments(probs, centered, f)
    chi, chi_s, chi_ss = _index_moments(probs, centered, g)
    exact = probs @ (f * g)

    H = 1.0 / (h * c2)
    H_s = -c3 / (h * c2**2)
    first = H * psi_s * chi_s
    psi_2 = psi_ss - psi_s
    chi_2 = chi_ss - chi_s
    second = (
        0.5 * H**2 * psi_2 * chi_2
        + 0.5 * H * (H_s + H) * (psi_s * chi_2 + chi_s * psi_2)
        + 0.5 * (H_s + H) ** 2 * psi_s * chi_s
    )
    return exact - (psi * chi + h * first + h**2 * second)


class ExpansionFit(BaseModel):
    """Sup-norm remainders of the order-hbar^2 expansion and their power-law order."""

    hbars: list[float]
    remainders: list[float]
    exact: bool
    order: float | None = None
    residual: float = 0.0

    def passed(self, minimum_order: float) -> bool:
        return self.exact or (self.order is not None and self.order >= minimum_order)


def hbar_expansion_check(
    psi: str,
    chi: str,
    levels: Sequence[int] = (8, 16, 32, 64),
    r: Sequence[float] | None = None,
    exact_tol: float = 1e-12,
    max_residual: float = 0.5,
) -> ExpansionFit:
    """Remainder of the star-product expansion on the sphere for ``hbar = 2/N``."""
    if psi not in SPHERE_DIAGONAL_SYMBOLS or chi not in SPHERE_DIAGONAL_SYMBOLS:
        raise WickCalcError(
            ErrorCode.CONFIG_INVALID,
            f"unknown symbol; choose from {', '.join(SPHERE_DIAGONAL_SYMBOLS)}",
        )
    r_arr = np.linspace(0.2, 5.0, 25) if r is None else np.asarray(r, dtype=float)
    hbars, remainders = [], []
    for N in levels:
        model = SphereModel(N=N)
        kernel = model.kernel()
        n = kernel.indices.astype(float)
        f = SPHERE_DIAGONAL_SYMBOLS[psi](n, N)
        g = SPHERE_DIAGONAL_SYMBOLS[chi](n, N)
        hbars.append(model.hbar)
        remainders.append(float(np.max(np.abs(expansion_remainder(kernel, f, g, r_arr)))))

    if max(remainders) <= exact_tol:
        return ExpansionFit(hbars=hbars, remainders=remainders, exact=True)
    order, residual = fit_power_law(hbars, remainders)
    logger.debug(f"Expansion remainder {psi}*{chi}: order {order:.4f}, residual {residual:.2e}")
    if residual > max_residual:
        raise WickCalcError(
            ErrorCode.FIT_UNSTABLE, f"power-law residual {residual:.3f} for {psi}*{chi}"
        )
    return ExpansionFit(
        hbars=hbars, remainders=remainders, exact=False, order=order, residual=residual
    )


# -- Kahler data, sigma_1 and the dimension formula ------------------------------------------


@dataclass(frozen=True)
class KahlerData:
    """Kahler potential, metric density and curvature term read from the kernel."""

    model: Model

    @property
    def kernel(self) -> KernelFunction:
        return self.model.kernel()

    def potential(self, r) -> np.ndarray:
        """``F = hbar log k``."""
        return self.model.hbar * np.asarray(self.kernel.log_value(r))

    def metric(self, r) -> np.ndarray:
        """Density ``g`` of ``omega`` against ``dzbar dz``."""
        r = np.asarray(r, dtype=float)
        _, c2, _, _ = self.kernel.cumulants(r)
        density = self.model.hbar * c2
        return density if self.model.chart == "strip" else density / r

    def sigma1(self, r) -> np.ndarray:
        """Half the scalar curvature of ``omega``."""
        _, c2, c3, c4 = self.kernel.cumulants(np.asarray(r, dtype=float))
        return -(c4 / c2 - (c3 / c2) ** 2) / (2.0 * self.model.hbar * c2)

    def measure_ratio(self, r) -> np.ndarray:
        """``dm / dm^omega``."""
        r = np.asarray(r, dtype=float)
        return np.exp(self.model.log_measure_density(r)) / self.metric(r)


def measure_expansion_sigma1(model: Model) -> Callable[[np.ndarray], np.ndarray]:
    return KahlerData(model).sigma1


class DimensionResult(BaseModel):
    value: float
    expected: int
    residual: float
    gauss_bonnet: float


def dimension_formula(model: Model, grid: ChartGrid) -> DimensionResult:
    """``(1/2 pi hbar) int (1 + hbar sigma1) dm^omega`` and ``(1/pi) int sigma1 dm^omega``."""
    if not model.compact:
        raise WickCalcError(ErrorCode.CONFIG_INVALID, f"{model.name} is not compact")
    data = KahlerData(model)
    r = grid.radial_nodes()
    row_area = grid.area.reshape(grid.shape).sum(axis=1)
    g = data.metric(r)
    sigma = data.sigma1(r)
    h = model.hbar
    value = float(np.sum(row_area * (1.0 + h * sigma) * g) / (2.0 * math.pi * h))
    gauss_bonnet = float(np.sum(row_area * sigma * g) / math.pi)
    expected = build_space(model).dim
    return DimensionResult(
        value=value,
        expected=expected,
        residual=abs(value - expected),
        gauss_bonnet=gauss_bonnet,
    )
