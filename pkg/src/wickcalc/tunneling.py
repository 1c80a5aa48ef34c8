"""The quantum cylinder: theta kernel, Gaussian measure and exponentially small corrections.

On the strip chart ``z = r/2 + i t`` the Kahler form is ``omega0 = (i/2) dzbar ^ dz`` up to
terms of order ``exp(-pi^2/hbar)``. Everything here that measures those terms works with the
dual theta series ``T(r) = theta(i pi (r - hbar)/hbar, exp(-pi^2/hbar))`` and its analytic
derivatives; nothing is differentiated numerically.
"""

import math
from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np
from loguru import logger
from pydantic import BaseModel

from .errors import ErrorCode, WickCalcError
from .kernel import DensityFunction, KernelFunction
from .models import CylinderModel, PrimeSeriesModel
from .quadrature import ChartGrid, strip_grid
from .representation import (
    ResidualReport,
    WickOperator,
    build_operators,
    build_space,
    casimir_matrix,
    quantum_axis,
    verify_relations,
)
from .special import dual_theta_derivatives, theta
from .utils import ExponentFit, fit_exponential_rate
from .wick import (
    coherent_states,
    coherent_vectors,
    probability_operator_apply,
    star_quadrature_route,
)

SLOPE_TARGET = -(math.pi**2)
# Below this hbar the gap drops under what the quadrature pipeline resolves.
MIN_HBAR = 0.45


# -- kernel and measure -----------------------------------------------------------------


def cylinder_kernel(hbar: float) -> KernelFunction:
    """``k(r) = theta(r - hbar, exp(-hbar))``."""
    return CylinderModel(hbar=hbar).kernel()


def cylinder_measure(hbar: float) -> DensityFunction:
    """Density of ``dm`` itself against ``dzbar dz``: ``(1/2) T(r)``."""
    model = CylinderModel(hbar=hbar)
    return DensityFunction(
        log_density=model.log_measure_density,
        hbar=model.hbar,
        lower=-math.inf,
        upper=math.inf,
        tag="cylinder-theta",
        center=model.hbar,
    )


def kernel_functional_equation(hbar: float, r: Sequence[float] | None = None) -> float:
    """Max relative residual of ``k(r + 2 hbar) = e^r k(r)``."""
    kernel = cylinder_kernel(hbar)
    r_arr = np.linspace(-3.0, 3.0, 61) if r is None else np.asarray(r, dtype=float)
    log_shifted = kernel.log_value(r_arr + 2.0 * hbar)
    return float(np.max(np.abs(np.expm1(log_shifted - r_arr - kernel.log_value(r_arr)))))


def dual_measure_residual(hbar: float, r: Sequence[float] | None = None) -> float:
    """Relative gap between ``k l`` summed over ``e^(-hbar n^2)`` and ``(1/2) T`` summed dually."""
    model = CylinderModel(hbar=hbar)
    r_arr = np.linspace(-3.0, 3.0, 61) if r is None else np.asarray(r, dtype=float)
    direct = np.exp(model.kernel().log_series(r_arr) + model.log_density(r_arr))
    dual = 0.5 * dual_theta_derivatives(r_arr, hbar)[0]
    return float(np.max(np.abs(direct / dual - 1.0)))


def periodicity_residual(hbar: float, points: int = 16) -> float:
    """Largest change of the kernel and coherent vectors under ``t -> t + 2 pi``."""
    model = CylinderModel(hbar=hbar)
    kernel = model.kernel()
    space = build_space(model)
    rng = np.random.default_rng(7)
    z = hbar / 2.0 + rng.uniform(-1.0, 1.0, points) + 1j * rng.uniform(0.0, 2.0 * math.pi, points)
    w = np.conj(z[::-1]) + z
    k0 = np.exp(kernel.log_value_complex(w))
    k1 = np.exp(kernel.log_value_complex(w + 2j * math.pi))
    kernel_gap = float(np.max(np.abs(k1 - k0) / np.abs(k0)))
    e0 = coherent_vectors(model, space, z)
    e1 = coherent_vectors(model, space, z + 2j * math.pi)
    vector_gap = float(np.max(np.abs(e1 - e0)))
    return max(kernel_gap, vector_gap)


# -- the form and measure gaps ----------------------------------------------------------


def form_correction(r, hbar: float) -> np.ndarray:
    """Density of ``omega - omega0``: ``hbar (log T)''``."""
    value, first, second = dual_theta_derivatives(r, hbar)
    return hbar * (second / value - (first / value) ** 2)


def measure_correction(r, hbar: float) -> np.ndarray:
    """``dm / dm^omega0 - 1 = T - 1``, summed without the leading 1."""
    x = np.asarray(r, dtype=float) - hbar
    width = int(math.ceil(math.sqrt(41.5 * hbar) / math.pi)) + 3
    n = np.arange(1, width + 1)
    weights = np.exp(-(math.pi**2) * n**2 / hbar)
    return 2.0 * np.sum(weights * np.cos(math.pi * np.multiply.outer(x, n) / hbar), axis=-1)


def _period_window(hbar: float, samples: int = 257) -> np.ndarray:
    """One period ``[0, 2 hbar]`` of ``T`` in ``r``."""
    return np.linspace(0.0, 2.0 * hbar, samples)


def _require_resolvable(hbars: Sequence[float], min_hbar: float) -> None:
    low = [h for h in hbars if h < min_hbar]
    if low:
        raise WickCalcError(
            ErrorCode.PRECISION_FLOOR,
            f"hbar={min(low)} is below {min_hbar}: exp(-pi^2/hbar) is under the resolved floor",
            hbars=list(hbars),
        )


class TunnelingReport(BaseModel):
    """Gaps between the quantum and flat Kahler data over an ``hbar`` sequence."""

    hbars: list[float]
    form_gaps: list[float]
    measure_gaps: list[float]
    slope: float
    measure_slope: float
    target: float = SLOPE_TARGET
    hbar_power: float = 0.0
    fit_residual: float = 0.0

    @property
    def relative_error(self) -> float:
        return abs(self.slope - self.target) / abs(self.target)

    @property
    def measure_relative_error(self) -> float:
        return abs(self.measure_slope - self.target) / abs(self.target)

    def passed(self, tolerance: float) -> bool:
        positive = all(g > 0 for g in self.form_gaps + self.measure_gaps)
        return positive and self.slope < 0 and self.relative_error <= tolerance

    def plot_rows(self) -> list[tuple[float, float, float]]:
        """``(1/hbar, ln form gap, ln measure gap)`` per hbar."""
        return [
            (1.0 / h, math.log(g), math.log(m))
            for h, g, m in zip(self.hbars, self.form_gaps, self.measure_gaps, strict=True)
        ]


def tunneling_gap(
    hbars: Sequence[float] = (0.6, 0.8, 1.0, 1.25, 1.5),
    r: Sequence[float] | None = None,
    min_hbar: float = MIN_HBAR,
) -> TunnelingReport:
    """``max_r |omega - omega0|`` and ``max_r |dm/dm^omega0 - 1|`` with their exponential rates.

    ``r`` defaults to one period of ``T`` around ``r = hbar``.
    """
    _require_resolvable(hbars, min_hbar)
    form_gaps, measure_gaps = [], []
    for h in hbars:
        window = _period_window(h) if r is None else np.asarray(r, dtype=float)
        form_gaps.append(float(np.max(np.abs(form_correction(window, h)))))
        measure_gaps.append(float(np.max(np.abs(measure_correction(window, h)))))
        logger.debug(f"hbar={h}: form gap {form_gaps[-1]:.6e}, measure gap {measure_gaps[-1]:.6e}")

    form_fit = fit_exponential_rate(hbars, form_gaps)
    measure_fit = fit_exponential_rate(hbars, measure_gaps)
    report = TunnelingReport(
        hbars=list(hbars),
        form_gaps=form_gaps,
        measure_gaps=measure_gaps,
        slope=form_fit.slope,
        measure_slope=measure_fit.slope,
        hbar_power=form_fit.hbar_power,
        fit_residual=form_fit.residual,
    )
    logger.info(
        f"Tunneling slope {report.slope:.6f} (target {SLOPE_TARGET:.6f}, "
        f"rel. error {report.relative_error:.2e})"
    )
    return report


# -- star product against the flat series -------------------------------------------------


@dataclass(frozen=True)
class CylinderSymbol:
    """Symbol of ``q(A)`` (coefficients ``axis`` in ascending order) or of a shift by ``winding``.

    A shift by ``k`` steps has symbol ``e^(-i k t)`` times an amplitude ``s_k(r)`` that is
    ``exp(-hbar k^2 / 4)`` up to exponentially small terms.
    """

    axis: tuple[float, ...] = (1.0,)
    winding: int = 0

    @property
    def polynomial(self) -> np.polynomial.Polynomial:
        return np.polynomial.Polynomial(self.axis)

    def operator(self, A: WickOperator, shift: WickOperator) -> WickOperator:
        op = WickOperator.diagonal(A.space, self.polynomial(np.real(np.diag(A.matrix))))
        step = shift if self.winding > 0 else shift.adjoint()
        for _ in range(abs(self.winding)):
            op = step @ op
        return op


MAX_AXIS_DEGREE = 2


def _pair_kind(psi: CylinderSymbol, chi: CylinderSymbol) -> str:
    if psi.winding == 0 and chi.winding == 0:
        if max(len(psi.axis), len(chi.axis)) - 1 > MAX_AXIS_DEGREE:
            raise WickCalcError(
                ErrorCode.DEGREE_LIMIT, f"axis polynomials above degree {MAX_AXIS_DEGREE}"
            )
        return "axis"
    if psi.winding == -chi.winding and psi.axis == (1.0,) and chi.axis == (1.0,):
        return "winding"
    raise WickCalcError(
        ErrorCode.CONFIG_INVALID,
        "star remainder supports axis polynomials or an opposite pair of pure windings",
    )


def symbol_jet(probs: np.ndarray, indices: np.ndarray, values: np.ndarray) -> np.ndarray:
    """Symbol ``E_r[f(n)]`` and its first two ``r``-derivatives, shape ``(3, P)``.

    ``d/dr`` of an average against ``c_n e^(n r) / k(r)`` is a joint cumulant with ``n``.
    """
    n = indices.astype(float)
    mean = probs @ n
    centered = n[None, :] - mean[:, None]
    variance = np.sum(probs * centered**2, axis=-1)
    psi = probs @ values
    psi_1 = np.sum(probs * values[None, :] * centered, axis=-1)
    psi_2 = np.sum(probs * values[None, :] * centered**2, axis=-1) - variance * psi
    return np.array([psi, psi_1, psi_2])


def flat_series(psi_jet: np.ndarray, chi_jet: np.ndarray, hbar: float, order: int) -> np.ndarray:
    """``sum_(s <= order) ((2 hbar)^s / s!) psi^(s) chi^(s)`` for symbols of ``r`` alone."""
    return sum(
        (2.0 * hbar) ** s / math.factorial(s) * psi_jet[s] * chi_jet[s] for s in range(order + 1)
    )


def _winding_amplitude(kernel: KernelFunction, r: np.ndarray, k: int) -> np.ndarray:
    """``s_k(r) = sum_n sqrt(pi_n pi_(n+k))``."""
    probs = kernel.distribution(r)
    return np.sum(np.sqrt(probs[..., : probs.shape[-1] - k] * probs[..., k:]), axis=-1)


def _series_profile(
    model: CylinderModel, psi: CylinderSymbol, chi: CylinderSymbol, r: np.ndarray
) -> np.ndarray:
    """Flat series evaluated on the exact symbols, to first order in the tunneling terms."""
    h = model.hbar
    kernel = model.kernel()
    if _pair_kind(psi, chi) == "axis":
        probs = kernel.distribution(r)
        axis = model.fact.vacuum[0] + (kernel.indices + 1.0) * h
        order = max(len(psi.axis), len(chi.axis)) - 1
        return flat_series(
            symbol_jet(probs, kernel.indices, psi.polynomial(axis)),
            symbol_jet(probs, kernel.indices, chi.polynomial(axis)),
            h,
            order,
        )
    # For e^(-ikt) s_k against e^(ikt) s_k the series shifts the oscillating part of s_k
    # by k hbar in r and multiplies by exp(hbar k^2 / 2).
    k = abs(psi.winding)
    return 2.0 * math.exp(h * k**2 / 4.0) * _winding_amplitude(kernel, r + k * h, k) - 1.0


def star_remainder_profile(
    hbar: float, psi: CylinderSymbol, chi: CylinderSymbol, r: Sequence[float]
) -> np.ndarray:
    """``psi * chi`` minus the flat series at ``r``.

    The product symbol is the average of the product operator against the coherent-state
    distribution ``c_n e^(n r) / k(r)`` of the untruncated space. Series terms above the
    polynomial degree are quadratic in the tunneling terms and are dropped.
    """
    model = CylinderModel(hbar=hbar)
    r_arr = np.asarray(r, dtype=float)
    if _pair_kind(psi, chi) == "axis":
        kernel = model.kernel()
        axis = model.fact.vacuum[0] + (kernel.indices + 1.0) * hbar
        exact = kernel.distribution(r_arr) @ (psi.polynomial * chi.polynomial)(axis)
    else:
        exact = np.ones_like(r_arr)
    return exact - _series_profile(model, psi, chi, r_arr)


def star_expansion_remainder(
    hbar: float, psi: CylinderSymbol, chi: CylinderSymbol, r: Sequence[float] | None = None
) -> float:
    """``max |psi * chi - flat series|`` over ``r`` (default ``r = hbar``)."""
    r_arr = np.array([hbar]) if r is None else np.asarray(r, dtype=float)
    return float(np.max(np.abs(star_remainder_profile(hbar, psi, chi, r_arr))))


def star_remainder_quadrature(
    hbar: float,
    psi: CylinderSymbol,
    chi: CylinderSymbol,
    grid: ChartGrid | None = None,
    modes: int = 24,
    rows: int = 3,
) -> tuple[np.ndarray, np.ndarray]:
    """Remainder with ``psi * chi`` taken by the quadrature route against the theta measure.

    Evaluated at the first node of the ``rows`` radial rows nearest ``r = hbar``; returns
    ``(r, remainder)``.
    """
    model = CylinderModel(hbar=hbar)
    grid = grid or strip_grid(hbar, modes)
    space = build_space(model, strip_modes=modes)
    ops = build_operators(model, space)
    states = coherent_states(model, space, grid)
    nearest = np.sort(np.argsort(np.abs(grid.radial_nodes() - hbar))[:rows])
    points = nearest * grid.shape[1]

    product = star_quadrature_route(
        psi.operator(ops.A[0], ops.B), chi.operator(ops.A[0], ops.B), states, points
    )
    r_points = grid.radial[points]
    return r_points, np.real(product.values) - _series_profile(model, psi, chi, r_points)


class RemainderFit(BaseModel):
    """Star remainders over ``hbar`` and their exponential rate."""

    pair: str
    hbars: list[float]
    remainders: list[float]
    slope: float
    target: float = SLOPE_TARGET

    @property
    def relative_error(self) -> float:
        return abs(self.slope - self.target) / abs(self.target)

    def passed(self, tolerance: float) -> bool:
        return all(v > 0 for v in self.remainders) and self.relative_error <= tolerance


STAR_PAIRS: dict[str, tuple[CylinderSymbol, CylinderSymbol]] = {
    "constant": (CylinderSymbol(), CylinderSymbol((0.0, 1.0))),
    "axis-square": (CylinderSymbol((0.0, 1.0)), CylinderSymbol((0.0, 1.0))),
    "winding": (CylinderSymbol(winding=1), CylinderSymbol(winding=-1)),
}


def star_remainder_fit(
    pair: str, hbars: Sequence[float] = (0.6, 0.8, 1.0, 1.25, 1.5), min_hbar: float = MIN_HBAR
) -> RemainderFit:
    """Fit the exponential rate of a named pair's remainder at ``r = hbar``."""
    if pair not in STAR_PAIRS:
        raise WickCalcError(
            ErrorCode.CONFIG_INVALID, f"unknown pair '{pair}'; choose from {', '.join(STAR_PAIRS)}"
        )
    _require_resolvable(hbars, min_hbar)
    psi, chi = STAR_PAIRS[pair]
    remainders = [star_expansion_remainder(h, psi, chi) for h in hbars]
    fit: ExponentFit = fit_exponential_rate(hbars, remainders)
    logger.debug(f"Star remainder '{pair}': slope {fit.slope:.6f}, residual {fit.residual:.2e}")
    return RemainderFit(pair=pair, hbars=list(hbars), remainders=remainders, slope=fit.slope)


def flat_heat_residual(
    hbar: float = 0.3, windings: Sequence[int] = (1, 2), modes: int = 24, rows: int = 3
) -> float:
    """``max |P e^(i k t) - e^(-hbar k^2 / 2) e^(i k t)|`` near ``r = hbar``.

    On the flat cylinder the probability operator is ``exp(hbar Delta / 2)`` up to tunneling
    terms, so its first correction is ``(hbar/2) Delta``; at small ``hbar`` those terms are
    below rounding.
    """
    model = CylinderModel(hbar=hbar)
    grid = strip_grid(hbar, modes)
    radial = grid.radial_nodes()
    nearest = np.sort(np.argsort(np.abs(radial - hbar))[:rows])
    points = (nearest[:, None] * grid.shape[1] + np.arange(0, grid.shape[1], 8)[None, :]).ravel()
    worst = 0.0
    for k in windings:
        values = np.exp(1j * k * grid.angle)
        smoothed = probability_operator_apply(model, grid, values, points).values
        expected = math.exp(-hbar * k**2 / 2.0) * values[points]
        worst = max(worst, float(np.max(np.abs(smoothed - expected))))
    return worst


# -- heat kernel -----------------------------------------------------------------------------


class HeatKernelComparison(BaseModel):
    """Flat cylinder heat kernel as a theta series against the plane kernel ``p0 / (2 pi hbar)``."""

    hbar: float
    theta_form: float
    image_sum: float
    plane: float
    ratio_minus_one: float
    winding_scale: float

    @property
    def relative_to_scale(self) -> float:
        return self.ratio_minus_one / self.winding_scale - 1.0


def heat_kernel_comparison(hbar: float, x: complex, y: complex) -> HeatKernelComparison:
    """Heat kernel of ``exp(-hbar Delta / 2)`` on the flat cylinder between strip points ``x``, ``y``.

    The winding sum ``sum_k exp(-|x - y - 2 pi i k|^2 / (2 hbar))`` is
    ``p0 theta(2 pi v / hbar, exp(-2 pi^2 / hbar))`` with ``v = Im(x - y)``.
    """
    delta = complex(x) - complex(y)
    v = delta.imag
    q = math.exp(-2.0 * math.pi**2 / hbar)
    alpha = 2.0 * math.pi * v / hbar
    log_p0 = -abs(delta) ** 2 / (2.0 * hbar)
    scale = 1.0 / (2.0 * math.pi * hbar)
    theta_form = scale * math.exp(log_p0) * float(theta(alpha, q))

    width = int(math.ceil(abs(v) / (2.0 * math.pi))) + 8
    k = np.arange(-width, width + 1)
    images = -np.abs(delta - 2j * math.pi * k) ** 2 / (2.0 * hbar)
    image_sum = scale * float(np.sum(np.exp(images)))

    nonzero = k[k != 0]
    ratio_minus_one = float(np.sum(np.exp(-2.0 * math.pi**2 * nonzero**2 / hbar + nonzero * alpha)))
    return HeatKernelComparison(
        hbar=hbar,
        theta_form=theta_form,
        image_sum=image_sum,
        plane=scale * math.exp(log_p0),
        ratio_minus_one=ratio_minus_one,
        winding_scale=2.0 * q,
    )


# -- prime series ---------------------------------------------------------------------------


def prime_series_check(lam: float = 1.0, hbar: float = 1.0, M: int = 16, margin: int = 2) -> ResidualReport:
    """Relations, Casimir ``-lambda^2`` and spectrum ``hbar (n + 1)`` of the prime series."""
    model = PrimeSeriesModel(hbar=hbar, lam=lam)
    space = build_space(model, strip_modes=M)
    ops = build_operators(model, space, margin)
    report = verify_relations(model, ops, margin)

    A = ops.A[0]
    residuals = dict(report.residuals)
    commutator = ops.C.commutator(ops.B) - (2.0 * hbar * A - hbar**2)
    residuals["[C,B]=2 hbar A - hbar^2"] = commutator.interior_max(margin)
    casimir = casimir_matrix(model, ops, margin)
    residuals["A^2-CB=-lambda^2"] = (casimir + lam**2).interior_max(margin)
    expected = model.fact.vacuum[0] + hbar * (space.indices + 1.0)
    residuals["spectrum A"] = float(np.max(np.abs(quantum_axis(model, space)[0] - expected)))
    logger.debug(f"Prime series lambda={lam}, hbar={hbar}, M={M}: {residuals}")
    return ResidualReport(model=model.name, dim=space.dim, margin=margin, residuals=residuals)
