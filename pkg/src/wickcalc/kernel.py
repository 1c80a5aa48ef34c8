"""Reproducing kernels k(r) and measure densities l(r) solved from a factorization."""

import math
from collections.abc import Callable, Sequence
from dataclasses import dataclass

import numpy as np
from loguru import logger
from scipy import integrate
from scipy.special import logsumexp

from .algebra import AlgebraSpec, AxisPolynomial, Factorization
from .errors import ErrorCode, WickCalcError
from .special import logsumexp_complex

LogEvaluator = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True)
class KernelClosedForm:
    """Closed form of a kernel: ``log k(r)`` on the real chart and optionally ``log k(w)``."""

    tag: str
    log_real: LogEvaluator
    log_complex: LogEvaluator | None = None


@dataclass(frozen=True)
class KernelFunction:
    """Series ``k = sum_n c_n b_n`` with positive coefficients, stored as ``log c_n``.

    On the radial chart the series variable is ``r = |z|^2`` (terms ``c_n r^n``); on the strip
    chart it is ``r = z + conj(z)`` (terms ``c_n e^(n r)``).
    """

    indices: np.ndarray
    log_coefficients: np.ndarray
    chart: str
    hbar: float
    radius: float
    degree: int | None = None
    closed_form: KernelClosedForm | None = None

    @property
    def coefficients(self) -> np.ndarray:
        return np.exp(self.log_coefficients)

    @property
    def tag(self) -> str:
        return self.closed_form.tag if self.closed_form else "none"

    @property
    def size(self) -> int:
        return int(self.indices.size)

    def _exponents(self, r: np.ndarray) -> np.ndarray:
        n = self.indices
        if self.chart == "strip":
            return self.log_coefficients + np.multiply.outer(r, n)
        with np.errstate(divide="ignore", invalid="ignore"):
            log_r = np.log(r)
            terms = np.where(n == 0, 0.0, np.multiply.outer(log_r, n))
        return self.log_coefficients + terms

    def log_series(self, r) -> np.ndarray:
        r_arr = np.asarray(r, dtype=float)
        return logsumexp(self._exponents(r_arr), axis=-1)

    def log_value(self, r) -> np.ndarray:
        """``log k(r)``, from the closed form when one is registered."""
        if self.closed_form is not None:
            return np.asarray(self.closed_form.log_real(np.asarray(r, dtype=float)))
        return self.log_series(r)

    def value(self, r) -> np.ndarray:
        return np.exp(self.log_value(r))

    def log_value_complex(self, w) -> np.ndarray:
        """Complex ``log k(w)`` for the off-diagonal kernel ``K(x|y) = k(conj(x) y)``."""
        w_arr = np.asarray(w, dtype=complex)
        if self.closed_form is not None and self.closed_form.log_complex is not None:
            return np.asarray(self.closed_form.log_complex(w_arr))
        n = self.indices
        if self.chart == "strip":
            exponents = self.log_coefficients + np.multiply.outer(w_arr, n)
        else:
            with np.errstate(divide="ignore", invalid="ignore"):
                log_w = np.log(w_arr)
                exponents = self.log_coefficients + np.where(
                    n == 0, 0.0, np.multiply.outer(log_w, n)
                )
        return logsumexp_complex(exponents, axis=-1)

    def distribution(self, r) -> np.ndarray:
        """Probabilities ``c_n r^n / sum`` of the index ``n`` at each ``r`` (last axis = n)."""
        exponents = self._exponents(np.asarray(r, dtype=float))
        return np.exp(exponents - logsumexp(exponents, axis=-1, keepdims=True))

    def cumulants(self, r) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
        """Mean and 2nd..4th cumulants of the index distribution at ``r``."""
        probs = self.distribution(r)
        n = self.indices.astype(float)
        mean = probs @ n
        centered = n - mean[..., None]
        m2 = np.sum(probs * centered**2, axis=-1)
        m3 = np.sum(probs * centered**3, axis=-1)
        m4 = np.sum(probs * centered**4, axis=-1)
        return mean, m2, m3, m4 - 3.0 * m2**2

    def recurrence_residual(self, spec: AlgebraSpec, fact: Factorization) -> float:
        """Max relative residual of ``conj(E(n h)) c_n = D(n h) c_(n-1)``."""
        if self.chart == "strip":
            return 0.0
        worst = 0.0
        h = self.hbar
        for n in range(1, self.size):
            e_bar = np.conj(fact.script_E(spec, n * h))
            d = fact.script_D(spec, n * h)
            ratio = math.exp(self.log_coefficients[n] - self.log_coefficients[n - 1])
            worst = max(worst, abs(e_bar * ratio - d) / max(abs(d), 1e-300))
        return float(worst)

    def table(self) -> list[tuple[int, float]]:
        return [(int(n), float(c)) for n, c in zip(self.indices, self.coefficients, strict=True)]


def estimate_radius(log_coefficients: np.ndarray, window: int = 16) -> float:
    """Ratio-test estimate of the convergence radius from the last ``window`` ratios."""
    if log_coefficients.size <= window + 1:
        return math.inf
    ratios = np.exp(-np.diff(log_coefficients))[-window:]
    if ratios[-1] > 1.05 * ratios[0] and ratios[-1] > 1.0:
        return math.inf
    n = np.arange(log_coefficients.size - window, log_coefficients.size, dtype=float)
    design = np.column_stack([np.ones_like(n), 1.0 / n])
    (intercept, _), *_ = np.linalg.lstsq(design, ratios, rcond=None)
    return float(intercept)


def solve_kernel(
    spec: AlgebraSpec,
    fact: Factorization,
    truncation: int = 256,
    ratio_window: int = 16,
    closed_form: KernelClosedForm | None = None,
) -> KernelFunction:
    """Coefficients ``c_n = prod D(j h) / conj(E(j h))`` of the kernel series."""
    h = spec.hbar
    if fact.chart == "strip":
        half = max(truncation // 4, 8)
        n = np.arange(-half, half + 1)
        return KernelFunction(
            indices=n,
            log_coefficients=-h * n * (n + 1.0),
            chart="strip",
            hbar=h,
            radius=math.inf,
            degree=None,
            closed_form=closed_form,
        )

    d_scale = max(1.0, abs(fact.script_D(spec, 0.0)))
    log_c = [0.0]
    degree: int | None = None
    for j in range(1, truncation):
        d = fact.script_D(spec, j * h)
        if abs(d) <= 1e-12 * d_scale:
            degree = j - 1
            break
        e_bar = np.conj(fact.script_E(spec, j * h))
        if abs(e_bar) <= 1e-14 * max(1.0, abs(d)):
            raise WickCalcError(
                ErrorCode.DIVISION_BY_ZERO_RECURRENCE,
                f"E vanishes at t={j * h:.6g} (index {j}); level or vacuum is wrong",
                index=j,
            )
        ratio = complex(d / e_bar)
        if ratio.real <= 0.0 or abs(ratio.imag) > 1e-12 * abs(ratio):
            raise WickCalcError(
                ErrorCode.NEGATIVE_WEIGHT,
                f"kernel coefficient c_{j} is not positive (ratio {ratio:.6g})",
                index=j,
            )
        log_c.append(log_c[-1] + math.log(ratio.real))

    if fact.level is not None and degree is not None and degree != fact.level:
        raise WickCalcError(
            ErrorCode.DIVISION_BY_ZERO_RECURRENCE,
            f"series terminates at degree {degree}, expected level {fact.level}",
        )
    log_coefficients = np.array(log_c)
    radius = math.inf if degree is not None else estimate_radius(log_coefficients, ratio_window)
    logger.debug(
        f"Solved kernel {spec.name}: {log_coefficients.size} terms, degree={degree}, radius={radius:.6g}"
    )
    return KernelFunction(
        indices=np.arange(log_coefficients.size),
        log_coefficients=log_coefficients,
        chart="radial",
        hbar=h,
        radius=radius,
        degree=degree,
        closed_form=closed_form,
    )


@dataclass(frozen=True)
class DensityFunction:
    """Measure density ``l(r)`` with ``dm = k(r) l(r) dzbar dz``."""

    log_density: LogEvaluator
    hbar: float
    lower: float
    upper: float
    tag: str
    center: float | None = None

    def value(self, r) -> np.ndarray:
        return np.exp(self.log_density(np.asarray(r, dtype=float)))

    def moment(self, n: int, rtol: float = 1e-10) -> float:
        """``(1/hbar) int r^n l(r) dr`` over the domain."""

        def integrand(r: float) -> float:
            return float(r**n * np.exp(self.log_density(np.asarray(r))))

        pieces = [(self.lower, self.upper)]
        if self.center is not None:
            pieces = [(self.lower, self.center), (self.center, self.upper)]
        total = 0.0
        error = 0.0
        for lo, hi in pieces:
            value, err = integrate.quad(integrand, lo, hi, epsabs=1e-13, epsrel=1e-12, limit=200)
            total += value
            error += err
        if not math.isfinite(total) or error > rtol * max(abs(total), 1e-300) * self.hbar:
            raise WickCalcError(
                ErrorCode.QUADRATURE_FAIL,
                f"density moment {n} did not converge (error {error:.2e})",
            )
        return total / self.hbar

    def normalization(self) -> float:
        return self.moment(0)


def along_flow(spec: AlgebraSpec, poly: AxisPolynomial, vacuum: Sequence[float]) -> np.polynomial.Polynomial:
    """``t -> poly(gamma^t a)`` as a univariate polynomial."""
    line = poly.compose(list(spec.flow.components))
    for value in vacuum:
        line = line.partial(1, value)
    return np.polynomial.Polynomial(line.univariate_coefficients())


def density_equation_residual(
    spec: AlgebraSpec, fact: Factorization, density: DensityFunction, r: Sequence[float], step: float = 1e-3
) -> float:
    """Relative residual of ``conj(E)(-h theta) l = r D(-h theta - h) l`` with ``theta = r d/dr``.

    ``theta`` derivatives are taken by 5-point central differences in ``s = log r``.
    """
    h = spec.hbar
    script_d = along_flow(spec, fact.D, fact.vacuum)
    script_e = along_flow(spec, fact.E, fact.vacuum)
    e_op = np.polynomial.Polynomial(np.conj(script_e.coef))(np.polynomial.Polynomial([0.0, -h]))
    d_op = script_d(np.polynomial.Polynomial([-h, -h]))
    if max(e_op.degree(), d_op.degree()) > 2:
        raise WickCalcError(ErrorCode.DEGREE_LIMIT, "density residual supports degree <= 2 multipliers")
    worst = 0.0
    for point in r:
        s = math.log(point)
        samples = density.value(np.exp(s + step * np.arange(-2, 3)))
        d0 = samples[2]
        d1 = (samples[0] - 8 * samples[1] + 8 * samples[3] - samples[4]) / (12 * step)
        d2 = (-samples[0] + 16 * samples[1] - 30 * samples[2] + 16 * samples[3] - samples[4]) / (
            12 * step**2
        )
        derivs = [d0, d1, d2]

        def apply(op: np.polynomial.Polynomial) -> complex:
            return complex(sum(c * derivs[m] for m, c in enumerate(op.coef)))

        lhs = apply(e_op)
        rhs = point * apply(d_op)
        worst = max(worst, abs(lhs - rhs) / max(abs(lhs), abs(rhs), 1e-300))
    return float(worst)


def semiclassical_time(
    script_d: np.polynomial.Polynomial, script_e: np.polynomial.Polynomial, r: float
) -> float:
    """Smallest positive root ``t`` of ``E(t) = r D(t)``; ``t = r F0'(r)``."""
    if r == 0.0:
        return 0.0
    roots = (script_e - r * script_d).roots()
    real = sorted(
        float(x.real) for x in roots if abs(x.imag) <= 1e-9 * max(1.0, abs(x)) and x.real > 0
    )
    if not real:
        raise WickCalcError(ErrorCode.NO_SOLUTION, f"no classical time at r={r}")
    return real[0]


def semiclassical_potential(spec: AlgebraSpec, fact: Factorization, r) -> np.ndarray:
    """Classical Kahler potential ``F0(r) = int_0^r t(s)/s ds``."""
    script_d = along_flow(spec, fact.D, fact.vacuum)
    script_e = along_flow(spec, fact.E, fact.vacuum)

    def integrand(s: float) -> float:
        if s == 0.0:
            # t(s) ~ s D(0) / E'(0)
            return float(np.real(script_d(0.0) / script_e.deriv()(0.0)))
        return semiclassical_time(script_d, script_e, s) / s

    r_arr = np.atleast_1d(np.asarray(r, dtype=float))
    out = np.empty_like(r_arr)
    for index, value in enumerate(r_arr):
        out[index], _ = integrate.quad(integrand, 0.0, value, epsabs=1e-13, epsrel=1e-11, limit=200)
    return out if np.ndim(r) else out[0]


def classical_metric(spec: AlgebraSpec, fact: Factorization, r) -> np.ndarray:
    """``g0(r) = (r F0'(r))' = t'(r) = D(t) / (E'(t) - r D'(t))``."""
    script_d = along_flow(spec, fact.D, fact.vacuum)
    script_e = along_flow(spec, fact.E, fact.vacuum)
    r_arr = np.atleast_1d(np.asarray(r, dtype=float))
    out = np.empty_like(r_arr)
    for index, value in enumerate(r_arr):
        t = semiclassical_time(script_d, script_e, float(value))
        slope = script_e.deriv()(t) - value * script_d.deriv()(t)
        out[index] = float(np.real(script_d(t) / slope))
    return out if np.ndim(r) else out[0]


def kernel_asymptotic_constant(spec: AlgebraSpec, fact: Factorization) -> float:
    """``lambda(a)^(1/2) / |D(a)|`` with ``lambda(a) = d/dt rho(gamma^t a)`` at ``t = 0``."""
    rho_line = along_flow(spec, spec.rho, fact.vacuum)
    classical_lambda = float(np.real(rho_line.deriv()(0.0)))
    return math.sqrt(classical_lambda) / abs(fact.D(*fact.vacuum))
