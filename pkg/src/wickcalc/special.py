"""Special functions: theta series with nome duality, modified Bessel and Macdonald kernels."""

import math

import numpy as np
from scipy import integrate
from scipy.special import gammaln, ive, kve, logsumexp

from .errors import ErrorCode, WickCalcError

# Terms below exp(-_TAIL) relative to the largest term are dropped.
_TAIL = 41.5


def logsumexp_complex(exponents: np.ndarray, axis: int = -1) -> np.ndarray:
    """Complex ``log sum exp`` along ``axis``, scaled by the largest real part."""
    peak = np.max(exponents.real, axis=axis, keepdims=True)
    peak = np.where(np.isfinite(peak), peak, 0.0)
    total = np.sum(np.exp(exponents - peak), axis=axis)
    with np.errstate(divide="ignore"):
        return np.squeeze(peak, axis=axis) + np.log(total.astype(complex))


def _nome_rate(q: float) -> float:
    if not 0.0 <= q < 1.0:
        raise WickCalcError(ErrorCode.DIVERGENT, f"theta series needs 0 <= q < 1, got q={q}")
    return math.inf if q == 0.0 else -math.log(q)


def _log_theta_direct(alpha: np.ndarray, tau: float) -> np.ndarray:
    """``log sum_n exp(-tau n^2 + n alpha)`` by direct summation around the dominant index."""
    if math.isinf(tau):
        return np.zeros_like(alpha, dtype=complex)
    center = np.rint(alpha.real / (2.0 * tau))
    width = int(math.ceil(math.sqrt(_TAIL / tau))) + 2
    offsets = np.arange(-width, width + 1)
    n = center[..., None] + offsets
    exponents = -tau * n**2 + n * alpha[..., None]
    return logsumexp_complex(exponents, axis=-1)


def log_theta(alpha, q: float, allow_transform: bool = True):
    """Complex logarithm of ``theta(alpha, q) = sum_n q^(n^2) exp(n alpha)``.

    For ``q`` close to 1 (``-log q < pi``) the Jacobi-transformed series with the dual nome
    ``exp(-pi^2 / tau)`` is summed instead.
    """
    tau = _nome_rate(q)
    a = np.asarray(alpha, dtype=complex)
    if allow_transform and tau < math.pi:
        dual = _log_theta_direct(1j * math.pi * a / tau, math.pi**2 / tau)
        result = 0.5 * math.log(math.pi / tau) + a**2 / (4.0 * tau) + dual
    else:
        result = _log_theta_direct(a, tau)
    return result if result.shape else complex(result)


def theta(alpha, q: float, allow_transform: bool = True):
    """``theta(alpha, q)``; real for real ``alpha``."""
    value = np.exp(log_theta(alpha, q, allow_transform))
    if not np.iscomplexobj(np.asarray(alpha)):
        value = np.real(value)
    return value


def theta_jacobi_transform(r, hbar: float) -> tuple[np.ndarray, np.ndarray]:
    """Both sides of the Jacobi identity for the cylinder kernel, each summed directly.

    ``theta(r - h, e^-h) = sqrt(pi/h) exp((r-h)^2 / 4h) theta(i pi (r-h)/h, e^(-pi^2/h))``
    """
    x = np.asarray(r, dtype=float) - hbar
    lhs = np.exp(log_theta(x, math.exp(-hbar), allow_transform=False)).real
    dual = log_theta(1j * math.pi * x / hbar, math.exp(-(math.pi**2) / hbar), allow_transform=False)
    rhs = np.exp(0.5 * math.log(math.pi / hbar) + x**2 / (4.0 * hbar) + dual).real
    return lhs, rhs


def dual_theta_derivatives(r, hbar: float) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """``T, T', T''`` for ``T(r) = theta(i pi (r - hbar)/hbar, exp(-pi^2/hbar))``."""
    x = np.asarray(r, dtype=float) - hbar
    omega = math.pi / hbar
    width = int(math.ceil(math.sqrt(_TAIL * hbar) / math.pi)) + 3
    n = np.arange(1, width + 1)
    weights = np.exp(-(math.pi**2) * n**2 / hbar)
    phase = omega * np.multiply.outer(x, n)
    value = 1.0 + 2.0 * np.sum(weights * np.cos(phase), axis=-1)
    first = -2.0 * np.sum(weights * omega * n * np.sin(phase), axis=-1)
    second = -2.0 * np.sum(weights * (omega * n) ** 2 * np.cos(phase), axis=-1)
    return value, first, second


def log_bessel_modified(nu: float, y) -> np.ndarray:
    """``log I~_nu(y)`` from the power series ``sum (y/2)^(2n) G(nu+1) / (n! G(nu+n+1))``."""
    if nu <= -1.0:
        raise WickCalcError(ErrorCode.DIVERGENT, f"normalized Bessel series needs nu > -1, got {nu}")
    shape = np.shape(y)
    y_arr = np.asarray(y, dtype=float).ravel()
    if np.any(y_arr < 0):
        raise ValueError("bessel argument must be non-negative")
    y_max = float(np.max(y_arr)) if y_arr.size else 0.0
    n_max = int(y_max / 2.0 + 10.0 * math.sqrt(y_max + 1.0) + 40)
    n = np.arange(n_max + 1)
    base = gammaln(nu + 1.0) - gammaln(n + 1.0) - gammaln(nu + n + 1.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        log_half = np.log(y_arr / 2.0)
        exponents = np.where(n == 0, 0.0, 2.0 * n * log_half[:, None]) + base
    result = logsumexp(exponents, axis=-1).reshape(shape)
    return result if shape else float(result)


def bessel_modified(nu: float, y):
    """Normalized modified Bessel function ``I~_nu(y) = G(nu+1) (2/y)^nu I_nu(y)``."""
    return np.exp(log_bessel_modified(nu, y))


def bessel_modified_scipy(nu: float, y):
    """Closed-form cross-check of :func:`bessel_modified` through ``scipy.special.ive``."""
    y_arr = np.asarray(y, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        log_value = gammaln(nu + 1.0) + nu * np.log(2.0 / y_arr) + np.log(ive(nu, y_arr)) + y_arr
    return np.where(y_arr == 0.0, 1.0, np.exp(log_value))


def _macdonald_integral(nu: float, y: float) -> tuple[float, float]:
    """``log int exp(-y cosh t - nu t) dt`` by adaptive quadrature, with its relative error."""
    t0 = -math.asinh(nu / y)
    floor = y * math.cosh(t0) + nu * t0

    def exponent(t: float) -> float:
        return y * math.cosh(t) + nu * t - floor

    span = 1.0
    while min(exponent(t0 - span), exponent(t0 + span)) < 60.0 and span < 64.0:
        span *= 2.0
    value, error = integrate.quad(
        lambda t: math.exp(-exponent(t)),
        t0 - span,
        t0 + span,
        points=[t0],
        epsabs=0.0,
        epsrel=1e-12,
        limit=200,
    )
    if not math.isfinite(value) or value <= 0.0:
        raise WickCalcError(ErrorCode.QUADRATURE_FAIL, f"Macdonald integral failed at y={y}")
    return math.log(value) - floor, error / value


def log_macdonald_modified(nu: float, y, hbar: float = 1.0, rtol: float = 1e-9) -> np.ndarray:
    """``log M~_nu(y)``, ``M~_nu(y) = (y/2)^nu / (hbar G(nu+1)) int exp(-y cosh t - nu t) dt``."""
    if nu <= 0.0:
        raise WickCalcError(ErrorCode.DIVERGENT, f"Macdonald density needs nu > 0, got {nu}")
    y_arr = np.atleast_1d(np.asarray(y, dtype=float))
    out = np.empty_like(y_arr)
    prefactor = -math.log(hbar) - float(gammaln(nu + 1.0))
    for index, value in enumerate(y_arr):
        if value == 0.0:
            # (y/2)^nu * 2 K_nu(y) -> Gamma(nu) as y -> 0
            out[index] = float(gammaln(nu)) + prefactor
            continue
        log_integral, relative_error = _macdonald_integral(nu, float(value))
        if relative_error > rtol:
            raise WickCalcError(
                ErrorCode.QUADRATURE_FAIL,
                f"Macdonald integral at y={value} has relative error {relative_error:.2e}",
            )
        out[index] = nu * math.log(value / 2.0) + log_integral + prefactor
    return out if np.ndim(y) else out[0]


def macdonald_modified(nu: float, y, hbar: float = 1.0):
    return np.exp(log_macdonald_modified(nu, y, hbar))


def log_macdonald_closed(nu: float, y, hbar: float = 1.0):
    """``log M~_nu`` through ``2 (y/2)^nu K_nu(y) / (hbar G(nu+1))`` with ``scipy.special.kve``."""
    y_arr = np.asarray(y, dtype=float)
    limit = float(gammaln(nu)) - math.log(hbar) - float(gammaln(nu + 1.0))
    with np.errstate(divide="ignore", invalid="ignore"):
        value = (
            nu * np.log(y_arr / 2.0)
            + np.log(kve(nu, y_arr))
            - y_arr
            + math.log(2.0)
            - math.log(hbar)
            - gammaln(nu + 1.0)
        )
    return np.where(y_arr == 0.0, limit, value)


def log_euler_integral(r, alpha: float, beta: float, power: float, rtol: float = 1e-9):
    """``log int_0^inf l^alpha (1 + l r)^(-power) (1 + l)^(-beta) dl`` for ``r >= 0``."""
    r_arr = np.atleast_1d(np.asarray(r, dtype=float))
    # Grid rows repeat each radius once per angle.
    unique, inverse = np.unique(r_arr, return_inverse=True)
    out = np.empty_like(unique)
    for index, value in enumerate(unique):
        log_r = math.log(value) if value > 0 else -math.inf

        def log_integrand(u: float, log_r: float = log_r) -> float:
            inner = np.logaddexp(0.0, u + log_r) if math.isfinite(log_r) else 0.0
            return (alpha + 1.0) * u - power * inner - beta * np.logaddexp(0.0, u)

        peak_u = math.log(alpha + 1.0) - math.log(max(beta + power - alpha - 1.0, 1e-3))
        shift = log_integrand(peak_u)
        integral, error = integrate.quad(
            lambda u: math.exp(log_integrand(u) - shift),
            -np.inf,
            np.inf,
            epsabs=0.0,
            epsrel=1e-12,
            limit=400,
        )
        if not math.isfinite(integral) or integral <= 0.0 or error > rtol * integral:
            raise WickCalcError(
                ErrorCode.QUADRATURE_FAIL, f"Euler density integral failed at r={value}"
            )
        out[index] = math.log(integral) + shift
    result = out[inverse].reshape(r_arr.shape)
    return result if np.ndim(r) else result[0]
