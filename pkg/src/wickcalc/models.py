"""Registry of quantized surface-of-revolution models."""

import math
from abc import ABC, abstractmethod
from functools import cached_property
from typing import Any, ClassVar

import numpy as np
from scipy.special import gammaln

from .algebra import (
    AlgebraSpec,
    AxisPolynomial,
    Factorization,
    FlowSpec,
    ValidationReport,
    validate_factorization,
)
from .errors import ErrorCode, WickCalcError
from .kernel import DensityFunction, KernelClosedForm, KernelFunction, solve_kernel
from .special import log_bessel_modified, log_euler_integral, log_macdonald_closed, log_theta

# Flow A -> A + t written in variables (t, A).
_TRANSLATION = FlowSpec(components=(AxisPolynomial(2, {(1, 0): 1.0, (0, 1): 1.0}),))


def _axis(value: complex = 0.0, linear: complex = 1.0) -> AxisPolynomial:
    """``value + linear * A`` on a one-dimensional axis."""
    return AxisPolynomial(1, {(0,): value, (1,): linear})


class Model(ABC):
    """A registered model: algebra, factorization, kernel and measure in one place."""

    name: ClassVar[str]
    chart: ClassVar[str] = "radial"
    grid_kind: ClassVar[str] = "plane"
    description: ClassVar[str] = ""

    def __init__(self, hbar: float) -> None:
        if not hbar > 0:
            raise WickCalcError(ErrorCode.CONFIG_INVALID, f"hbar must be positive, got {hbar}")
        self.hbar = float(hbar)
        self._kernels: dict[tuple[int, int], KernelFunction] = {}

    # -- algebra ----------------------------------------------------------------

    @abstractmethod
    def family(
        self, hbar: float, vacuum: tuple[float, ...] | None
    ) -> tuple[AlgebraSpec, Factorization]:
        """Unvalidated factorization at ``hbar``; ``vacuum=None`` gives the canonical one."""

    @cached_property
    def _validated(self) -> tuple[AlgebraSpec, Factorization, ValidationReport]:
        spec, draft = self.family(self.hbar, None)
        fact, report = validate_factorization(spec, draft)
        return spec, fact, report

    @property
    def spec(self) -> AlgebraSpec:
        return self._validated[0]

    @property
    def fact(self) -> Factorization:
        return self._validated[1]

    @property
    def validation(self) -> ValidationReport:
        return self._validated[2]

    @property
    def compact(self) -> bool:
        return self.fact.compact

    @property
    def level(self) -> int | None:
        return self.fact.level

    @property
    def casimir_value(self) -> float:
        """Scalar value of ``rho(A) - C B`` on the representation."""
        return float(np.real(self.fact.g(*self.fact.vacuum)))

    @abstractmethod
    def params(self) -> dict[str, Any]:
        """Echo of the physical parameters."""

    def with_hbar(self, hbar: float) -> "Model":
        params = {k: v for k, v in self.params().items() if k not in ("hbar", "N")}
        return type(self)(hbar=hbar, **params)

    # -- kernel and measure -------------------------------------------------------

    def kernel_closed_form(self) -> KernelClosedForm | None:
        return None

    def kernel(self, truncation: int = 256, ratio_window: int = 16) -> KernelFunction:
        key = (truncation, ratio_window)
        if key not in self._kernels:
            self._kernels[key] = solve_kernel(
                self.spec, self.fact, truncation, ratio_window, self.kernel_closed_form()
            )
        return self._kernels[key]

    density_domain: ClassVar[tuple[float, float]] = (0.0, math.inf)

    def log_density(self, r: np.ndarray) -> np.ndarray:
        raise WickCalcError(
            ErrorCode.NO_POSITIVE_SOLUTION, f"no registered measure density for {self.name}"
        )

    def density(self) -> DensityFunction:
        lower, upper = self.density_domain
        center = self.hbar if self.chart == "strip" else None
        return DensityFunction(
            log_density=self.log_density,
            hbar=self.hbar,
            lower=lower,
            upper=upper,
            tag=self.name,
            center=center,
        )

    def log_measure_density(self, r: np.ndarray) -> np.ndarray:
        """``log(k(r) l(r))``: density of ``dm`` against ``dzbar dz``."""
        return self.kernel().log_value(r) + self.log_density(r)

    def describe(self) -> dict[str, Any]:
        return {
            "name": self.name,
            "chart": self.chart,
            "grid": self.grid_kind,
            "compact": self.compact,
            "level": self.level,
            "closed_form": self.kernel_closed_form().tag if self.kernel_closed_form() else "none",
            "params": self.params(),
            "description": self.description,
        }


class SphereModel(Model):
    """Coadjoint orbit of su(2): the sphere with ``hbar = 2/N``."""

    name = "su2-sphere"
    grid_kind = "sphere"
    description = "su(2) sphere, rho = -A^2, quaternion algebra at N = 1"

    def __init__(self, N: int | None = None, hbar: float | None = None) -> None:
        if N is None and hbar is None:
            N = 1
        if N is None:
            assert hbar is not None
            level = 2.0 / hbar
            N = int(round(level))
            if abs(level - N) > 1e-9:
                raise WickCalcError(
                    ErrorCode.NON_QUANTIZED_LEVEL, f"hbar={hbar} is not of the form 2/N"
                )
        if N < 1:
            raise WickCalcError(ErrorCode.NO_SOLUTION, f"level N={N} is excluded (need N >= 1)")
        self.N = int(N)
        super().__init__(2.0 / self.N)

    def family(self, hbar, vacuum):
        a = vacuum[0] if vacuum is not None else -(1.0 + hbar / 2.0)
        spec = AlgebraSpec(
            flow=_TRANSLATION, rho=AxisPolynomial(1, {(2,): -1.0}), hbar=hbar, name=self.name
        )
        fact = Factorization(
            g=AxisPolynomial.constant(1, -(a**2)),
            D=_axis(a, 1.0),
            E=_axis(a, -1.0),
            vacuum=(a,),
            polar=(-a,),
        )
        return spec, fact

    def params(self):
        return {"N": self.N, "hbar": self.hbar}

    def with_hbar(self, hbar: float) -> "SphereModel":
        return SphereModel(hbar=hbar)

    def kernel_closed_form(self):
        N = self.N
        return KernelClosedForm(
            tag="geometric",
            log_real=lambda r: N * np.log1p(r),
            log_complex=lambda w: N * np.log(1.0 + w),
        )

    def log_density(self, r):
        return math.log(self.hbar * (self.N + 1)) - (self.N + 2) * np.log1p(r)

    @staticmethod
    def sphere_point(z) -> np.ndarray:
        """Unit vector ``xi`` of the chart point ``z``; last axis has length 3."""
        z = np.asarray(z, dtype=complex)
        r = np.abs(z) ** 2
        return np.stack([-2.0 * z.real, -2.0 * z.imag, r - 1.0], axis=-1) / (1.0 + r)[..., None]

    @staticmethod
    def chart_point(xi) -> np.ndarray:
        """Inverse of :meth:`sphere_point` away from the pole ``xi3 = 1``."""
        xi = np.asarray(xi, dtype=float)
        return -(xi[..., 0] + 1j * xi[..., 1]) / (1.0 - xi[..., 2])


class _Su11Model(Model):
    """Shared parameters of the su(1,1) hyperboloid models (``rho = A^2``, vacuum ``a > 0``)."""

    default_hbar: ClassVar[float] = 1.0

    def __init__(self, a: float = 1.0, hbar: float | None = None) -> None:
        if not a > 0:
            raise WickCalcError(ErrorCode.CONFIG_INVALID, f"{self.name} needs a > 0, got a={a}")
        self.a = float(a)
        super().__init__(self.default_hbar if hbar is None else hbar)

    @property
    def nu(self) -> float:
        return 2.0 * self.a / self.hbar

    def params(self):
        return {"a": self.a, "hbar": self.hbar}


class Su11DiskModel(_Su11Model):
    """Upper hyperboloid sheet on the unit disk: ``k = (1 - r)^(-(2a + hbar)/hbar)``."""

    name = "su11-variant1"
    grid_kind = "disk"
    description = "su(1,1) hyperboloid, D = A + a, E = A - a (disk chart)"
    density_domain = (0.0, 1.0)

    def family(self, hbar, vacuum):
        a = vacuum[0] if vacuum is not None else self.a
        spec = AlgebraSpec(
            flow=_TRANSLATION, rho=AxisPolynomial(1, {(2,): 1.0}), hbar=hbar, name=self.name
        )
        fact = Factorization(
            g=AxisPolynomial.constant(1, a**2), D=_axis(a, 1.0), E=_axis(-a, 1.0), vacuum=(a,)
        )
        return spec, fact

    def kernel_closed_form(self):
        power = (2.0 * self.a + self.hbar) / self.hbar
        return KernelClosedForm(
            tag="geometric",
            log_real=lambda r: -power * np.log1p(-r),
            log_complex=lambda w: -power * np.log(1.0 - w),
        )

    def log_density(self, r):
        with np.errstate(divide="ignore"):
            return math.log(2.0 * self.a) + (self.nu - 1.0) * np.log1p(-np.asarray(r))


class Su11PlaneModel(_Su11Model):
    """Hyperboloid sheet on the whole plane: ``k = I~_nu(2 sqrt(r)/hbar)``, ``nu = 2a/hbar``."""

    name = "su11-variant2"
    grid_kind = "plane"
    description = "su(1,1) hyperboloid, D = 1, E = A^2 - a^2 (plane chart, Bessel kernel)"
    default_hbar = 0.5

    def family(self, hbar, vacuum):
        a = vacuum[0] if vacuum is not None else self.a
        spec = AlgebraSpec(
            flow=_TRANSLATION, rho=AxisPolynomial(1, {(2,): 1.0}), hbar=hbar, name=self.name
        )
        fact = Factorization(
            g=AxisPolynomial.constant(1, a**2),
            D=AxisPolynomial.constant(1, 1.0),
            E=AxisPolynomial(1, {(2,): 1.0, (0,): -(a**2)}),
            vacuum=(a,),
        )
        return spec, fact

    def kernel_closed_form(self):
        nu, hbar = self.nu, self.hbar
        return KernelClosedForm(
            tag="bessel",
            log_real=lambda r: log_bessel_modified(nu, 2.0 * np.sqrt(r) / hbar),
        )

    def log_density(self, r):
        return log_macdonald_closed(self.nu, 2.0 * np.sqrt(np.asarray(r, dtype=float)) / self.hbar, self.hbar)


class ZeemanModel(Model):
    """Two-dimensional axis ``(A1, A2)`` with ``rho = A2^2`` and Casimir ``A1^2 + 4 A2``."""

    name = "zeeman"
    grid_kind = "half-line"
    description = "Zeeman algebra, gamma^t(a) = (a1 + 2t, a2 - a1 t - t^2), compact leaf"
    # Documentation only: the other splittings of rho - g into D * E.
    alternative_factorizations: ClassVar[tuple[str, ...]] = (
        "D = A2 - t_- A1 / 2 + ..., E = A2 + t_- A1 / 2 + ... (root t_- instead of t_+)",
        "D, E exchanged with the polar point as vacuum",
        "D, E exchanged together with t_+ <-> t_-",
    )

    def __init__(
        self,
        hbar: float | None = None,
        N: int | None = None,
        a1: float | None = None,
        a2: float = 1.0,
    ) -> None:
        hbar = 1.0 if hbar is None else float(hbar)
        if not a2 > 0:
            raise WickCalcError(ErrorCode.CONFIG_INVALID, f"zeeman needs a2 > 0, got a2={a2}")
        if a1 is None:
            a1 = -(N + 1) * hbar if N is not None else -2.0
        elif N is not None and abs(a1 + (N + 1) * hbar) > 1e-9:
            raise WickCalcError(
                ErrorCode.CONFIG_INVALID, f"a1={a1} is inconsistent with N={N}, hbar={hbar}"
            )
        self.a1 = float(a1)
        self.a2 = float(a2)
        super().__init__(hbar)

    def roots(self, a1: float | None = None, a2: float | None = None) -> tuple[float, float]:
        """``t_+ >= t_-``: roots of ``t^2 + a1 t - 2 a2``."""
        a1 = self.a1 if a1 is None else a1
        a2 = self.a2 if a2 is None else a2
        disc = a1**2 + 8.0 * a2
        if disc < 0:
            raise WickCalcError(ErrorCode.INCONSISTENT_FACTORIZATION, "complex roots t_+-")
        root = math.sqrt(disc) / 2.0
        return -a1 / 2.0 + root, -a1 / 2.0 - root

    def family(self, hbar, vacuum):
        a1, a2 = vacuum if vacuum is not None else (self.a1, self.a2)
        t_plus, _ = self.roots(a1, a2)
        flow = FlowSpec(
            components=(
                AxisPolynomial(3, {(0, 1, 0): 1.0, (1, 0, 0): 2.0}),
                AxisPolynomial(3, {(0, 0, 1): 1.0, (1, 1, 0): -1.0, (2, 0, 0): -1.0}),
            ),
            invariants=(AxisPolynomial(2, {(2, 0): 1.0, (0, 1): 4.0}),),
        )
        spec = AlgebraSpec(flow=flow, rho=AxisPolynomial(2, {(0, 2): 1.0}), hbar=hbar, name=self.name)
        shift = 0.5 * t_plus * a1 - a2
        fact = Factorization(
            g=AxisPolynomial(
                2, {(2, 0): 0.25 * t_plus**2, (0, 1): t_plus**2, (0, 0): -0.25 * t_plus**4}
            ),
            D=AxisPolynomial(2, {(0, 1): 1.0, (1, 0): 0.5 * t_plus, (0, 0): shift}),
            E=AxisPolynomial(2, {(0, 1): 1.0, (1, 0): -0.5 * t_plus, (0, 0): shift}),
            vacuum=(float(a1), float(a2)),
        )
        return spec, fact

    def params(self):
        return {"a1": self.a1, "a2": self.a2, "hbar": self.hbar, "N": self.level}

    def with_hbar(self, hbar: float) -> "ZeemanModel":
        return ZeemanModel(hbar=hbar, N=self.level, a2=self.a2)

    def product_coefficients(self) -> np.ndarray:
        """``c_n = binom(N, n) prod_j (t_+ - j h)/(|t_-| + j h)`` evaluated directly."""
        N = self.level or 0
        t_plus, t_minus = self.roots()
        h = self.hbar
        out = np.empty(N + 1)
        for n in range(N + 1):
            value = math.comb(N, n)
            for j in range(1, n + 1):
                value *= (t_plus - j * h) / (abs(t_minus) + j * h)
            out[n] = value
        return out

    def kernel_closed_form(self):
        log_c = np.log(self.product_coefficients())
        n = np.arange(log_c.size)

        def log_real(r):
            with np.errstate(divide="ignore", invalid="ignore"):
                terms = np.where(n == 0, 0.0, np.multiply.outer(np.log(r), n))
            return np.logaddexp.reduce(log_c + terms, axis=-1)

        return KernelClosedForm(tag="jacobi-poly", log_real=log_real)

    def log_density(self, r):
        N = self.level or 0
        t_plus, t_minus = self.roots()
        h = self.hbar
        alpha = t_plus / h
        beta = 1.0 + (t_plus + abs(t_minus)) / h
        prefactor = (
            math.log(h * (N + 1))
            + gammaln(beta)
            - gammaln(alpha)
            - gammaln(1.0 + abs(t_minus) / h)
        )
        return prefactor + log_euler_integral(r, alpha, beta, N + 2.0)


class _StripModel(Model):
    """Models on the periodic strip ``z = r/2 + i t``, ``t`` of period ``2 pi``."""

    chart = "strip"
    grid_kind = "strip"
    density_domain = (-math.inf, math.inf)

    def __init__(self, hbar: float | None = None, a0: float = 0.0) -> None:
        self.a0 = float(a0)
        super().__init__(1.0 if hbar is None else hbar)

    @property
    def multiplier(self) -> AxisPolynomial:
        """``M(A)`` in ``B b_n = M(A_n) ...``; equals ``D``."""
        return self.fact.D

    def kernel_closed_form(self):
        h = self.hbar
        q = math.exp(-h)
        return KernelClosedForm(
            tag="theta",
            log_real=lambda r: np.real(log_theta(np.asarray(r) - h, q)),
            log_complex=lambda w: log_theta(np.asarray(w) - h, q),
        )

    def log_density(self, r):
        h = self.hbar
        r = np.asarray(r, dtype=float)
        return 0.5 * math.log(h / (4.0 * math.pi)) - (r - h) ** 2 / (4.0 * h)

    def log_measure_density(self, r):
        """Theta form ``dm = (1/2) T(r) dzbar dz``, ``T = theta(i pi (r-h)/h, e^(-pi^2/h))``."""
        h = self.hbar
        r = np.asarray(r, dtype=float)
        dual = log_theta(1j * math.pi * (r - h) / h, math.exp(-(math.pi**2) / h), allow_transform=False)
        return math.log(0.5) + np.real(dual)

    def params(self):
        return {"hbar": self.hbar, "a0": self.a0}


class CylinderModel(_StripModel):
    """Flat cylinder: ``rho = 1``, ``M = 1``."""

    name = "cylinder"
    description = "cylinder T*S^1 with theta kernel and tunneling corrections"

    def family(self, hbar, vacuum):
        spec = AlgebraSpec(
            flow=_TRANSLATION, rho=AxisPolynomial.constant(1, 1.0), hbar=hbar, name=self.name
        )
        one = AxisPolynomial.constant(1, 1.0)
        fact = Factorization(
            g=AxisPolynomial.constant(1, 0.0), D=one, E=one, vacuum=(self.a0,), chart="strip"
        )
        return spec, fact


class PrimeSeriesModel(_StripModel):
    """One-sheet hyperboloid of su(1,1): ``rho = A^2``, ``M = A - i lambda``."""

    name = "su11-prime"
    description = "su(1,1) prime series on the strip, Casimir -lambda^2"

    def __init__(self, hbar: float | None = None, lam: float = 1.0, a0: float = 0.0) -> None:
        if not lam > 0:
            raise WickCalcError(ErrorCode.CONFIG_INVALID, f"su11-prime needs lambda > 0, got {lam}")
        self.lam = float(lam)
        super().__init__(hbar, a0)

    def family(self, hbar, vacuum):
        lam = self.lam
        spec = AlgebraSpec(
            flow=_TRANSLATION, rho=AxisPolynomial(1, {(2,): 1.0}), hbar=hbar, name=self.name
        )
        fact = Factorization(
            g=AxisPolynomial.constant(1, -(lam**2)),
            D=_axis(-1j * lam, 1.0),
            E=_axis(1j * lam, 1.0),
            vacuum=(self.a0,),
            chart="strip",
        )
        return spec, fact

    def params(self):
        return {"hbar": self.hbar, "lam": self.lam, "a0": self.a0}


MODEL_REGISTRY: dict[str, type[Model]] = {
    cls.name: cls
    for cls in (
        CylinderModel,
        PrimeSeriesModel,
        Su11DiskModel,
        Su11PlaneModel,
        SphereModel,
        ZeemanModel,
    )
}
MODEL_NAMES: tuple[str, ...] = tuple(sorted(MODEL_REGISTRY))
MODEL_ALIASES: dict[str, str] = {"su11": "su11-variant1"}


def create_model(name: str, **params: Any) -> Model:
    """Instantiate a registered model; unset parameters take model defaults."""
    resolved = MODEL_ALIASES.get(name, name)
    if resolved not in MODEL_REGISTRY:
        raise WickCalcError(
            ErrorCode.UNKNOWN_MODEL,
            f"unknown model '{name}'; registered models: {', '.join(MODEL_NAMES)}",
        )
    params = {k: v for k, v in params.items() if v is not None}
    try:
        return MODEL_REGISTRY[resolved](**params)
    except TypeError as e:
        raise WickCalcError(ErrorCode.CONFIG_INVALID, f"bad parameters for {resolved}: {e}") from e


def solve_density(model: Model, tol: float = 1e-10) -> DensityFunction:
    """Measure density of ``model`` with ``(1/hbar) int l = 1`` verified by quadrature."""
    density = model.density()
    norm = density.normalization()
    if abs(norm - 1.0) > tol:
        raise WickCalcError(
            ErrorCode.QUADRATURE_FAIL,
            f"density of {model.name} integrates to {norm:.12g}, expected 1",
            normalization=norm,
        )
    return density
