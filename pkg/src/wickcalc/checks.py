"""Named checks, their registry and the suites that group them.

Every check is a function of a :class:`CheckContext` returning a :class:`Measurement`; the
registry wraps it into a :class:`CheckResult` with the check id, timing and failure handling.
"""

import math
import threading
import time
from collections.abc import Callable, Sequence
from dataclasses import dataclass, field
from functools import partial
from typing import Any, TypeVar

import numpy as np
from loguru import logger
from pydantic import BaseModel, Field

from .algebra import AxisPolynomial
from .config import ScenarioConfig, ToleranceConfig
from .errors import ErrorCode, WickCalcError
from .kernel import semiclassical_potential
from .models import (
    MODEL_ALIASES,
    MODEL_NAMES,
    Model,
    PrimeSeriesModel,
    SphereModel,
    Su11DiskModel,
    ZeemanModel,
    create_model,
    solve_density,
)
from .normal_product import associativity_residual, casimir_centrality, star
from .quadrature import ChartGrid, grid_for
from .representation import (
    OperatorSet,
    RepSpace,
    WickOperator,
    build_operators,
    build_space,
    casimir_matrix,
    verify_relations,
)
from .restriction import (
    casimir_eigenvalue,
    character_table,
    e1_normal_coefficients,
    group_element_unitarity,
    homomorphism_residual,
    lie_generators,
    random_normal_polynomial,
    random_sphere_points,
    restriction_expansion,
    restriction_symbol_closed,
    restriction_symbol_ode,
)
from .special import theta_jacobi_transform
from .tunneling import (
    STAR_PAIRS,
    dual_measure_residual,
    flat_heat_residual,
    heat_kernel_comparison,
    kernel_functional_equation,
    periodicity_residual,
    prime_series_check,
    star_remainder_fit,
    star_remainder_profile,
    star_remainder_quadrature,
    tunneling_gap,
)
from .wick import (
    CoherentStates,
    coherent_states,
    dimension_formula,
    frobenius_residual,
    hbar_expansion_check,
    probability_normalization,
    resolution_of_identity,
    sphere_spectral_check,
    star_operator_route,
    star_quadrature_route,
    symbol_from_operator,
)

T = TypeVar("T")

SUITES: dict[str, str] = {
    "acceptance": "Reference values of every model against closed forms and tables",
    "properties": "Associativity, trace symmetry, resolution of identity, normalization, adjoints",
    "quaternion": "Multiplication table of the level-1 sphere",
    "tunneling": "Theta kernel identities and exponentially small remainders on the cylinder",
}

RADIAL_MODELS = ("su11-variant1", "su11-variant2", "su2-sphere", "zeeman")

CASIMIR_LEVELS = tuple(range(1, 17))
DIMENSION_LEVELS = {"su2-sphere": (2, 5, 10), "zeeman": (1, 3)}
SPECTRUM_LEVEL = 4
SPECTRUM_MAX_DEGREE = 6
CHARACTER_LEVELS = (3, 6)
ODE_LEVEL = 6
ODE_SAMPLES = 50
JACOBI_HBARS = (0.5, 1.0, 2.0)
HOMOMORPHISM_PAIRS = 20
# Plane evaluation points stay well inside the quadrature radius.
PLANE_POINT_RADIUS = 4.0

# x^j * x^l = scalar + coefficient * x^m on the level-1 sphere
QUATERNION_TABLE: dict[tuple[int, int], tuple[complex, complex, int | None]] = {
    (1, 1): (1.0, 0.0, None),
    (2, 2): (1.0, 0.0, None),
    (3, 3): (1.0, 0.0, None),
    (1, 2): (0.0, -1j, 3),
    (2, 1): (0.0, 1j, 3),
    (2, 3): (0.0, -1j, 1),
    (3, 2): (0.0, 1j, 1),
    (3, 1): (0.0, -1j, 2),
    (1, 3): (0.0, 1j, 2),
}


class TableData(BaseModel):
    """A CSV table produced by a check."""

    name: str
    header: list[str]
    rows: list[list[Any]]


class CheckResult(BaseModel):
    """Outcome of one check; ``runtime_ms`` and tables are kept out of the JSON comparison."""

    id: str
    model: str
    inputs: dict[str, Any] = Field(default_factory=dict)
    value: float
    target: float
    tolerance: float
    passed: bool
    detail: str = ""
    runtime_ms: float = Field(default=0.0, exclude=True)
    tables: list[TableData] = Field(default_factory=list, exclude=True)


@dataclass
class Measurement:
    """What a check function measured; ``passed`` defaults to ``|value - target| <= tolerance``."""

    value: float
    target: float
    tolerance: float
    inputs: dict[str, Any] = field(default_factory=dict)
    passed: bool | None = None
    detail: str = ""
    tables: list[TableData] = field(default_factory=list)

    def verdict(self) -> bool:
        if self.passed is not None:
            return self.passed
        return math.isfinite(self.value) and abs(self.value - self.target) <= self.tolerance


class CheckContext:
    """Scenario, model and a cache of spaces, operators, grids and coherent states."""

    def __init__(self, config: ScenarioConfig, model: Model | None = None) -> None:
        self.config = config
        self.model = model or create_model(config.model, **config.params.as_kwargs())
        self.logger = logger.bind(component="checks")
        self._cache: dict[tuple[Any, ...], Any] = {}
        self._lock = threading.Lock()

    @property
    def tolerances(self) -> ToleranceConfig:
        return self.config.tolerances

    def _cached(self, kind: str, model: Model, build: Callable[[], T]) -> T:
        key = (kind, model.name, tuple(sorted(model.params().items())))
        with self._lock:
            if key in self._cache:
                return self._cache[key]
        value = build()
        with self._lock:
            return self._cache.setdefault(key, value)

    def space(self, model: Model | None = None) -> RepSpace:
        model = model or self.model
        kc = self.config.kernel
        return self._cached(
            "space",
            model,
            lambda: build_space(model, kc.dim, kc.strip_modes, kc.truncation, kc.ratio_window),
        )

    def operators(self, model: Model | None = None) -> OperatorSet:
        model = model or self.model
        return self._cached(
            "operators",
            model,
            lambda: build_operators(
                model, self.space(model), self.config.kernel.margin, self.tolerances.relation
            ),
        )

    def grid(self, model: Model | None = None) -> ChartGrid:
        model = model or self.model
        return self._cached(
            "grid",
            model,
            lambda: grid_for(model, self.config.grid, self.config.kernel.strip_modes),
        )

    def states(self, model: Model | None = None) -> CoherentStates:
        model = model or self.model
        return self._cached(
            "states",
            model,
            lambda: coherent_states(model, self.space(model), self.grid(model)),
        )

    def rng(self, salt: int = 0) -> np.random.Generator:
        return np.random.default_rng([self.config.seed, salt])


CheckFunction = Callable[[CheckContext], Measurement]


@dataclass(frozen=True)
class CheckSpec:
    id: str
    models: tuple[str, ...]
    suites: tuple[str, ...]
    func: CheckFunction
    summary: str = ""


CHECKS: dict[str, CheckSpec] = {}


def register(
    check_id: str, models: Sequence[str], suites: Sequence[str] = (), summary: str = ""
) -> Callable[[CheckFunction], CheckFunction]:
    """Decorator adding a check function to :data:`CHECKS`."""

    def decorator(func: CheckFunction) -> CheckFunction:
        if check_id in CHECKS:
            raise ValueError(f"check '{check_id}' registered twice")
        unknown = set(suites) - set(SUITES)
        if unknown:
            raise ValueError(f"check '{check_id}' names unknown suites {sorted(unknown)}")
        CHECKS[check_id] = CheckSpec(check_id, tuple(models), tuple(suites), func, summary)
        return func

    return decorator


def _resolve_model(model: str) -> str:
    name = MODEL_ALIASES.get(model, model)
    if name not in MODEL_NAMES:
        raise WickCalcError(
            ErrorCode.UNKNOWN_MODEL,
            f"unknown model '{model}'; registered models: {', '.join(MODEL_NAMES)}",
        )
    return name


def list_models() -> list[str]:
    return list(MODEL_NAMES)


def list_checks(model: str) -> list[str]:
    """Alphabetized ids of the checks registered for ``model``."""
    name = _resolve_model(model)
    return sorted(check_id for check_id, spec in CHECKS.items() if name in spec.models)


def select_checks(model: str, suite: str | None = None, ids: Sequence[str] = ()) -> list[str]:
    """Checks for a run: explicit ``ids``, else the suite members, else all checks of the model."""
    available = list_checks(model)
    if ids:
        missing = [check_id for check_id in ids if check_id not in available]
        if missing:
            raise WickCalcError(
                ErrorCode.CONFIG_INVALID,
                f"checks {', '.join(missing)} are not registered for {model}",
            )
        return sorted(set(ids))
    if suite is None:
        return available
    if suite not in SUITES:
        raise WickCalcError(
            ErrorCode.CONFIG_INVALID, f"unknown suite '{suite}'; suites: {', '.join(SUITES)}"
        )
    selected = [check_id for check_id in available if suite in CHECKS[check_id].suites]
    if not selected:
        raise WickCalcError(ErrorCode.CONFIG_INVALID, f"suite '{suite}' has no checks for {model}")
    return selected


def run_check(check_id: str, ctx: CheckContext) -> CheckResult:
    """Run one check; library errors become a failed result carrying the error text."""
    spec = CHECKS[check_id]
    start = time.perf_counter()
    try:
        measurement = spec.func(ctx)
    except WickCalcError as e:
        ctx.logger.warning(f"Check {check_id} raised {e}")
        measurement = Measurement(
            value=math.nan, target=math.nan, tolerance=math.nan, passed=False, detail=str(e)
        )
    elapsed = (time.perf_counter() - start) * 1000.0
    result = CheckResult(
        id=check_id,
        model=ctx.model.name,
        inputs=measurement.inputs,
        value=measurement.value,
        target=measurement.target,
        tolerance=measurement.tolerance,
        passed=bool(measurement.verdict()),
        detail=measurement.detail,
        runtime_ms=elapsed,
        tables=measurement.tables,
    )
    ctx.logger.debug(f"{check_id}: value={result.value:.6g} passed={result.passed} ({elapsed:.0f} ms)")
    return result


# -- helpers ----------------------------------------------------------------------------------


def _max_abs(values: Any) -> float:
    return float(np.max(np.abs(np.asarray(values)), initial=0.0))


def _normalization_points(model: Model) -> np.ndarray:
    """A few chart points well inside the resolved region of the model's grid."""
    if model.chart == "strip":
        return (model.hbar + np.array([-1.0, 0.0, 1.0])) / 2.0 + 1.1j
    radii = {
        "sphere": (0.25, 1.0, 4.0),
        "half-line": (0.25, 1.0, 4.0),
        "disk": (0.0, 0.2, 0.5),
        "plane": (0.5, 2.0, 8.0),
    }[model.grid_kind]
    return np.sqrt(np.array(radii)) * np.exp(0.7j)


def _resolved_indices(space: RepSpace) -> np.ndarray:
    """Basis positions on which the quadrature resolves the identity for a truncated space."""
    if space.compact:
        return np.arange(space.dim)
    if space.chart == "strip":
        return np.flatnonzero(np.abs(space.indices) <= 4)
    return np.arange(min(space.dim, 8))


def _evaluation_points(ctx: CheckContext, model: Model) -> np.ndarray:
    states = ctx.states(model)
    points = states.sample()
    if model.grid_kind == "plane":
        points = points[states.grid.radial[points] <= PLANE_POINT_RADIUS]
    return points


def _random_operator(ctx: CheckContext, model: Model, rng: np.random.Generator) -> WickOperator:
    ops = ctx.operators(model)
    return random_normal_polynomial(len(ops.A), rng).to_operator(ops)


# -- su2 sphere: quaternion table and Casimir ----------------------------------------------------


def _quaternion_product(j: int, l: int, ctx: CheckContext) -> Measurement:
    model = SphereModel(N=1)
    states = ctx.states(model)
    x = lie_generators(model, ctx.operators(model))
    points = states.sample()
    scalar, coefficient, m = QUATERNION_TABLE[(j, l)]
    target = np.full(points.size, scalar, dtype=complex)
    if m is not None:
        target = target + coefficient * symbol_from_operator(x[m - 1], states, points).values
    by_operator = star_operator_route(x[j - 1], x[l - 1], states, points).values
    by_quadrature = star_quadrature_route(x[j - 1], x[l - 1], states, points).values
    operator_error = _max_abs(by_operator - target)
    quadrature_error = _max_abs(by_quadrature - target)
    return Measurement(
        value=max(operator_error, quadrature_error),
        target=0.0,
        tolerance=ctx.tolerances.relation,
        inputs={"N": 1, "hbar": model.hbar, "product": f"x{j}*x{l}", "nodes": int(points.size)},
        detail=f"operator route {operator_error:.2e}, quadrature route {quadrature_error:.2e}",
    )


for _j, _l in sorted(QUATERNION_TABLE):
    register(
        f"quaternion-x{_j}x{_l}",
        ("su2-sphere",),
        ("quaternion", "acceptance"),
        f"x{_j}*x{_l} on the level-1 sphere by both star routes",
    )(partial(_quaternion_product, _j, _l))


@register("quaternion-casimir", ("su2-sphere",), ("quaternion",), "sum x^j*x^j = 1 + hbar at N=1")
def quaternion_casimir(ctx: CheckContext) -> Measurement:
    model = SphereModel(N=1)
    states = ctx.states(model)
    x = lie_generators(model, ctx.operators(model))
    points = states.sample()
    total = sum(star_quadrature_route(xj, xj, states, points).values for xj in x)
    return Measurement(
        value=_max_abs(total - (1.0 + model.hbar)),
        target=0.0,
        tolerance=ctx.tolerances.relation,
        inputs={"N": 1, "hbar": model.hbar},
    )


@register(
    "casimir-1-plus-hbar",
    ("su2-sphere",),
    ("acceptance",),
    "sum (x^j)^2 = (1 + hbar) I for N = 1..16",
)
def casimir_one_plus_hbar(ctx: CheckContext) -> Measurement:
    worst = 0.0
    rows = []
    for N in CASIMIR_LEVELS:
        model = SphereModel(N=N)
        casimir = casimir_matrix(model, ctx.operators(model), margin=0)
        deviation = _max_abs(casimir.matrix - (1.0 + model.hbar) * np.eye(casimir.space.dim))
        rows.append([N, model.hbar, 1.0 + model.hbar, deviation])
        worst = max(worst, deviation)
    return Measurement(
        value=worst,
        target=0.0,
        tolerance=ctx.tolerances.casimir,
        inputs={"levels": list(CASIMIR_LEVELS)},
        tables=[TableData(name="casimir", header=["N", "hbar", "eigenvalue", "deviation"], rows=rows)],
    )


@register(
    "casimir-restriction",
    ("su2-sphere",),
    ("properties",),
    "Restricted Casimir symbol is the constant 1 + hbar",
)
def casimir_restriction(ctx: CheckContext) -> Measurement:
    model = ctx.model
    eigen = casimir_eigenvalue(
        model, ctx.operators(model), ctx.states(model), tol=ctx.tolerances.relation
    )
    expected = 1.0 + model.hbar
    return Measurement(
        value=max(abs(eigen.value - expected), abs(eigen.matrix_value - expected)),
        target=0.0,
        tolerance=ctx.tolerances.relation,
        inputs=model.params(),
        detail=f"symbol spread {eigen.spread:.2e}",
    )


# -- sphere geometry ------------------------------------------------------------------------------


@register(
    "dimension-formula",
    ("su2-sphere", "zeeman"),
    ("acceptance",),
    "(1/2 pi hbar) int (1 + hbar sigma1) dm^omega = dim and Gauss-Bonnet = 2",
)
def dimension_check(ctx: CheckContext) -> Measurement:
    worst = 0.0
    rows = []
    for N in DIMENSION_LEVELS[ctx.model.name]:
        model = SphereModel(N=N) if ctx.model.name == "su2-sphere" else ZeemanModel(N=N)
        result = dimension_formula(model, ctx.grid(model))
        worst = max(worst, result.residual, abs(result.gauss_bonnet - 2.0))
        rows.append([N, result.expected, result.value, result.gauss_bonnet])
    return Measurement(
        value=worst,
        target=0.0,
        tolerance=1e-6,
        inputs={"levels": list(DIMENSION_LEVELS[ctx.model.name])},
        tables=[
            TableData(
                name="dimension", header=["N", "dim", "quadrature", "gauss_bonnet"], rows=rows
            )
        ],
    )


@register(
    "probability-spectrum",
    ("su2-sphere",),
    ("acceptance",),
    "Probability operator eigenvalues on harmonics of degree 0..6 at N = 4",
)
def probability_spectrum(ctx: CheckContext) -> Measurement:
    model = SphereModel(N=SPECTRUM_LEVEL)
    rows = sphere_spectral_check(SPECTRUM_LEVEL, SPECTRUM_MAX_DEGREE, ctx.grid(model))
    return Measurement(
        value=max(row.error for row in rows),
        target=0.0,
        tolerance=ctx.tolerances.normalization,
        inputs={"N": SPECTRUM_LEVEL, "k_max": SPECTRUM_MAX_DEGREE},
        tables=[
            TableData(
                name="eigenvalues",
                header=["k", "harmonic", "expected", "measured", "error"],
                rows=[[r.k, r.harmonic, r.expected, r.measured, r.error] for r in rows],
            )
        ],
    )


@register(
    "character-table",
    ("su2-sphere",),
    ("acceptance",),
    "Quadrature character, matrix trace and sin((N+1)t/2)/sin(t/2)",
)
def character_check(ctx: CheckContext) -> Measurement:
    rows = []
    worst = 0.0
    for N in CHARACTER_LEVELS:
        model = SphereModel(N=N)
        for row in character_table(model, ctx.operators(model), ctx.grid(model)):
            worst = max(worst, row.abs_err, abs(row.im))
            rows.append([N, row.norm, row.re, row.im, row.trace.real, row.oracle, row.abs_err])
    return Measurement(
        value=worst,
        target=0.0,
        tolerance=ctx.tolerances.route,
        inputs={"levels": list(CHARACTER_LEVELS), "norms": [0.3, 1.0, 2.0]},
        tables=[
            TableData(
                name="characters",
                header=["N", "norm", "re", "im", "trace", "oracle", "abs_err"],
                rows=rows,
            )
        ],
    )


@register(
    "restriction-symbol-ode",
    ("su2-sphere",),
    ("acceptance",),
    "Characteristic ODE against the closed restriction symbol on random (xi, eta)",
)
def restriction_ode_check(ctx: CheckContext) -> Measurement:
    rng = ctx.rng(salt=6)
    xi = random_sphere_points(ODE_SAMPLES, rng)
    directions = random_sphere_points(ODE_SAMPLES, rng)
    eta = directions * rng.uniform(0.2, 2.0, size=(ODE_SAMPLES, 1))
    hbar = 2.0 / ODE_LEVEL
    worst = 0.0
    for point, vector in zip(xi, eta, strict=True):
        closed = complex(restriction_symbol_closed(point, vector, ODE_LEVEL)[0])
        solved = restriction_symbol_ode(point, vector, hbar)
        worst = max(worst, abs(solved - closed) / abs(closed))
    return Measurement(
        value=worst,
        target=0.0,
        tolerance=ctx.tolerances.route,
        inputs={"N": ODE_LEVEL, "samples": ODE_SAMPLES, "seed": ctx.config.seed},
    )


@register(
    "hbar-expansion",
    ("su2-sphere",),
    (),
    "Order in hbar of the remainder of the second-order star expansion",
)
def hbar_expansion(ctx: CheckContext) -> Measurement:
    fit = hbar_expansion_check("xi3^2", "xi3^2")
    minimum = ctx.tolerances.expansion_slope
    return Measurement(
        value=math.inf if fit.exact else float(fit.order or 0.0),
        target=3.0,
        tolerance=3.0 - minimum,
        passed=fit.passed(minimum),
        inputs={"psi": "xi3^2", "chi": "xi3^2", "hbars": fit.hbars},
        detail="exact" if fit.exact else f"fit residual {fit.residual:.2e}",
    )


@register(
    "e1-invariance",
    ("su2-sphere",),
    (),
    "Normal part of e1 agrees for the Casimir coordinates K and 2K + K^2",
)
def e1_invariance(ctx: CheckContext) -> Measurement:
    xi = random_sphere_points(64, ctx.rng(salt=1))
    coefficients = e1_normal_coefficients(xi)
    return Measurement(
        value=_max_abs(coefficients["K"] - coefficients["2K+K^2"]),
        target=0.0,
        tolerance=ctx.tolerances.casimir,
        inputs={"points": 64},
    )


@register(
    "restriction-e1",
    ("su2-sphere",),
    (),
    "f|quantum - f|classical - hbar e1(f) is of order hbar^2",
)
def restriction_e1(ctx: CheckContext) -> Measurement:
    # x1 x2 x3 + x3^2
    f = AxisPolynomial(3, {(1, 1, 1): 1.0, (0, 0, 2): 1.0})
    fit = restriction_expansion(f, random_sphere_points(16, ctx.rng(salt=2)))
    return Measurement(
        value=fit.order,
        target=2.0,
        tolerance=0.2,
        passed=fit.order >= 1.8,
        inputs={"f": "x1 x2 x3 + x3^2", "hbars": fit.hbars},
        detail=f"fit residual {fit.residual:.2e}",
    )


@register(
    "group-unitarity",
    ("su2-sphere",),
    (),
    "e_*(eta) * e_*(-eta) = 1 with operators read off the symbols",
)
def group_unitarity(ctx: CheckContext) -> Measurement:
    eta = np.array([0.4, -0.3, 0.5])
    return Measurement(
        value=group_element_unitarity(eta, ctx.states()),
        target=0.0,
        tolerance=ctx.tolerances.normalization,
        inputs={**ctx.model.params(), "eta": eta.tolist()},
    )


# -- kernels and densities --------------------------------------------------------------------------


@register(
    "kernel-closed-form",
    RADIAL_MODELS,
    ("acceptance",),
    "Kernel series from the recurrence against its closed form",
)
def kernel_closed_form(ctx: CheckContext) -> Measurement:
    model = ctx.model
    if isinstance(model, ZeemanModel):
        return _zeeman_kernel(ctx)
    r = {
        "sphere": np.linspace(0.0, 10.0, 41),
        "disk": np.linspace(0.0, 0.9, 46),
        "plane": np.linspace(0.0, 16.0, 41),
    }[model.grid_kind]
    kernel = model.kernel(truncation=max(ctx.config.kernel.truncation, 1024))
    closed = model.kernel_closed_form()
    if closed is None:
        raise WickCalcError(ErrorCode.NO_SOLUTION, f"{model.name} has no closed-form kernel")
    error = _max_abs(np.expm1(kernel.log_series(r) - closed.log_real(r)))
    return Measurement(
        value=error,
        target=0.0,
        tolerance=ctx.tolerances.root,
        inputs={**model.params(), "closed_form": closed.tag, "r_max": float(r[-1])},
        tables=[_kernel_table(model)],
    )


def _kernel_table(model: Model, count: int = 32) -> TableData:
    rows = [[n, c] for n, c in model.kernel().table()[:count]]
    return TableData(name=f"kernel-{model.name}", header=["n", "c_n"], rows=rows)


def _zeeman_kernel(ctx: CheckContext) -> Measurement:
    assert isinstance(ctx.model, ZeemanModel)
    a2 = ctx.model.a2
    worst = 0.0
    details = []
    for N in DIMENSION_LEVELS["zeeman"]:
        model = ZeemanModel(N=N, a2=a2)
        kernel = model.kernel()
        expected = model.product_coefficients()
        if kernel.degree != N:
            raise WickCalcError(
                ErrorCode.DIVISION_BY_ZERO_RECURRENCE,
                f"zeeman kernel has degree {kernel.degree}, expected {N}",
            )
        worst = max(worst, _max_abs(kernel.coefficients / expected - 1.0))
        details.append(f"N={N}: degree {kernel.degree}")
    return Measurement(
        value=worst,
        target=0.0,
        tolerance=ctx.tolerances.root,
        inputs={"levels": list(DIMENSION_LEVELS["zeeman"]), "a2": a2},
        detail="; ".join(details),
        tables=[_kernel_table(ZeemanModel(N=N, a2=a2)) for N in DIMENSION_LEVELS["zeeman"]],
    )


@register(
    "density-moments",
    RADIAL_MODELS,
    (),
    "(1/hbar) int r^n l(r) dr = w_n for the first moments",
)
def density_moments(ctx: CheckContext) -> Measurement:
    model = ctx.model
    density = solve_density(model, ctx.tolerances.normalization)
    space = ctx.space()
    top = min(3, space.dim - 1)
    rows = []
    worst = 0.0
    for n in range(top + 1):
        moment = density.moment(n)
        weight = float(space.weights[n])
        rows.append([n, moment, weight])
        worst = max(worst, abs(moment / weight - 1.0))
    return Measurement(
        value=worst,
        target=0.0,
        tolerance=ctx.tolerances.normalization,
        inputs={**model.params(), "moments": top + 1},
        tables=[TableData(name="moments", header=["n", "moment", "weight"], rows=rows)],
    )


@register(
    "semiclassical-potential",
    ("su11-variant1",),
    (),
    "F0 from E(t) = r D(t) against -2a log(1 - r); hbar log k - F0 = -hbar log(1 - r)",
)
def semiclassical_check(ctx: CheckContext) -> Measurement:
    model = ctx.model
    assert isinstance(model, Su11DiskModel)
    r = np.linspace(0.1, 0.8, 8)
    potential = semiclassical_potential(model.spec, model.fact, r)
    classical = -2.0 * model.a * np.log1p(-r)
    quantum = model.hbar * np.asarray(model.kernel().log_value(r))
    worst = max(
        _max_abs(potential - classical),
        _max_abs(quantum - potential + model.hbar * np.log1p(-r)),
    )
    return Measurement(value=worst, target=0.0, tolerance=1e-9, inputs=model.params())


# -- representation and star-product properties ------------------------------------------------


@register(
    "relations",
    MODEL_NAMES,
    ("acceptance",),
    "Defining relations of the represented operators on interior indices",
)
def relations_check(ctx: CheckContext) -> Measurement:
    ops = ctx.operators()
    margin = ctx.config.kernel.margin
    report = verify_relations(ctx.model, ops, margin)
    return Measurement(
        value=report.max_residual,
        target=0.0,
        tolerance=ctx.tolerances.relation,
        inputs={**ctx.model.params(), "dim": report.dim, "margin": margin},
        tables=[
            TableData(
                name="relations",
                header=["relation", "residual"],
                rows=[[name, value] for name, value in report.residuals.items()],
            )
        ],
    )


@register(
    "associativity",
    MODEL_NAMES,
    ("properties",),
    "(f * g) * k = f * (g * k) for random normally ordered polynomials",
)
def associativity_check(ctx: CheckContext) -> Measurement:
    spec = ctx.model.spec
    rng = ctx.rng(salt=3)
    nvars = spec.flow.dimension
    worst = 0.0
    for _ in range(3):
        f, g, k = (random_normal_polynomial(nvars, rng) for _ in range(3))
        scale = max(1.0, star(star(f, g, spec), k, spec).max_coefficient())
        worst = max(worst, associativity_residual(f, g, k, spec) / scale)
    return Measurement(
        value=worst, target=0.0, tolerance=ctx.tolerances.relation, inputs=ctx.model.params()
    )


@register(
    "casimir-centrality",
    MODEL_NAMES,
    ("properties",),
    "K * f = f * K for the normally ordered Casimir",
)
def centrality_check(ctx: CheckContext) -> Measurement:
    spec = ctx.model.spec
    rng = ctx.rng(salt=4)
    worst = 0.0
    for _ in range(3):
        f = random_normal_polynomial(spec.flow.dimension, rng)
        worst = max(worst, casimir_centrality(spec, f) / max(1.0, f.max_coefficient()))
    return Measurement(
        value=worst, target=0.0, tolerance=ctx.tolerances.relation, inputs=ctx.model.params()
    )


@register(
    "frobenius",
    ("su2-sphere", "zeeman"),
    ("properties",),
    "tr(conj(chi) * psi) = tr(psi * conj(chi)) with traces by quadrature",
)
def frobenius_check(ctx: CheckContext) -> Measurement:
    rng = ctx.rng(salt=5)
    states = ctx.states()
    worst = 0.0
    for _ in range(3):
        psi = _random_operator(ctx, ctx.model, rng)
        chi = _random_operator(ctx, ctx.model, rng)
        scale = max(1.0, abs(psi.trace()), float(np.linalg.norm(psi.matrix @ chi.matrix)))
        worst = max(worst, frobenius_residual(psi, chi, states) / scale)
    return Measurement(value=worst, target=0.0, tolerance=1e-9, inputs=ctx.model.params())


@register(
    "resolution-identity",
    MODEL_NAMES,
    ("properties",),
    "(1/2 pi hbar) int Pi(y) dm(y) = I on the resolved basis block",
)
def resolution_check(ctx: CheckContext) -> Measurement:
    states = ctx.states()
    resolution = resolution_of_identity(states).matrix
    index = _resolved_indices(states.space)
    block = resolution[np.ix_(index, index)]
    return Measurement(
        value=_max_abs(block - np.eye(index.size)),
        target=0.0,
        tolerance=ctx.tolerances.normalization,
        inputs={**ctx.model.params(), "block": int(index.size)},
    )


@register(
    "p-normalization",
    MODEL_NAMES,
    ("properties",),
    "(1/2 pi hbar) int p(x, y) dm(y) = 1",
)
def p_normalization(ctx: CheckContext) -> Measurement:
    x = _normalization_points(ctx.model)
    values = probability_normalization(ctx.model, ctx.grid(), x)
    return Measurement(
        value=_max_abs(values - 1.0),
        target=0.0,
        tolerance=ctx.tolerances.normalization,
        inputs={**ctx.model.params(), "points": [[p.real, p.imag] for p in x]},
    )


@register(
    "adjointness",
    MODEL_NAMES,
    ("properties",),
    "Symbol of T* is conj(symbol of T); conj(psi * chi) = conj(chi) * conj(psi)",
)
def adjointness_check(ctx: CheckContext) -> Measurement:
    rng = ctx.rng(salt=7)
    states = ctx.states()
    points = _evaluation_points(ctx, ctx.model)
    psi = _random_operator(ctx, ctx.model, rng)
    chi = _random_operator(ctx, ctx.model, rng)
    symbol_gap = _max_abs(
        symbol_from_operator(psi.adjoint(), states, points).values
        - np.conj(symbol_from_operator(psi, states, points).values)
    )
    product = star_quadrature_route(psi, chi, states, points).values
    reversed_product = star_quadrature_route(chi.adjoint(), psi.adjoint(), states, points).values
    scale = max(1.0, _max_abs(product))
    product_gap = _max_abs(reversed_product - np.conj(product)) / scale
    return Measurement(
        value=max(symbol_gap / scale, product_gap),
        target=0.0,
        tolerance=ctx.tolerances.route,
        inputs={**ctx.model.params(), "nodes": int(points.size)},
    )


@register(
    "homomorphism",
    ("su11-variant2", "zeeman"),
    ("acceptance",),
    "(f star g)|quantum = f|quantum * g|quantum for random degree-2 pairs",
)
def homomorphism_check(ctx: CheckContext) -> Measurement:
    model = ctx.model
    ops = ctx.operators()
    states = ctx.states()
    points = _evaluation_points(ctx, model)
    rng = ctx.rng(salt=9)
    worst = 0.0
    for _ in range(HOMOMORPHISM_PAIRS):
        f = random_normal_polynomial(len(ops.A), rng)
        g = random_normal_polynomial(len(ops.A), rng)
        worst = max(worst, homomorphism_residual(f, g, model, ops, states, points))
    return Measurement(
        value=worst,
        target=0.0,
        tolerance=ctx.tolerances.route,
        inputs={**model.params(), "pairs": HOMOMORPHISM_PAIRS, "nodes": int(points.size)},
    )


# -- cylinder and prime series --------------------------------------------------------------------


@register(
    "jacobi-transform",
    ("cylinder",),
    ("acceptance", "tunneling"),
    "theta(r - h, e^-h) against its Jacobi transform",
)
def jacobi_check(ctx: CheckContext) -> Measurement:
    r = np.linspace(-3.0, 3.0, 61)
    worst = 0.0
    for hbar in JACOBI_HBARS:
        lhs, rhs = theta_jacobi_transform(r, hbar)
        worst = max(worst, _max_abs(rhs / lhs - 1.0))
    return Measurement(
        value=worst,
        target=0.0,
        tolerance=ctx.tolerances.root,
        inputs={"hbars": list(JACOBI_HBARS), "r": [-3.0, 3.0], "samples": 61},
    )


@register(
    "kernel-functional-equation",
    ("cylinder",),
    ("tunneling",),
    "k(r + 2 hbar) = e^r k(r)",
)
def functional_equation_check(ctx: CheckContext) -> Measurement:
    return Measurement(
        value=kernel_functional_equation(ctx.model.hbar),
        target=0.0,
        tolerance=ctx.tolerances.root,
        inputs=ctx.model.params(),
    )


@register(
    "dual-measure",
    ("cylinder",),
    ("tunneling",),
    "Gaussian measure times theta kernel equals the dual theta series",
)
def dual_measure_check(ctx: CheckContext) -> Measurement:
    return Measurement(
        value=dual_measure_residual(ctx.model.hbar),
        target=0.0,
        tolerance=ctx.tolerances.root,
        inputs=ctx.model.params(),
    )


@register(
    "periodicity",
    ("cylinder",),
    ("tunneling",),
    "Kernel and coherent vectors are 2 pi periodic in t",
)
def periodicity_check(ctx: CheckContext) -> Measurement:
    return Measurement(
        value=periodicity_residual(ctx.model.hbar),
        target=0.0,
        tolerance=ctx.tolerances.relation,
        inputs=ctx.model.params(),
    )


@register(
    "tunneling-slope",
    ("cylinder",),
    ("acceptance", "tunneling"),
    "Exponential rate of |omega - omega0| in 1/hbar is -pi^2",
)
def tunneling_slope(ctx: CheckContext) -> Measurement:
    settings = ctx.config.tunneling
    report = tunneling_gap(settings.hbars, min_hbar=settings.min_hbar)
    return Measurement(
        value=report.slope,
        target=report.target,
        tolerance=settings.slope_tolerance * abs(report.target),
        passed=report.passed(settings.slope_tolerance),
        inputs={"hbars": report.hbars},
        detail=(
            f"rel. error {report.relative_error:.2e}, measure slope {report.measure_slope:.6f}"
        ),
        tables=[
            TableData(
                name="plot",
                header=["inv_hbar", "ln_gap", "ln_measure_gap"],
                rows=[list(row) for row in report.plot_rows()],
            )
        ],
    )


@register(
    "star-remainder-slope",
    ("cylinder",),
    ("acceptance", "tunneling"),
    "Exponential rate of the star product minus the flat series is -pi^2",
)
def star_remainder_slope(ctx: CheckContext) -> Measurement:
    settings = ctx.config.tunneling
    fits = [
        star_remainder_fit(pair, settings.remainder_hbars, settings.min_hbar)
        for pair in ("axis-square", "winding")
    ]
    worst = max(fits, key=lambda fit: fit.relative_error)
    rows = [
        [fit.pair, h, 1.0 / h, math.log(value)]
        for fit in fits
        for h, value in zip(fit.hbars, fit.remainders, strict=True)
    ]
    return Measurement(
        value=worst.slope,
        target=worst.target,
        tolerance=settings.remainder_tolerance * abs(worst.target),
        passed=all(fit.passed(settings.remainder_tolerance) for fit in fits),
        inputs={"pairs": [fit.pair for fit in fits], "hbars": list(settings.remainder_hbars)},
        detail=", ".join(f"{fit.pair}: slope {fit.slope:.6f}" for fit in fits),
        tables=[TableData(name="plot", header=["pair", "hbar", "inv_hbar", "ln_remainder"], rows=rows)],
    )


@register(
    "star-remainder-routes",
    ("cylinder",),
    (),
    "Star remainder from the quadrature route matches the cumulant route",
)
def star_remainder_routes(ctx: CheckContext) -> Measurement:
    hbar = 1.0
    psi, chi = STAR_PAIRS["axis-square"]
    r, by_quadrature = star_remainder_quadrature(hbar, psi, chi)
    by_series = star_remainder_profile(hbar, psi, chi, r)
    return Measurement(
        value=_max_abs(by_quadrature - by_series),
        target=0.0,
        tolerance=1e-6,
        inputs={"hbar": hbar, "pair": "axis-square"},
        detail=f"remainder scale {_max_abs(by_series):.3e}",
    )


@register(
    "heat-kernel-winding",
    ("cylinder",),
    ("acceptance", "tunneling"),
    "Coincident heat kernel over the plane kernel minus 1 is 2 exp(-2 pi^2/hbar)",
)
def heat_kernel_winding(ctx: CheckContext) -> Measurement:
    x = 0.3 + 0.2j
    comparison = heat_kernel_comparison(1.0, x, x)
    image_gap = abs(comparison.theta_form / comparison.image_sum - 1.0)
    tolerance = 0.1 * comparison.winding_scale
    return Measurement(
        value=comparison.ratio_minus_one,
        target=comparison.winding_scale,
        tolerance=tolerance,
        passed=abs(comparison.relative_to_scale) <= 0.1 and image_gap <= ctx.tolerances.root,
        inputs={"hbar": 1.0, "x": [x.real, x.imag]},
        detail=f"theta form vs image sum {image_gap:.2e}",
    )


@register(
    "flat-heat-operator",
    ("cylinder",),
    ("tunneling",),
    "P e^(ikt) = exp(-hbar k^2/2) e^(ikt) at small hbar",
)
def flat_heat_check(ctx: CheckContext) -> Measurement:
    return Measurement(
        value=flat_heat_residual(0.3),
        target=0.0,
        tolerance=ctx.tolerances.normalization,
        inputs={"hbar": 0.3, "windings": [1, 2]},
    )


@register(
    "prime-series",
    ("su11-prime",),
    ("acceptance",),
    "Prime series relations, Casimir -lambda^2 and spectrum",
)
def prime_series(ctx: CheckContext) -> Measurement:
    model = ctx.model
    assert isinstance(model, PrimeSeriesModel)
    report = prime_series_check(model.lam, model.hbar, ctx.config.kernel.strip_modes // 2)
    return Measurement(
        value=report.max_residual,
        target=0.0,
        tolerance=ctx.tolerances.relation,
        inputs={**model.params(), "dim": report.dim},
        tables=[
            TableData(
                name="relations",
                header=["relation", "residual"],
                rows=[[name, value] for name, value in report.residuals.items()],
            )
        ],
    )
