"""Truncated weighted-monomial spaces and the matrix operators A, B, C acting on them."""

from collections.abc import Callable
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np
from loguru import logger
from pydantic import BaseModel

from .errors import ErrorCode, WickCalcError
from .models import Model, SphereModel, ZeemanModel
from .utils import write_csv_table


@dataclass(frozen=True)
class RepSpace:
    """Basis ``b_n`` (``zbar^n`` or ``e^(n zbar)``) with ``<b_m, b_n> = delta_mn w_n``."""

    chart: str
    indices: np.ndarray
    log_weights: np.ndarray
    hbar: float
    model: str
    compact: bool = False

    @property
    def dim(self) -> int:
        return int(self.indices.size)

    @property
    def weights(self) -> np.ndarray:
        return np.exp(self.log_weights)

    def interior(self, margin: int) -> np.ndarray:
        """Positions at distance ``>= margin`` from a truncation edge; all positions if compact."""
        positions = np.arange(self.dim)
        if self.compact:
            return positions
        if self.chart == "strip":
            return positions[margin : self.dim - margin]
        return positions[: self.dim - margin]


@dataclass(frozen=True, eq=False)
class WickOperator:
    """Dense operator stored in the orthonormal basis ``f_n = b_n / sqrt(w_n)``."""

    matrix: np.ndarray
    space: RepSpace

    @classmethod
    def identity(cls, space: RepSpace) -> "WickOperator":
        return cls(np.eye(space.dim, dtype=complex), space)

    @classmethod
    def diagonal(cls, space: RepSpace, values: np.ndarray) -> "WickOperator":
        return cls(np.diag(np.asarray(values, dtype=complex)), space)

    @classmethod
    def from_weighted(cls, space: RepSpace, matrix: np.ndarray) -> "WickOperator":
        """Inverse of :meth:`weighted`."""
        lw = space.log_weights
        return cls(np.asarray(matrix, dtype=complex) * np.exp(0.5 * (lw[:, None] - lw[None, :])), space)

    def weighted(self) -> np.ndarray:
        """Matrix on the monomials: ``T b_n = sum_m W_mn b_m``."""
        lw = self.space.log_weights
        return self.matrix * np.exp(0.5 * (lw[None, :] - lw[:, None]))

    def adjoint(self) -> "WickOperator":
        return WickOperator(self.matrix.conj().T, self.space)

    def trace(self) -> complex:
        return complex(np.trace(self.matrix))

    def _coerce(self, other: Any) -> np.ndarray:
        if isinstance(other, WickOperator):
            return other.matrix
        return complex(other) * np.eye(self.space.dim)

    def __add__(self, other: Any) -> "WickOperator":
        return WickOperator(self.matrix + self._coerce(other), self.space)

    __radd__ = __add__

    def __sub__(self, other: Any) -> "WickOperator":
        return WickOperator(self.matrix - self._coerce(other), self.space)

    def __rsub__(self, other: Any) -> "WickOperator":
        return WickOperator(self._coerce(other) - self.matrix, self.space)

    def __neg__(self) -> "WickOperator":
        return WickOperator(-self.matrix, self.space)

    def __mul__(self, scalar: complex) -> "WickOperator":
        return WickOperator(self.matrix * complex(scalar), self.space)

    __rmul__ = __mul__

    def __truediv__(self, scalar: complex) -> "WickOperator":
        return WickOperator(self.matrix / complex(scalar), self.space)

    def __matmul__(self, other: "WickOperator") -> "WickOperator":
        return WickOperator(self.matrix @ other.matrix, self.space)

    def commutator(self, other: "WickOperator") -> "WickOperator":
        return self @ other - other @ self

    def anticommutator(self, other: "WickOperator") -> "WickOperator":
        return self @ other + other @ self

    def interior_max(self, margin: int) -> float:
        """Max entry over rows and columns in the interior block."""
        idx = self.space.interior(margin)
        block = self.matrix[np.ix_(idx, idx)]
        return float(np.max(np.abs(block), initial=0.0))

    def to_rows(self, tol: float = 0.0) -> list[tuple[int, int, float, float]]:
        rows = []
        for (row, col), value in np.ndenumerate(self.matrix):
            if abs(value) > tol:
                rows.append((row, col, float(value.real), float(value.imag)))
        return rows


@dataclass(frozen=True)
class OperatorSet:
    """Axis operators ``A_j``, raising ``B``, lowering ``C`` and model-specific extras."""

    space: RepSpace
    A: tuple[WickOperator, ...]
    B: WickOperator
    C: WickOperator
    extras: dict[str, WickOperator] = field(default_factory=dict)

    def axis_values(self) -> np.ndarray:
        """Diagonals of the ``A_j``, shape ``(k, dim)``."""
        return np.array([np.real(np.diag(a.matrix)) for a in self.A])

    def named(self) -> dict[str, WickOperator]:
        names = {"B": self.B, "C": self.C}
        if len(self.A) == 1:
            names["A"] = self.A[0]
        else:
            names.update({f"A{j + 1}": a for j, a in enumerate(self.A)})
        names.update(self.extras)
        return names


class ResidualReport(BaseModel):
    """Interior residuals of the defining relations."""

    model: str
    dim: int
    margin: int
    residuals: dict[str, float]

    @property
    def max_residual(self) -> float:
        return max(self.residuals.values(), default=0.0)

    def passed(self, tol: float) -> bool:
        return self.max_residual <= tol


def build_space(
    model: Model,
    dim: int = 64,
    strip_modes: int = 24,
    truncation: int = 256,
    ratio_window: int = 16,
) -> RepSpace:
    """Space of the model: ``N + 1`` monomials when compact, else the first ``dim`` (or ``2M+1``)."""
    h = model.hbar
    if model.chart == "strip":
        n = np.arange(-strip_modes, strip_modes + 1)
        return RepSpace(
            chart="strip",
            indices=n,
            log_weights=h * (n.astype(float) ** 2 + n),
            hbar=h,
            model=model.name,
        )
    kernel = model.kernel(truncation, ratio_window)
    if kernel.degree is not None:
        size = kernel.degree + 1
    else:
        size = min(dim, kernel.size)
    logger.debug(f"Space for {model.name}: dim={size}, compact={kernel.degree is not None}")
    return RepSpace(
        chart="radial",
        indices=np.arange(size),
        log_weights=-kernel.log_coefficients[:size].copy(),
        hbar=h,
        model=model.name,
        compact=kernel.degree is not None,
    )


def quantum_axis(model: Model, space: RepSpace) -> np.ndarray:
    """Axis values ``A_n`` on which ``A`` acts diagonally, shape ``(k, dim)``."""
    h = model.hbar
    if space.chart == "strip":
        return (model.fact.vacuum[0] + (space.indices + 1.0) * h)[None, :]
    vacuum = model.fact.vacuum
    return np.array(
        [model.spec.flow.trajectory((n + 1) * h, vacuum) for n in space.indices], dtype=float
    ).T


def build_operators(
    model: Model, space: RepSpace, margin: int = 2, tol: float = 1e-10
) -> OperatorSet:
    """Matrices of ``A``, ``B``, ``C`` (plus ``x^j`` on the sphere, ``S_j`` for Zeeman)."""
    axis = quantum_axis(model, space)
    dim = space.dim
    lw = space.log_weights
    B = np.zeros((dim, dim), dtype=complex)
    C = np.zeros((dim, dim), dtype=complex)
    fact = model.fact
    for pos in range(dim - 1):
        if space.chart == "strip":
            multiplier = complex(fact.D(*axis[:, pos]))
            B[pos + 1, pos] = multiplier
            C[pos, pos + 1] = multiplier.conjugate()
        else:
            t = (space.indices[pos] + 1) * space.hbar
            shift = 0.5 * (lw[pos + 1] - lw[pos])
            B[pos + 1, pos] = fact.script_D(model.spec, t) * np.exp(shift)
            C[pos, pos + 1] = fact.script_E(model.spec, t) * np.exp(-shift)

    ops = OperatorSet(
        space=space,
        A=tuple(WickOperator.diagonal(space, values) for values in axis),
        B=WickOperator(B, space),
        C=WickOperator(C, space),
    )
    extras = _model_extras(model, ops)
    ops = OperatorSet(space=space, A=ops.A, B=ops.B, C=ops.C, extras=extras)

    report = verify_relations(model, ops, margin)
    if not report.passed(tol):
        worst = max(report.residuals, key=report.residuals.__getitem__)
        raise WickCalcError(
            ErrorCode.TRUNCATION_UNSOUND,
            f"relation '{worst}' has interior residual {report.residuals[worst]:.3e}",
            residuals=report.residuals,
        )
    return ops


def _model_extras(model: Model, ops: OperatorSet) -> dict[str, WickOperator]:
    h = model.hbar
    B, C = ops.B, ops.C
    if isinstance(model, SphereModel):
        return {
            "x1": (B + C) / 2,
            "x2": (C - B) / 2j,
            "x3": ops.A[0] - h / 2,
        }
    if isinstance(model, ZeemanModel):
        A1, A2 = ops.A
        return {
            "S0": h - A1,
            "S1": (C + B) / 2,
            "S2": (C - B) / 2j,
            "S3": A2 + (h / 2) * A1 - h**2 / 2,
        }
    return {}


def _sphere_relations(ops: OperatorSet, h: float) -> dict[str, Callable[[], WickOperator]]:
    x1, x2, x3 = (ops.extras[k] for k in ("x1", "x2", "x3"))
    return {
        "[x1,x2]=-i hbar x3": lambda: (1j / h) * x1.commutator(x2) - x3,
        "[x2,x3]=-i hbar x1": lambda: (1j / h) * x2.commutator(x3) - x1,
        "[x3,x1]=-i hbar x2": lambda: (1j / h) * x3.commutator(x1) - x2,
        "x1 self-adjoint": lambda: x1 - x1.adjoint(),
        "x2 self-adjoint": lambda: x2 - x2.adjoint(),
        "x3 self-adjoint": lambda: x3 - x3.adjoint(),
    }


def _zeeman_relations(ops: OperatorSet, h: float) -> dict[str, Callable[[], WickOperator]]:
    S0, S1, S2, S3 = (ops.extras[f"S{j}"] for j in range(4))
    return {
        "[S1,S2]": lambda: S1.commutator(S2) - (0.5j * h) * S0.anticommutator(S3),
        "[S0,S1]": lambda: S0.commutator(S1) - (2j * h) * S2,
        "[S2,S3]": lambda: S2.commutator(S3) + (0.5j * h) * S0.anticommutator(S1),
        "[S0,S2]": lambda: S0.commutator(S2) + (2j * h) * S1,
        "[S3,S1]": lambda: S3.commutator(S1) + (0.5j * h) * S0.anticommutator(S2),
        "[S0,S3]": lambda: S0.commutator(S3),
    }


def verify_relations(model: Model, ops: OperatorSet, margin: int = 2) -> ResidualReport:
    """Interior residuals of ``[C,B] = lambda(A)``, ``C A = gamma^hbar(A) C``, ``C = B*`` and extras."""
    space = ops.space
    h = space.hbar
    axis = ops.axis_values()
    spec = model.spec
    lam = WickOperator.diagonal(space, np.atleast_1d(spec.lambda_h(axis)))
    shifted = spec.flow.apply(h, axis)

    relations: dict[str, Callable[[], WickOperator]] = {
        "[C,B]=lambda(A)": lambda: ops.C.commutator(ops.B) - lam,
        "C=B*": lambda: ops.C - ops.B.adjoint(),
    }
    for j, a_op in enumerate(ops.A):
        shifted_op = WickOperator.diagonal(space, shifted[j])
        relations[f"C A{j + 1}=gamma(A){j + 1} C"] = (
            lambda a_op=a_op, shifted_op=shifted_op: ops.C @ a_op - shifted_op @ ops.C
        )
    if isinstance(model, SphereModel):
        relations.update(_sphere_relations(ops, h))
    elif isinstance(model, ZeemanModel):
        relations.update(_zeeman_relations(ops, h))

    residuals = {name: build().interior_max(margin) for name, build in relations.items()}
    return ResidualReport(model=model.name, dim=space.dim, margin=margin, residuals=residuals)


def casimir_matrix(
    model: Model, ops: OperatorSet, margin: int = 2, tol: float = 1e-10
) -> WickOperator:
    """``rho(A) - C B`` (``sum (x^j)^2`` on the sphere); must be scalar on the interior."""
    space = ops.space
    if isinstance(model, SphereModel):
        x = [ops.extras[k] for k in ("x1", "x2", "x3")]
        casimir = x[0] @ x[0] + x[1] @ x[1] + x[2] @ x[2]
    else:
        rho = WickOperator.diagonal(space, np.atleast_1d(model.spec.rho(*ops.axis_values())))
        casimir = rho - ops.C @ ops.B
    idx = space.interior(margin)
    block = casimir.matrix[np.ix_(idx, idx)]
    diagonal = np.diag(block)
    off_diagonal = float(np.max(np.abs(block - np.diag(diagonal)), initial=0.0))
    spread = float(np.max(np.abs(diagonal - diagonal.mean()), initial=0.0))
    if max(off_diagonal, spread) > tol * max(1.0, abs(diagonal.mean())):
        raise WickCalcError(
            ErrorCode.NOT_SCALAR,
            f"Casimir of {model.name} is not scalar: off-diagonal {off_diagonal:.3e}, spread {spread:.3e}",
        )
    return casimir


def export_operators(ops: OperatorSet, directory: Path, tol: float = 0.0) -> list[Path]:
    """Write each operator as ``<name>.csv`` with columns row, col, re, im (monomial basis)."""
    written = []
    for name, op in ops.named().items():
        path = Path(directory) / f"operator-{name}.csv"
        weighted = WickOperator(op.weighted(), op.space)
        write_csv_table(path, ("row", "col", "re", "im"), weighted.to_rows(tol))
        written.append(path)
    return written
