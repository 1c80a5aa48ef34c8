"""Tests for the operator representations."""

import numpy as np
import pytest

from wickcalc.models import CylinderModel, SphereModel, Su11DiskModel, ZeemanModel
from wickcalc.representation import (
    WickOperator,
    build_operators,
    build_space,
    casimir_matrix,
    export_operators,
    quantum_axis,
    verify_relations,
)


@pytest.mark.parametrize(
    "model",
    [
        SphereModel(N=4),
        Su11DiskModel(a=1.0, hbar=0.5),
        ZeemanModel(hbar=0.5, N=3),
        CylinderModel(hbar=1.0),
    ],
    ids=lambda m: m.name,
)
def test_relations_hold_on_interior(model):
    """Every defining relation has an interior residual below 1e-10."""
    space = build_space(model, dim=32)
    ops = build_operators(model, space)
    report = verify_relations(model, ops)
    assert report.passed(1e-10)
    assert report.dim == space.dim


def test_sphere_space_and_spin_half():
    """N = 1 gives a two-dimensional space with x3 = diag(-1, 1)."""
    model = SphereModel(N=1)
    space = build_space(model)
    assert space.dim == 2
    assert space.compact
    ops = build_operators(model, space)
    np.testing.assert_allclose(np.diag(ops.extras["x3"].matrix).real, [-1.0, 1.0], atol=1e-12)


def test_sphere_casimir_is_one_plus_hbar():
    """sum (x^j)^2 = (1 + hbar) on every sphere level."""
    for N in (1, 2, 5):
        model = SphereModel(N=N)
        space = build_space(model)
        ops = build_operators(model, space)
        casimir = casimir_matrix(model, ops, margin=0)
        np.testing.assert_allclose(np.diag(casimir.matrix).real, 1.0 + model.hbar, atol=1e-12)


@pytest.mark.parametrize(
    "model", [Su11DiskModel(a=1.0, hbar=0.5), ZeemanModel(hbar=0.5, N=3)], ids=lambda m: m.name
)
def test_casimir_matches_vacuum_value(model):
    """rho(A) - C B equals g at the vacuum on the interior."""
    space = build_space(model, dim=24)
    ops = build_operators(model, space)
    casimir = casimir_matrix(model, ops)
    idx = space.interior(2)
    diagonal = np.diag(casimir.matrix)[idx]
    np.testing.assert_allclose(diagonal.real, model.casimir_value, rtol=1e-10, atol=1e-10)


def test_strip_axis_is_shifted_lattice():
    """On the strip A acts by a0 + (n + 1) hbar."""
    model = CylinderModel(hbar=0.75)
    space = build_space(model, strip_modes=5)
    axis = quantum_axis(model, space)
    assert axis.shape == (1, 11)
    np.testing.assert_allclose(np.diff(axis[0]), 0.75)


def test_operator_adjoint_uses_weights():
    """C is the adjoint of B in the weighted inner product."""
    model = Su11DiskModel(a=1.0, hbar=0.5)
    space = build_space(model, dim=16)
    ops = build_operators(model, space)
    assert (ops.C - ops.B.adjoint()).interior_max(2) < 1e-12
    identity = WickOperator.identity(space)
    assert abs(identity.trace() - space.dim) < 1e-12


def test_export_operators(tmp_path):
    """One CSV per operator with the row, col, re, im header."""
    model = SphereModel(N=2)
    ops = build_operators(model, build_space(model))
    paths = export_operators(ops, tmp_path / "operators")
    names = sorted(p.name for p in paths)
    assert names == sorted(
        f"operator-{n}.csv" for n in ("A", "B", "C", "x1", "x2", "x3")
    )
    header = (tmp_path / "operators" / "operator-B.csv").read_text().splitlines()[0]
    assert header == "row,col,re,im"
