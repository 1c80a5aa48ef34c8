"""Tests for the chart quadrature grids."""

import math

import numpy as np
import pytest

from wickcalc.config import GridConfig
from wickcalc.models import CylinderModel, SphereModel, Su11DiskModel, Su11PlaneModel, ZeemanModel
from wickcalc.quadrature import (
    disk_grid,
    grid_for,
    half_line_grid,
    plane_grid,
    plane_window,
    sphere_grid,
    strip_grid,
    strip_half_width,
)


def test_sphere_grid_integrates_area():
    """int (1 + r)^-2 dr dphi = 2 pi."""
    grid = sphere_grid(32, 16)
    assert grid.shape == (32, 16)
    assert grid.size == 32 * 16
    value = grid.integrate(1.0 / (1.0 + grid.radial) ** 2)
    assert value.real == pytest.approx(2.0 * math.pi, rel=1e-13)


def test_disk_grid_integrates_area():
    """int_0^1 dr dphi = 2 pi."""
    grid = disk_grid(16, 8)
    assert grid.integrate(np.ones(grid.size)).real == pytest.approx(2.0 * math.pi, rel=1e-13)
    assert np.all(np.abs(grid.nodes) < 1.0)


def test_plane_grid_integrates_exponential():
    """int e^-r dr dphi = 2 pi."""
    grid = plane_grid(128, 8, 14.0)
    assert grid.integrate(np.exp(-grid.radial)).real == pytest.approx(2.0 * math.pi, rel=1e-12)


def test_strip_grid_integrates_gaussian():
    """The Gaussian density integrates to 2 pi hbar over the strip window."""
    hbar = 1.0
    grid = strip_grid(hbar, modes=8)
    density = CylinderModel(hbar=hbar).density().value(grid.radial)
    assert grid.integrate(density).real == pytest.approx(2.0 * math.pi * hbar, rel=1e-12)
    radial = grid.radial_nodes()
    assert radial.min() > hbar - strip_half_width(hbar, 8)
    assert radial.max() < hbar + strip_half_width(hbar, 8)


def test_strip_nodes_are_chart_points():
    """Strip nodes are z = r/2 + i t."""
    grid = strip_grid(0.5, modes=4, n_axis=16, n_period=8)
    np.testing.assert_allclose(grid.nodes.real, grid.radial / 2.0)
    np.testing.assert_allclose(grid.nodes.imag, grid.angle)


def test_grid_for_models():
    """Each model gets the grid of its chart."""
    config = GridConfig(sphere_polar=16, sphere_azimuth=8, disk_radial=16, plane_radial=16)
    assert grid_for(SphereModel(N=2), config).kind == "sphere"
    assert grid_for(Su11DiskModel(), config).kind == "disk"
    assert grid_for(Su11PlaneModel(), config).kind == "plane"
    assert grid_for(ZeemanModel(), config).kind == "half-line"
    strip = grid_for(CylinderModel(), config, strip_modes=4)
    assert strip.kind == "strip"
    assert strip.chart == "strip"


def test_half_line_grid_integrates_rational():
    """int (1 + r)^-2 dr dphi = 2 pi."""
    grid = half_line_grid(128, 8)
    assert grid.shape == (128, 8)
    value = grid.integrate(1.0 / (1.0 + grid.radial) ** 2)
    assert value.real == pytest.approx(2.0 * math.pi, rel=1e-12)


def test_half_line_grid_fractional_powers():
    """int r^(1/2) (1 + r)^-3 dr = B(3/2, 3/2) = pi/8 despite the endpoint powers."""
    grid = half_line_grid(128, 8)
    value = grid.integrate(np.sqrt(grid.radial) / (1.0 + grid.radial) ** 3)
    assert value.real == pytest.approx(2.0 * math.pi * math.pi / 8.0, rel=1e-11)


def test_half_line_grid_spans_log_radius():
    grid = half_line_grid(64, 4, log_radius=20.0)
    radial = grid.radial_nodes()
    assert np.log(radial[0]) == pytest.approx(-20.0)
    assert np.log(radial[-1]) == pytest.approx(20.0)
    assert np.all(np.diff(radial) > 0)


def test_plane_window_grows_with_hbar():
    """The plane cut covers the Gaussian tail in sqrt|y| of p(x, y)."""
    assert plane_window(0.5) == pytest.approx((8.0**0.25 + math.sqrt(12.0)) ** 2)
    assert plane_window(1.0) > plane_window(0.5) > 14.0
    grid = grid_for(Su11PlaneModel(hbar=1.0), GridConfig(plane_radial=16, plane_azimuth=8))
    assert np.sqrt(grid.radial_nodes().max()) < plane_window(1.0)
    assert np.sqrt(grid.radial_nodes().max()) > 0.95 * plane_window(1.0)
