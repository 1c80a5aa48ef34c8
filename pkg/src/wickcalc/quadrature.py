"""Product quadrature grids on the model charts."""

import math
from dataclasses import dataclass

import numpy as np
from loguru import logger
from numpy.polynomial.legendre import leggauss

from .config import GridConfig
from .models import Model


@dataclass(frozen=True)
class ChartGrid:
    """Nodes ``z`` with weights for ``dzbar dz`` (``dr dphi`` radially, ``dr dt`` on the strip).

    Nodes are stored row-major over ``(axis, angle)``; the angle is uniform on ``[0, 2 pi)``.
    """

    chart: str
    kind: str
    nodes: np.ndarray
    radial: np.ndarray
    angle: np.ndarray
    area: np.ndarray
    shape: tuple[int, int]

    @property
    def size(self) -> int:
        return int(self.nodes.size)

    def radial_nodes(self) -> np.ndarray:
        """Distinct values of the axis coordinate ``r``."""
        return self.radial.reshape(self.shape)[:, 0]

    def integrate(self, values: np.ndarray, density: np.ndarray | None = None) -> complex:
        weights = self.area if density is None else self.area * density
        return complex(np.sum(weights * values))


def _angles(count: int) -> np.ndarray:
    return 2.0 * math.pi * np.arange(count) / count


def _assemble(
    chart: str, kind: str, r: np.ndarray, dr: np.ndarray, angles: np.ndarray
) -> ChartGrid:
    rr, aa = np.meshgrid(r, angles, indexing="ij")
    weights = np.outer(dr, np.full(angles.size, 2.0 * math.pi / angles.size))
    if chart == "strip":
        nodes = rr / 2.0 + 1j * aa
    else:
        nodes = np.sqrt(rr) * np.exp(1j * aa)
    grid = ChartGrid(
        chart=chart,
        kind=kind,
        nodes=nodes.ravel(),
        radial=rr.ravel(),
        angle=aa.ravel(),
        area=weights.ravel(),
        shape=(r.size, angles.size),
    )
    logger.debug(f"Built {kind} grid {grid.shape[0]}x{grid.shape[1]}")
    return grid


def sphere_grid(n_axis: int = 96, n_angle: int = 96) -> ChartGrid:
    """Gauss-Legendre in ``s = (r-1)/(r+1)`` (the height on the sphere)."""
    s, w = leggauss(n_axis)
    r = (1.0 + s) / (1.0 - s)
    dr = w * 2.0 / (1.0 - s) ** 2
    return _assemble("radial", "sphere", r, dr, _angles(n_angle))


def disk_grid(n_axis: int = 128, n_angle: int = 96) -> ChartGrid:
    """Gauss-Legendre in ``r`` on ``(0, 1)``; nodes cluster at the boundary."""
    s, w = leggauss(n_axis)
    return _assemble("radial", "disk", 0.5 * (s + 1.0), 0.5 * w, _angles(n_angle))


def plane_grid(n_axis: int = 128, n_angle: int = 96, sqrt_radius: float = 26.5) -> ChartGrid:
    """Gauss-Legendre in ``u = sqrt(r)`` on ``(0, sqrt_radius)``."""
    s, w = leggauss(n_axis)
    u = 0.5 * sqrt_radius * (s + 1.0)
    du = 0.5 * sqrt_radius * w
    return _assemble("radial", "plane", u**2, 2.0 * u * du, _angles(n_angle))


def plane_window(hbar: float, point_radius: float = 8.0, decay: float = 48.0) -> float:
    """Cut ``u = U`` where ``p(x, y) <= exp(-decay)`` for ``|x|^2 <= point_radius``.

    On the Bessel plane ``p(x, y)`` decays like ``exp(-(2/hbar) (sqrt|y| - sqrt|x|)^2)``.
    """
    root = point_radius**0.25 + math.sqrt(0.5 * decay * hbar)
    return root * root


def half_line_grid(n_axis: int = 128, n_angle: int = 96, log_radius: float = 32.0) -> ChartGrid:
    """Double-exponential rule on ``(0, inf)``: ``r = exp(pi sinh t)``, ``|log r| <= log_radius``.

    Fractional powers of ``r`` at ``0`` and at infinity are integrated to full precision.
    """
    t_max = math.asinh(log_radius / math.pi)
    t = np.linspace(-t_max, t_max, n_axis)
    step = t[1] - t[0]
    r = np.exp(math.pi * np.sinh(t))
    dr = step * math.pi * np.cosh(t) * r
    return _assemble("radial", "half-line", r, dr, _angles(n_angle))


def strip_half_width(hbar: float, modes: int, window: float = 16.0) -> float:
    """Half-width of the axis window around ``r = hbar`` covering modes ``|n| <= modes``."""
    return 2.0 * hbar * (modes + 1) + window * math.sqrt(hbar)


def strip_grid(
    hbar: float,
    modes: int = 24,
    n_axis: int = 192,
    n_period: int = 96,
    window: float = 16.0,
) -> ChartGrid:
    """Gauss-Legendre in ``r = z + zbar`` on ``hbar +- half_width`` times uniform ``t = Im z``."""
    half = strip_half_width(hbar, modes, window)
    s, w = leggauss(n_axis)
    return _assemble("strip", "strip", hbar + half * s, half * w, _angles(n_period))


def grid_for(model: Model, config: GridConfig | None = None, strip_modes: int = 24) -> ChartGrid:
    """Default grid of the model's chart."""
    config = config or GridConfig()
    if model.grid_kind == "sphere":
        return sphere_grid(config.sphere_polar, config.sphere_azimuth)
    if model.grid_kind == "disk":
        return disk_grid(config.disk_radial, config.disk_azimuth)
    if model.grid_kind == "plane":
        sqrt_radius = config.plane_sqrt_radius or plane_window(model.hbar)
        return plane_grid(config.plane_radial, config.plane_azimuth, sqrt_radius)
    if model.grid_kind == "half-line":
        return half_line_grid(
            config.half_line_axis, config.half_line_azimuth, config.half_line_log_radius
        )
    return strip_grid(
        model.hbar, strip_modes, config.strip_axis, config.strip_period, config.strip_window
    )
