"""Hyperbolic collar charts: the cylinder model of a thin collar, its
constant-curvature metric, the core geodesic and annulus normalizations."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .numerics import derivative

COLLAR_MAX_LENGTH = 2.0 * np.arcsinh(1.0)


@dataclass(frozen=True)
class CollarChart:
    """Cylinder ``P_l = {(t, theta)}`` around a closed geodesic of length ``l``.

    ``t`` ranges over ``(2 pi / l) arctan(sinh(l/2))`` to
    ``(2 pi / l)(pi - arctan(sinh(l/2)))``; ``theta`` is ``2 pi``-periodic.
    """

    l: float

    def __post_init__(self):
        if not 0 < self.l < COLLAR_MAX_LENGTH:
            raise ValueError(f"collar length must lie in (0, {COLLAR_MAX_LENGTH:.6f})")

    @property
    def t_range(self) -> tuple:
        a = np.arctan(np.sinh(0.5 * self.l))
        c = 2 * np.pi / self.l
        return (float(c * a), float(c * (np.pi - a)))

    @property
    def geodesic_t(self) -> float:
        """Location ``t = pi^2 / l`` of the core geodesic."""
        return float(np.pi**2 / self.l)

    def to_dict(self) -> dict:
        return {"l": self.l, "t_range": list(self.t_range), "geodesic_t": self.geodesic_t}


def metric_factor(chart: CollarChart, t, tol: float = 1e-12):
    """``l / (2 pi sin(l t / 2 pi))``: ``ds^2 = factor^2 (dt^2 + dtheta^2)``.

    Raises
    ------
    ValueError
        If some ``t`` is outside the chart's range.
    """
    t = np.asarray(t, float)
    t0, t1 = chart.t_range
    slack = tol * max(1.0, t1)
    if np.any(t < t0 - slack) or np.any(t > t1 + slack):
        raise ValueError("t outside the collar range")
    out = chart.l / (2 * np.pi * np.sin(chart.l * t / (2 * np.pi)))
    return float(out) if out.ndim == 0 else out


def geodesic_length(chart: CollarChart, n: int = 64) -> float:
    """Length of the circle ``t = pi^2 / l`` by periodic trapezoid quadrature."""
    theta = np.linspace(0.0, 2 * np.pi, n, endpoint=False)
    f = metric_factor(chart, np.full_like(theta, chart.geodesic_t))
    return float(np.sum(f) * 2 * np.pi / n)


def circle_lengths(chart: CollarChart, n: int = 1001):
    """Lengths ``2 pi factor(t)`` of the circles ``t = const`` on a uniform grid."""
    t = np.linspace(*chart.t_range, n)
    return t, 2 * np.pi * metric_factor(chart, t)


def gaussian_curvature(chart: CollarChart, n: int = 257):
    """``K = -e^{-2 lambda} lambda''`` of the collar metric, finite differences.

    Returns the ``t`` grid and ``K`` there; the exact value is ``-1``.
    """
    t = np.linspace(*chart.t_range, n)
    lam = np.log(metric_factor(chart, t))
    d2 = derivative(lam, t[1] - t[0], 0, order=2, periodic=False)
    return t, -np.exp(-2 * lam) * d2


def cylinder_to_annulus(chart: CollarChart) -> dict:
    """Normalization of the collar as ``D \\ B(0, e^{-1/l})``.

    The annulus has inner radius ``e^{-1/l}``, the core geodesic sits on
    ``rho = e^{-1/(2l)}`` and the modulus ``(1/2pi) log(outer/inner)`` is
    ``1 / (2 pi l)``. The cylinder is mapped by ``rho = exp(-scale (t - t0))``
    with ``scale = (1/l) / (t1 - t0)`` so that the moduli match; the two
    moduli differ, so this is a constant radial stretch of the conformal map
    ``rho = exp(-(t - t0))`` (reported as ``conformal_inner_radius``).
    """
    t0, t1 = chart.t_range
    scale = (1.0 / chart.l) / (t1 - t0)
    inner = float(np.exp(-1.0 / chart.l))
    return {
        "inner_radius": inner,
        "outer_radius": 1.0,
        "geodesic_radius": float(np.exp(-0.5 / chart.l)),
        "geodesic_radius_mapped": float(np.exp(-scale * (chart.geodesic_t - t0))),
        "modulus": float(np.log(1.0 / inner) / (2 * np.pi)),
        "scale": float(scale),
        "conformal_inner_radius": float(np.exp(-(t1 - t0))),
    }


def annulus_radius(chart: CollarChart, t):
    """Image radius of ``t`` under the modulus-matching map."""
    t0, t1 = chart.t_range
    scale = (1.0 / chart.l) / (t1 - t0)
    return np.exp(-scale * (np.asarray(t, float) - t0))


def torus_cylinder_chart(l: float, theta, r):
    """``(cos theta, sin theta, -log r) / sqrt(2 pi l)`` on ``e^{-l} <= r <= 1``.

    Returns the points and the exact polar partial derivatives
    ``(d_theta, d_r)``.
    """
    if not l > 0:
        raise ValueError("l must be positive")
    theta, r = np.broadcast_arrays(np.asarray(theta, float), np.asarray(r, float))
    if np.any(r <= 0):
        raise ValueError("r must be positive")
    c = 1.0 / np.sqrt(2 * np.pi * l)
    pts = c * np.stack([np.cos(theta), np.sin(theta), -np.log(r)], -1)
    d_theta = c * np.stack([-np.sin(theta), np.cos(theta), 0 * r], -1)
    d_r = c * np.stack([0 * r, 0 * r, -1.0 / r], -1)
    return pts, (d_theta, d_r)


def _cartesian_tangents(d_theta, d_r, theta, r):
    # chain rule for (x, y) = r (cos theta, sin theta)
    ct, st = np.cos(theta)[..., None], np.sin(theta)[..., None]
    rr = r[..., None]
    dx = ct * d_r - st / rr * d_theta
    dy = st * d_r + ct / rr * d_theta
    return dx, dy


def _defect(dx, dy) -> float:
    nx = np.linalg.norm(dx, axis=-1)
    ny = np.linalg.norm(dy, axis=-1)
    skew = np.abs(np.sum(dx * dy, -1)) / nx**2
    stretch = np.abs(nx - ny) / nx
    return float(np.max(np.maximum(skew, stretch)))


def torus_chart_conformal_defect(l: float, n: int = 64, method: str = "exact", h: float = 1e-3) -> float:
    """Conformal defect of the torus chart in Cartesian coordinates ``z = x + iy``.

    ``method`` is ``"exact"`` (analytic Jacobian) or ``"fd"`` (Richardson
    extrapolated central differences with step ``h`` relative to ``r``).
    """
    theta = np.linspace(0.0, 2 * np.pi, n, endpoint=False)
    r = np.geomspace(np.exp(-l), 1.0, n)
    T, Rr = np.meshgrid(theta, r, indexing="ij")
    if method == "exact":
        _, (dt, dr) = torus_cylinder_chart(l, T, Rr)
        return _defect(*_cartesian_tangents(dt, dr, T, Rr))
    X, Y = Rr * np.cos(T), Rr * np.sin(T)

    def chart_xy(x, y):
        return torus_cylinder_chart(l, np.arctan2(y, x), np.hypot(x, y))[0]

    grads = []
    for axis in (0, 1):
        d1 = _central_scaled(chart_xy, X, Y, h * Rr, axis)
        d2 = _central_scaled(chart_xy, X, Y, 0.5 * h * Rr, axis)
        grads.append((4 * d2 - d1) / 3)
    return _defect(*grads)


def _central_scaled(chart_xy, X, Y, step, axis):
    s = step
    if axis == 0:
        return (chart_xy(X + s, Y) - chart_xy(X - s, Y)) / (2 * s)[..., None]
    return (chart_xy(X, Y + s) - chart_xy(X, Y - s)) / (2 * s)[..., None]
