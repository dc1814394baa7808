"""Finite differences, quadrature and cumulative integration on uniform grids."""
from __future__ import annotations

from functools import lru_cache

import numpy as np
from scipy import integrate


def fornberg_weights(z: float, x, order: int) -> np.ndarray:
    """Finite-difference weights for the ``order``-th derivative at ``z``.

    Parameters
    ----------
    z : float
        Evaluation point.
    x : array_like
        Stencil nodes (distinct).
    order : int
        Derivative order.

    Returns
    -------
    ndarray
        Weights ``w`` with ``f^(order)(z) ~ sum(w * f(x))``.
    """
    x = np.asarray(x, dtype=float)
    n = len(x)
    c = np.zeros((n, order + 1))
    c1, c4 = 1.0, x[0] - z
    c[0, 0] = 1.0
    for i in range(1, n):
        mn = min(i, order)
        c2, c5 = 1.0, c4
        c4 = x[i] - z
        for j in range(i):
            c3 = x[i] - x[j]
            c2 *= c3
            if j == i - 1:
                for k in range(mn, 0, -1):
                    c[i, k] = c1 * (k * c[i - 1, k - 1] - c5 * c[i - 1, k]) / c2
                c[i, 0] = -c1 * c5 * c[i - 1, 0] / c2
            for k in range(mn, 0, -1):
                c[j, k] = (c4 * c[j, k] - k * c[j, k - 1]) / c3
            c[j, 0] = c4 * c[j, 0] / c3
        c1 = c2
    return c[:, order]


@lru_cache(maxsize=None)
def _stencils(order: int):
    """Centered and edge stencils giving 4th-order accuracy."""
    centered = fornberg_weights(0.0, np.arange(-2, 3), order)
    width = 5 if order == 1 else 6
    nodes = np.arange(width)
    left = [fornberg_weights(float(k), nodes, order) for k in range(2)]
    return centered, left, width


def derivative(f, h: float, axis: int, order: int = 1, periodic: bool = False):
    """4th-order finite-difference derivative of ``f`` along ``axis``.

    Centered 5-point stencils in the interior; one-sided stencils on the two
    outermost nodes of a non-periodic axis.
    """
    if order not in (1, 2):
        raise ValueError("order must be 1 or 2")
    f = np.moveaxis(np.asarray(f, dtype=float), axis, 0)
    centered, left, width = _stencils(order)
    scale = h ** order
    if periodic:
        out = sum(w * np.roll(f, -k, axis=0) for w, k in zip(centered, range(-2, 3)))
        return np.moveaxis(out / scale, 0, axis)
    n = f.shape[0]
    if n < width + 1:
        raise ValueError(f"need at least {width + 1} nodes along a non-periodic axis")
    out = np.empty_like(f)
    out[2:-2] = sum(w * f[2 + k:n - 2 + k] for w, k in zip(centered, range(-2, 3)))
    for row in range(2):
        out[row] = np.tensordot(left[row], f[:width], axes=(0, 0))
        # mirrored stencil for the right edge: odd derivatives flip sign
        sign = -1.0 if order % 2 else 1.0
        out[n - 1 - row] = sign * np.tensordot(left[row], f[::-1][:width], axes=(0, 0))
    return np.moveaxis(out / scale, 0, axis)


def integrate_axis(f, h: float, axis: int, periodic: bool):
    """Trapezoid on periodic axes (endpoint excluded), Simpson otherwise."""
    if periodic:
        return np.sum(f, axis=axis) * h
    return integrate.simpson(f, dx=h, axis=axis)


def cumulative(f, h: float, axis: int, periodic: bool):
    """Running integral from the first node along ``axis``.

    Periodic axes use the Fourier antiderivative of the zero-mean part plus
    the linear term of the mean, which is exact for band-limited data.
    Non-periodic axes use cumulative Simpson.
    """
    f = np.moveaxis(np.asarray(f, dtype=float), axis, 0)
    if periodic:
        n = f.shape[0]
        mean = f.mean(axis=0)
        spec = np.fft.rfft(f - mean, axis=0)
        k = np.fft.rfftfreq(n, d=h) * 2.0 * np.pi
        k[0] = 1.0
        anti = spec / (1j * k.reshape((-1,) + (1,) * (f.ndim - 1)))
        anti[0] = 0.0
        if n % 2 == 0:
            anti[-1] = 0.0
        F = np.fft.irfft(anti, n=n, axis=0)
        F = F - F[0]
        t = (np.arange(n) * h).reshape((-1,) + (1,) * (f.ndim - 1))
        out = F + mean * t
    else:
        out = integrate.cumulative_simpson(f, dx=h, axis=0, initial=0.0)
    return np.moveaxis(out, 0, axis)


def convergence_order(coarse: float, fine: float, ratio: float = 2.0) -> float:
    """Observed order ``log(e_coarse / e_fine) / log(ratio)``."""
    coarse, fine = abs(coarse), abs(fine)
    if fine == 0.0:
        return float("inf") if coarse > 0 else float("nan")
    return float(np.log(coarse / fine) / np.log(ratio))
