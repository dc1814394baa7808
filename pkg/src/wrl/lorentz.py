"""Lorentz quasi-norms ``L^{p,q}`` of weighted samples on planar domains.

The quasi-norm ``||f||_{p,q} = (int_0^inf (t^{1/p} f*(t))^q dt/t)^{1/q}``
(``sup_t t^{1/p} f*(t)`` for ``q = inf``) is evaluated exactly for the
step-function rearrangement of weighted samples. It is the quasi-norm, not
the equivalent Banach norm.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass
class MeasuredSample:
    """Samples ``|f|`` with nonnegative area weights.

    Parameters
    ----------
    values, weights : array_like
        Equal-length 1-d arrays.
    area : float, optional
        Domain area; if given, the weights must sum to it within 1e-10
        (relative to ``max(1, area)``).
    """

    values: np.ndarray
    weights: np.ndarray
    area: float | None = None

    def __post_init__(self):
        self.values = np.abs(np.asarray(self.values, float).ravel())
        self.weights = np.asarray(self.weights, float).ravel()
        if self.values.shape != self.weights.shape:
            raise ValueError("values and weights differ in length")
        if np.any(self.weights < 0):
            raise ValueError("weights must be nonnegative")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("values must be finite")
        if self.area is not None:
            total = float(np.sum(self.weights))
            if abs(total - self.area) > 1e-10 * max(1.0, self.area):
                raise ValueError(f"weights sum to {total}, not the domain area {self.area}")

    def rearrangement(self):
        """Decreasing rearrangement as steps: values ``v_k`` on ``(t_{k-1}, t_k]``.

        Returns the sorted values, their weights and the right step ends.
        """
        order = np.argsort(-self.values, kind="stable")
        w = self.weights[order]
        return self.values[order], w, np.cumsum(w)


def lorentz_norm(sample: MeasuredSample, p: float, q: float) -> float:
    """Exact ``L^{p,q}`` quasi-norm of the step rearrangement.

    On a step ``(t_{k-1}, t_k]`` with value ``v`` the integrand contributes
    ``v^q (p/q) (t_k^{q/p} - t_{k-1}^{q/p})``; for ``q = inf`` the supremum
    is attained at the right end of a step.

    Raises
    ------
    ValueError
        If ``p <= 1``, ``p`` is infinite, or ``q < 1``.
    """
    p, q = float(p), float(q)
    if not (p > 1 and np.isfinite(p)):
        raise ValueError("p must lie in (1, inf)")
    if not q >= 1:
        raise ValueError("q must lie in [1, inf]")
    v, w, t = sample.rearrangement()
    keep = (v > 0) & (w > 0)
    if not np.any(keep):
        return 0.0
    if np.isinf(q):
        return float(np.max(v[keep] * t[keep] ** (1.0 / p)))
    t_prev = np.concatenate([[0.0], t[:-1]])
    a = q / p
    # scale out the largest value to avoid overflow for large q
    vmax = float(np.max(v))
    steps = (v / vmax) ** q * (t**a - t_prev**a)
    return float(vmax * (np.sum(steps[keep]) * p / q) ** (1.0 / q))


def lp_norm(sample: MeasuredSample, p: float) -> float:
    """Plain ``L^p`` norm ``(sum w |f|^p)^{1/p}``."""
    return float(np.sum(sample.weights * sample.values**p) ** (1.0 / p))


def annulus_rings(r_in: float, r_out: float, n: int, spacing: str = "linear"):
    """Ring edges and exact ring areas of ``B(0, r_out) \\ B(0, r_in)``.

    ``spacing`` is ``"linear"`` or ``"log"`` (requires ``r_in > 0``).
    """
    if spacing == "log":
        if not r_in > 0:
            raise ValueError("log spacing needs r_in > 0")
        edges = np.geomspace(r_in, r_out, n + 1)
    else:
        edges = np.linspace(r_in, r_out, n + 1)
    return edges, np.pi * (edges[1:] ** 2 - edges[:-1] ** 2)


def radial_sample(f, r_in: float, r_out: float, n: int, spacing: str = "linear",
                  point: str = "outer") -> MeasuredSample:
    """Sample a radial function once per ring with the exact ring area.

    ``point`` selects the sampling radius: ``"outer"`` (the ring's outer
    radius; the smaller value for decreasing ``f``) or ``"midpoint"``
    (arithmetic or geometric midpoint matching ``spacing``).
    """
    edges, areas = annulus_rings(r_in, r_out, n, spacing)
    if point == "outer":
        r = edges[1:]
    elif spacing == "log":
        r = np.sqrt(edges[1:] * edges[:-1])
    else:
        r = 0.5 * (edges[1:] + edges[:-1])
    vals = np.asarray(f(r), float) * np.ones_like(r)
    return MeasuredSample(vals, areas, area=float(np.pi * (r_out**2 - r_in**2)))


def inverse_radius_weak_l2(resolutions=(128, 256, 512), exponent: float = 1.0, tol: float = 0.05) -> dict:
    """``||rho^{-exponent}||_{2,inf}`` on the unit disc under refinement.

    Rings of equal width sampled at their outer radius. For ``exponent = 1``
    the exact value is ``sqrt(pi)`` (distribution function ``pi / s^2``);
    larger exponents grow without bound.
    """
    norms = []
    for n in resolutions:
        s = radial_sample(lambda r: r**-exponent, 0.0, 1.0, int(n))
        norms.append(lorentz_norm(s, 2.0, np.inf))
    drift = max(abs(x - norms[0]) for x in norms) / norms[0]
    return {
        "resolutions": [int(n) for n in resolutions],
        "exponent": float(exponent),
        "norms": norms,
        "exact": float(np.sqrt(np.pi)) if exponent == 1.0 else None,
        "drift": float(drift),
        "stable": bool(drift < tol),
    }


def inverse_radius_21_exact(r: float) -> float:
    """``||1/rho||_{L^{2,1}(D \\ B(0,r))} = 2 sqrt(pi) arccosh(1/r)``."""
    return float(2.0 * np.sqrt(np.pi) * np.arccosh(1.0 / r))


def inverse_radius_log_growth(r_values=(1e-1, 1e-2, 1e-3), rings_per_decade: int = 2000) -> dict:
    """Ratios ``||1/rho||_{L^{2,1}(D \\ B(0,r))} / |log r|``.

    Log-spaced rings sampled at geometric midpoints; the closed form
    ``2 sqrt(pi) arccosh(1/r)`` is reported alongside.

    Raises
    ------
    ValueError
        If some ``r`` is not in ``(0, 1/4)``.
    """
    rows = []
    for r in r_values:
        r = float(r)
        if not 0 < r < 0.25:
            raise ValueError("r must lie in (0, 1/4)")
        n = max(64, int(np.ceil(rings_per_decade * np.log10(1.0 / r))))
        s = radial_sample(lambda x: 1.0 / x, r, 1.0, n, spacing="log", point="midpoint")
        val = lorentz_norm(s, 2.0, 1.0)
        exact = inverse_radius_21_exact(r)
        rows.append({
            "r": r,
            "norm": val,
            "exact": exact,
            "rel_err": abs(val - exact) / exact,
            "ratio": float(val / abs(np.log(r))),
        })
    ratios = [row["ratio"] for row in rows]
    band = max(ratios) / min(ratios)
    return {"rows": rows, "band": float(band), "within_band": bool(band < 10.0)}


def duality_bound(f, r: float, n: int = 4000) -> dict:
    """Both sides of ``int_r^1 |f| drho <= ||f||_{L^{2,1}} ||1/rho||_{L^{2,inf}}``.

    Norms are taken on ``D \\ B(0, r)`` for the radial function ``f(rho)``
    (a callable), using log-spaced rings; the left side uses the same
    geometric-midpoint rule.
    """
    r = float(r)
    if not 0 < r < 1:
        raise ValueError("r must lie in (0, 1)")
    edges, _ = annulus_rings(r, 1.0, n, "log")
    mid = np.sqrt(edges[1:] * edges[:-1])
    fv = np.abs(np.asarray(f(mid), float) * np.ones_like(mid))
    lhs = float(np.sum(fv * np.diff(edges)))
    nf = lorentz_norm(radial_sample(f, r, 1.0, n, "log", "midpoint"), 2.0, 1.0)
    ninv = lorentz_norm(radial_sample(lambda x: 1.0 / x, r, 1.0, n, "log", "outer"), 2.0, np.inf)
    rhs = nf * ninv
    return {"lhs": lhs, "rhs": rhs, "norm_f_21": nf, "norm_inv_2inf": ninv, "holds": bool(lhs <= rhs)}


# operation names used by the public interface
verify_r1 = inverse_radius_weak_l2
verify_r2 = inverse_radius_log_growth
