"""Elastica on S^2, speed-2 curves of prescribed geodesic curvature, Hopf lift.

Conventions
-----------
* Quaternions are arrays ``(w, x, y, z)`` for ``w + x i + y j + z k``; S^3 is
  the unit sphere of R^4 with these coordinates.
* The Hopf map is ``q -> conj(q) i q``. Imaginary quaternions are identified
  with R^3 by ``x j + y k + z i <-> (x, y, z)``, an orientation-preserving
  identification under which ``q = 1`` maps to the north pole ``(0, 0, 1)``.
* Fibers are the orbits of left multiplication by ``exp(i theta)``.
* The elastica equation ``k'' + (k^3 + k) / 2 = 0`` is integrated in the
  arclength ``sigma`` of the curve on the unit sphere. The torus parameter
  is ``s = sigma / 2``, along which the curve has speed 2 and its horizontal
  lift has unit speed.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.interpolate import CubicHermiteSpline

NORTH_POLE = np.array([0.0, 0.0, 1.0])
_I = np.array([0.0, 1.0, 0.0, 0.0])


def qmul(a, b):
    """Quaternion product, broadcasting over leading axes."""
    a, b = np.asarray(a, float), np.asarray(b, float)
    w1, x1, y1, z1 = np.moveaxis(a, -1, 0)
    w2, x2, y2, z2 = np.moveaxis(b, -1, 0)
    return np.stack([
        w1 * w2 - x1 * x2 - y1 * y2 - z1 * z2,
        w1 * x2 + x1 * w2 + y1 * z2 - z1 * y2,
        w1 * y2 - x1 * z2 + y1 * w2 + z1 * x2,
        w1 * z2 + x1 * y2 - y1 * x2 + z1 * w2,
    ], axis=-1)


def qconj(q):
    q = np.asarray(q, float)
    return q * np.array([1.0, -1.0, -1.0, -1.0])


def r3_to_imag(p):
    """``(x, y, z) -> x j + y k + z i``."""
    p = np.asarray(p, float)
    zero = np.zeros(p.shape[:-1] + (1,))
    return np.concatenate([zero, p[..., 2:3], p[..., 0:1], p[..., 1:2]], axis=-1)


def imag_to_r3(q):
    q = np.asarray(q, float)
    return np.stack([q[..., 2], q[..., 3], q[..., 1]], axis=-1)


def left_i_matrix() -> np.ndarray:
    """Matrix of ``q -> i q`` on R^4."""
    return np.array([
        [0.0, -1.0, 0.0, 0.0],
        [1.0, 0.0, 0.0, 0.0],
        [0.0, 0.0, 0.0, -1.0],
        [0.0, 0.0, 1.0, 0.0],
    ])


def hopf_project(q, tol: float = 1e-9):
    """Hopf map ``conj(q) i q`` as a point of S^2 in R^3.

    Raises
    ------
    ValueError
        If ``|q| != 1`` beyond ``tol``.
    """
    q = np.asarray(q, float)
    if np.max(np.abs(np.linalg.norm(q, axis=-1) - 1.0)) > tol:
        raise ValueError("hopf_project needs unit quaternions")
    return imag_to_r3(qmul(qmul(qconj(q), _I), q))


def fiber_point(q, theta):
    """``exp(i theta) q``."""
    theta = np.asarray(theta, float)
    e = np.stack([np.cos(theta), np.sin(theta), 0 * theta, 0 * theta], axis=-1)
    return qmul(e, q)


def first_integral(k, dk):
    """``(k')^2 + k^4 / 4 + k^2 / 2`` with ``k'`` the arclength derivative."""
    return dk**2 + 0.25 * k**4 + 0.5 * k**2


@dataclass
class ElasticaProfile:
    """Curvature samples of an elastica, indexed by arclength ``sigma``."""

    sigma: np.ndarray
    k: np.ndarray
    dk: np.ndarray
    first_integral: np.ndarray

    @property
    def s(self) -> np.ndarray:
        """Torus parameter ``s = sigma / 2`` (curve speed 2)."""
        return 0.5 * self.sigma

    @property
    def dk_ds(self) -> np.ndarray:
        return 2.0 * self.dk

    def spline(self) -> CubicHermiteSpline:
        """Cubic Hermite interpolant of ``k`` in the torus parameter ``s``."""
        return CubicHermiteSpline(self.s, self.k, self.dk_ds)

    def to_dict(self) -> dict:
        return {
            "sigma": self.sigma.tolist(),
            "k": self.k.tolist(),
            "dk": self.dk.tolist(),
            "first_integral": self.first_integral.tolist(),
        }


def _rk4(rhs, y0, t, forcing, forcing_mid):
    """Fixed-step RK4 for ``y' = rhs(y, f)`` with a sampled forcing ``f``.

    ``forcing[n]`` is the forcing at ``t[n]`` and ``forcing_mid[n]`` at the
    midpoint of step ``n``.
    """
    y = np.empty((len(t),) + np.shape(y0))
    y[0] = y0
    for n in range(len(t) - 1):
        h = t[n + 1] - t[n]
        fm = forcing_mid[n]
        k1 = rhs(y[n], forcing[n])
        k2 = rhs(y[n] + h / 2 * k1, fm)
        k3 = rhs(y[n] + h / 2 * k2, fm)
        k4 = rhs(y[n] + h * k3, forcing[n + 1])
        y[n + 1] = y[n] + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
    return y


def _nodes(length: float, ds: float) -> np.ndarray:
    n = int(round(length / ds))
    if n < 1 or abs(n * ds - length) > 1e-9 * max(length, 1.0):
        raise ValueError("length must be a positive multiple of ds")
    return ds * np.arange(n + 1)


def solve_elastica(k0: float, dk0: float, length: float, ds: float) -> ElasticaProfile:
    """Integrate ``k'' + (k^3 + k) / 2 = 0`` with classical RK4.

    Parameters
    ----------
    k0, dk0 : float
        Initial curvature and its arclength derivative.
    length : float
        Arclength to integrate over; must be a multiple of ``ds``.
    ds : float
        Fixed step.
    """
    if length <= 0 or ds <= 0:
        raise ValueError("length and ds must be positive")
    sigma = _nodes(length, ds)

    def rhs(_, y):
        return np.array([y[1], -0.5 * (y[0] ** 3 + y[0])])

    # scalar loop is faster than the generic driver for a 2-vector state
    k, dk = np.empty(len(sigma)), np.empty(len(sigma))
    y = np.array([k0, dk0], dtype=float)
    k[0], dk[0] = y
    for n in range(len(sigma) - 1):
        a = rhs(0, y)
        b = rhs(0, y + ds / 2 * a)
        c = rhs(0, y + ds / 2 * b)
        d = rhs(0, y + ds * c)
        y = y + ds / 6 * (a + 2 * b + 2 * c + d)
        k[n + 1], dk[n + 1] = y
    if not np.all(np.isfinite(k)):
        raise FloatingPointError("elastica integration blew up")
    return ElasticaProfile(sigma, k, dk, first_integral(k, dk))


def first_integral_drift(profile: ElasticaProfile) -> float:
    """Largest deviation of the first integral from its initial value, per unit length."""
    fi = profile.first_integral
    return float(np.max(np.abs(fi - fi[0])) / profile.sigma[-1])


def step_halving_order(k0: float, dk0: float, length: float, ds: float) -> dict:
    """Observed order from solutions at ``ds``, ``ds/2`` and ``ds/4``.

    Differences are taken at the common nodes (every ``ds``).
    """
    sols = [solve_elastica(k0, dk0, length, ds / f) for f in (1, 2, 4)]
    ks = [s.k[:: f] for s, f in zip(sols, (1, 2, 4))]
    e1 = float(np.max(np.abs(ks[0] - ks[1])))
    e2 = float(np.max(np.abs(ks[1] - ks[2])))
    return {"ds": ds, "diff_coarse": e1, "diff_fine": e2, "order": float(np.log2(e1 / e2))}


@dataclass
class SphereCurve:
    """Speed-2 curve on S^2 with its first two ``s``-derivatives."""

    s: np.ndarray
    gamma: np.ndarray
    dgamma: np.ndarray
    ddgamma: np.ndarray


def frame_curve(profile: ElasticaProfile, gamma0=NORTH_POLE, tangent0=(1.0, 0.0, 0.0)) -> SphereCurve:
    """Curve on S^2 with speed 2 and geodesic curvature ``k``.

    Transports the frame ``(gamma, T, gamma x T)`` by
    ``gamma' = 2T``, ``T' = 2(k nu - gamma)``; the geodesic curvature is
    ``<gamma'', gamma x gamma'> / |gamma'|^3``.
    """
    s = profile.s
    kappa = profile.spline()
    g0 = np.asarray(gamma0, float)
    t0 = np.asarray(tangent0, float)
    t0 = t0 - np.dot(t0, g0) * g0
    t0 = t0 / np.linalg.norm(t0)

    def rhs(y, kap):
        g, T = y[0], y[1]
        nu = np.cross(g, T)
        return np.stack([2.0 * T, 2.0 * (kap * nu - g)])

    mid = 0.5 * (s[1:] + s[:-1])
    y = _rk4(rhs, np.stack([g0, t0]), s, profile.k, kappa(mid))
    g, T = y[:, 0], y[:, 1]
    k = profile.k[:, None]
    dd = 4.0 * (k * np.cross(g, T) - g)
    return SphereCurve(s, g, 2.0 * T, dd)


def _rotor_to(target) -> np.ndarray:
    """Unit quaternion ``q`` with ``conj(q) i q`` equal to ``target``."""
    a = r3_to_imag(NORTH_POLE)
    b = r3_to_imag(np.asarray(target, float))
    p = np.array([1.0, 0, 0, 0]) - qmul(b, a)
    nrm = np.linalg.norm(p)
    if nrm < 1e-12:
        p = np.array([0.0, 0.0, 1.0, 0.0])
    else:
        p = p / nrm
    # p a conj(p) = b, so q = conj(p) satisfies conj(q) a q = b
    return qconj(p)


@dataclass
class HopfLift:
    s: np.ndarray
    q: np.ndarray
    dq: np.ndarray


def _lift_rhs(q, dgamma_imag):
    return -0.5 * qmul(qmul(_I, q), dgamma_imag)


def hopf_lift(curve: SphereCurve, q0=None) -> HopfLift:
    """Horizontal lift of a sampled curve on S^2 through the Hopf map.

    Solves ``q' = -(1/2) i q gamma'`` (RK4, ``gamma'`` interpolated by cubic
    Hermite), whose solutions satisfy ``<q', i q> = 0`` and project onto
    the curve.
    """
    s = curve.s
    dg = CubicHermiteSpline(s, curve.dgamma, curve.ddgamma, axis=0)
    if q0 is None:
        q0 = _rotor_to(curve.gamma[0])
    q0 = np.asarray(q0, float)

    mid = 0.5 * (s[1:] + s[:-1])
    q = _rk4(_lift_rhs, q0, s, r3_to_imag(curve.dgamma), r3_to_imag(dg(mid)))
    dq = _lift_rhs(q, r3_to_imag(curve.dgamma))
    return HopfLift(s, q, dq)


def horizontality(lift: HopfLift) -> float:
    """``max |<q', i q>|`` along the lift."""
    iq = qmul(_I, lift.q)
    return float(np.max(np.abs(np.sum(lift.dq * iq, -1))))


@dataclass
class ElasticaSolution:
    """Elastica profile, its curve on S^2 and the horizontal lift to S^3."""

    profile: ElasticaProfile
    curve: SphereCurve
    lift: HopfLift

    @property
    def s(self) -> np.ndarray:
        return self.profile.s

    @property
    def k(self) -> np.ndarray:
        return self.profile.k

    def frame(self, index: int) -> dict:
        """Torus frame at ``(s_index, theta = 0)``.

        Returns ``Phi``, ``d_s Phi``, ``d_theta Phi = i Phi``, ``n = i d_s Phi``,
        ``k`` and ``d_s k``.
        """
        q = self.lift.q[index]
        dq = self.lift.dq[index]
        return {
            "Phi": q,
            "dPhi_s": dq,
            "dPhi_theta": qmul(_I, q),
            "n": qmul(_I, dq),
            "k": float(self.profile.k[index]),
            "dk_s": float(self.profile.dk_ds[index]),
        }

    def to_dict(self) -> dict:
        return {
            "schema": "1",
            "s": self.s.tolist(),
            "k": self.k.tolist(),
            "dk_ds": self.profile.dk_ds.tolist(),
            "first_integral": self.profile.first_integral.tolist(),
            "gamma": self.curve.gamma.tolist(),
            "lift": self.lift.q.tolist(),
        }


def build_solution(k0: float, dk0: float, s_length: float, ds: float) -> ElasticaSolution:
    """Elastica, curve and lift over the torus parameter range ``[0, s_length]``.

    ``ds`` is the step in ``s``; the arclength step is ``2 ds``.
    """
    profile = solve_elastica(k0, dk0, 2.0 * s_length, 2.0 * ds)
    curve = frame_curve(profile)
    return ElasticaSolution(profile, curve, hopf_lift(curve))


def geodesic_curvature(curve: SphereCurve) -> np.ndarray:
    """``<gamma'', gamma x gamma'> / |gamma'|^3`` from the stored derivatives."""
    cr = np.cross(curve.gamma, curve.dgamma)
    return np.sum(curve.ddgamma * cr, -1) / np.linalg.norm(curve.dgamma, axis=-1) ** 3
