"""Contour residues ``c, c0, c1`` of the Willmore conservation laws, the
potentials ``(L, S, R)`` and the pointwise identities relating them to ``H``.

All contour integrals are taken over grid circles of an annular chart.
In grid coordinates ``(s, theta)`` with ``s = log rho`` the outward normal
derivative and the arclength element combine as
``d_nu f dsigma = d_s f dtheta`` and ``d_tau f dsigma = d_theta f dtheta``,
so every integrand below is evaluated in grid coordinates.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import CurlDefectError
from .immersion import (
    STAR_SIGN,
    FrameField,
    ImmersionGrid,
    build_frames,
    willmore_current,
    _d,
)
from .multivec import (
    MultiVector,
    SimpleUnitNormal,
    basis,
    bullet,
    contract,
    hodge_star,
    inner,
    project_normal,
    pushforward,
    wedge,
)
from .numerics import convergence_order, cumulative

GUARD_FACTOR = 100.0
GUARD_FLOOR = 1e-8
INTERIOR_MARGIN = 4


@dataclass
class ResidueSet:
    """Residues on one contour, normalized by ``1 / 2 pi``."""

    c: np.ndarray
    c0: float
    c1: MultiVector
    radius: float
    quad_error: float
    row: int = -1

    def to_dict(self) -> dict:
        return {
            "c": [float(x) for x in self.c],
            "c0": float(self.c0),
            "c1": self.c1.as_dict(),
            "radius": float(self.radius),
            "quad_error": float(self.quad_error),
        }

    def flat(self) -> np.ndarray:
        return np.concatenate([self.c, [self.c0], self.c1.coef])


def _check_annulus(grid: ImmersionGrid):
    if grid.domain.kind not in ("annulus", "cylinder"):
        raise ValueError("residues need an annulus or cylinder chart")


def contour_row(grid: ImmersionGrid, rho: float) -> int:
    """Index of the grid circle nearest to radius ``rho``.

    Raises
    ------
    ValueError
        If ``rho`` is not strictly inside the annulus (two rows of margin).
    """
    _check_annulus(grid)
    s = grid.domain.s
    if not rho > 0:
        raise ValueError("radius must be positive")
    i = int(np.argmin(np.abs(s - np.log(rho))))
    if i < 2 or i > len(s) - 3 or not s[0] < np.log(rho) < s[-1]:
        raise ValueError(f"radius {rho} is not strictly inside the annulus")
    return i


def chart_radii(grid: ImmersionGrid, fractions) -> list:
    """Radii at the given fractions of the ``log rho`` extent of the chart."""
    s = grid.domain.s
    return [float(np.exp(s[0] + f * (s[-1] - s[0]))) for f in fractions]


def _integrands(grid: ImmersionGrid, frames: FrameField, star_sign: float):
    """Per-point integrands of ``2 pi c``, ``2 pi c0`` and ``2 pi c1``."""
    m = grid.m
    Ts, _ = willmore_current(grid, frames, star_sign)
    T = MultiVector(m, 1, Ts)
    phi = MultiVector.vector(grid.points)
    dtheta = MultiVector.vector(frames.dv)
    twist = hodge_star(contract(frames.normal, frames.H))
    f_c1 = -wedge(T, phi) - contract(twist, dtheta) * (2.0 * (-1.0) ** (m - 1))
    f_c0 = -inner(T, phi)
    return Ts, f_c0, f_c1.coef


def _row_mean(f, row, stride=1):
    # (1 / 2 pi) times the periodic trapezoid over the circle
    return np.mean(f[row, ::stride], axis=0)


def _residues_from(grid, integrands, row) -> ResidueSet:
    fc, fc0, fc1 = integrands
    vals = [_row_mean(f, row) for f in (fc, fc0, fc1)]
    nv = grid.domain.nv
    if nv % 2 == 0:
        coarse = [_row_mean(f, row, 2) for f in (fc, fc0, fc1)]
        qerr = max(float(np.max(np.abs(a - b))) for a, b in zip(vals, coarse))
    else:
        qerr = float("nan")
    return ResidueSet(
        c=np.asarray(vals[0]),
        c0=float(vals[1]),
        c1=MultiVector(grid.m, 2, vals[2]),
        radius=float(np.exp(grid.domain.s[row])),
        quad_error=qerr,
        row=row,
    )


def residues(grid: ImmersionGrid, frames: FrameField, rho: float,
             star_sign: float = STAR_SIGN) -> ResidueSet:
    """All three residues on the grid circle nearest to ``rho``."""
    row = contour_row(grid, rho)
    return _residues_from(grid, _integrands(grid, frames, star_sign), row)


def residue_c(grid, frames, rho, star_sign: float = STAR_SIGN) -> np.ndarray:
    """``c = (1/2pi) int d_nu H - 3 pi_n(d_nu H) - *(d_tau n ^ H) dsigma``."""
    return residues(grid, frames, rho, star_sign).c


def residue_c0(grid, frames, rho, star_sign: float = STAR_SIGN) -> float:
    """``c0 = -(1/2pi) int <T_nu, Phi> dsigma``."""
    return residues(grid, frames, rho, star_sign).c0


def residue_c1(grid, frames, rho, star_sign: float = STAR_SIGN) -> MultiVector:
    """``c1 = (1/2pi) int -T_nu ^ Phi - (-1)^{m-1} 2 (*(n -| H)) -| d_tau Phi dsigma``."""
    return residues(grid, frames, rho, star_sign).c1


def _max_pairwise(rows) -> float:
    rows = np.asarray(rows)
    if rows.ndim == 1:
        rows = rows[:, None]
    diff = rows[:, None, :] - rows[None, :, :]
    return float(np.max(np.linalg.norm(diff, axis=-1)))


def residue_sweep(grid: ImmersionGrid, frames: FrameField, radii,
                  star_sign: float = STAR_SIGN) -> dict:
    """Residues on several circles and their maximal pairwise deviation.

    Radii outside the annulus are skipped.

    Raises
    ------
    ValueError
        If fewer than three radii are valid.
    """
    rows = []
    for r in radii:
        try:
            rows.append(contour_row(grid, r))
        except ValueError:
            continue
    if len(rows) < 3:
        raise ValueError("residue sweep needs at least 3 radii inside the annulus")
    integrands = _integrands(grid, frames, star_sign)
    sets = [_residues_from(grid, integrands, r) for r in rows]
    dev = {
        "c": _max_pairwise([s.c for s in sets]),
        "c0": _max_pairwise([s.c0 for s in sets]),
        "c1": _max_pairwise([s.c1.coef for s in sets]),
    }
    dev["max"] = max(dev.values())
    return {"sets": sets, "deviation": dev}


def sweep_convergence(make_grid, resolutions, fractions, star_sign: float = STAR_SIGN) -> dict:
    """Sweep deviation at successive resolutions and observed orders.

    ``make_grid(nu, nv)`` returns an annular grid; radii are placed at the
    given fractions of the chart.
    """
    devs = []
    for nu, nv in resolutions:
        g = make_grid(nu, nv)
        out = residue_sweep(g, build_frames(g), chart_radii(g, fractions), star_sign)
        devs.append(out["deviation"])
    orders = []
    for a, b, (nu_a, _), (nu_b, _) in zip(devs, devs[1:], resolutions, resolutions[1:]):
        orders.append(convergence_order(a["max"], b["max"], nu_b / nu_a))
    return {"deviations": devs, "orders": orders}


# ---------------------------------------------------------------------------
# potentials


@dataclass
class PotentialFields:
    """Potentials on the grid and their gradients in grid coordinates."""

    L: np.ndarray
    S: np.ndarray
    R: np.ndarray
    C0: np.ndarray
    C1: np.ndarray
    grad_L: tuple
    grad_S: tuple
    grad_R: tuple
    curl_defect: dict
    guard: dict = field(default_factory=dict)


def _integrate_gradient(grid: ImmersionGrid, gs, gv):
    """Potential from its grid gradient: radial ray at theta = 0, then circles.

    Normalized to zero mean on the innermost circle.
    """
    dom = grid.domain
    ray = cumulative(gs[:, 0], dom.hs, 0, dom.periodic_u)
    around = cumulative(gv, dom.hv, 1, True)
    f = ray[:, None] + around
    return f - np.mean(f[0], axis=0)


def _curl_defect(grid: ImmersionGrid, gs, gv) -> float:
    """Largest cell circulation per unit area, or circle-period mismatch."""
    dom = grid.domain
    hs, hv = dom.hs, dom.hv
    gs = gs.reshape(gs.shape[:2] + (-1,))
    gv = gv.reshape(gv.shape[:2] + (-1,))
    gs_w = np.concatenate([gs, gs[:, :1]], axis=1)
    gv_w = np.concatenate([gv, gv[:, :1]], axis=1)
    # edge averages (trapezoid) of each cell [i, i+1] x [j, j+1]
    bottom = 0.5 * (gs_w[:-1, :-1] + gs_w[1:, :-1]) * hs
    top = 0.5 * (gs_w[:-1, 1:] + gs_w[1:, 1:]) * hs
    left = 0.5 * (gv_w[:-1, :-1] + gv_w[:-1, 1:]) * hv
    right = 0.5 * (gv_w[1:, :-1] + gv_w[1:, 1:]) * hv
    circ = (bottom + right - top - left) / (hs * hv)
    cell = float(np.max(np.linalg.norm(circ, axis=-1)))
    period = np.mean(gv, axis=1)  # (1/2pi) * circulation around each circle
    return max(cell, float(np.max(np.linalg.norm(period, axis=-1))))


def _potential_gradients(grid, frames, res: ResidueSet, star_sign):
    """Gradients of L, S, R and the fields C0, C1.

    From ``grad^perp L = T - c grad log rho``, ``grad^perp S =
    <L, grad^perp Phi> - C0 grad log rho`` and ``grad^perp R = L ^
    grad^perp Phi + (-1)^{m-1} 2 (*(n -| H)) -| grad^perp Phi - C1 grad log
    rho``; with ``grad^perp f = (-f_theta, f_s)`` the gradient is
    ``(f_s, f_theta) = (G_theta, -G_s)``.
    """
    m = grid.m
    Ts, Tv = willmore_current(grid, frames, star_sign)
    c = res.c
    Ls_, Lv_ = Tv, c - Ts
    L = _integrate_gradient(grid, Ls_, Lv_)

    phi = MultiVector.vector(grid.points)
    Pu, Pv = frames.du, frames.dv
    C0 = res.c0 + np.sum(grid.points * c, -1)
    C1 = res.c1 + wedge(MultiVector.vector(np.broadcast_to(c, grid.points.shape)), phi)

    rot = (-Pv, Pu)  # grad^perp Phi
    G_s = np.sum(L * rot[0], -1) - C0
    G_v = np.sum(L * rot[1], -1)
    S = _integrate_gradient(grid, G_v, -G_s)

    Lmv = MultiVector.vector(L)
    twist = hodge_star(contract(frames.normal, frames.H)) * (2.0 * (-1.0) ** (m - 1))
    K = []
    for a in (0, 1):
        r = MultiVector.vector(rot[a])
        K.append(wedge(Lmv, r) + contract(twist, r))
    K[0] = K[0] - C1
    R = _integrate_gradient(grid, K[1].coef, -K[0].coef)
    grads = {
        "L": (Ls_, Lv_),
        "S": (G_v, -G_s),
        "R": (K[1].coef, -K[0].coef),
    }
    return L, S, R, C0, C1.coef, grads


def _subsample(grid: ImmersionGrid) -> ImmersionGrid:
    dom = grid.domain
    nu = (dom.nu - 1) // 2 + 1
    P = grid.points[::2, ::2][:nu]
    s = dom.s[::2][:nu]
    if dom.kind == "annulus":
        u_range = (float(np.exp(s[0])), float(np.exp(s[-1])))
    else:
        u_range = (float(s[0]), float(s[-1]))
    from .immersion import ChartDomain

    sub = ChartDomain(dom.kind, u_range, dom.v_range, nu, dom.nv // 2)
    return ImmersionGrid(sub, P, None, {})


def solve_potentials(grid: ImmersionGrid, frames: FrameField, res: ResidueSet,
                     star_sign: float = STAR_SIGN, guard: bool = True) -> PotentialFields:
    """Integrate ``L``, ``S`` and ``R`` and measure their path dependence.

    The curl defect of each potential is the largest cell circulation per
    unit area of its gradient field (or the mismatch of its period around a
    circle). Its discretization error is estimated by repeating the
    computation on the grid with every other node.

    Raises
    ------
    CurlDefectError
        If a curl defect exceeds ``GUARD_FACTOR`` times the estimate (and an
        absolute floor), signalling a non-Willmore input or wrong residues.
    """
    _check_annulus(grid)
    if grid.domain.nv % 2:
        raise ValueError("potentials need an even number of angular nodes")
    L, S, R, C0, C1, grads = _potential_gradients(grid, frames, res, star_sign)
    defects = {k: _curl_defect(grid, *g) for k, g in grads.items()}
    info = {}
    if guard:
        coarse = _subsample(grid)
        cf = build_frames(coarse)
        *_, cgrads = _potential_gradients(coarse, cf, res, star_sign)
        for k, g in cgrads.items():
            d2 = _curl_defect(coarse, *g)
            est = abs(d2 - defects[k])
            scale = max(1.0, float(np.max(np.abs(grads[k][0]))), float(np.max(np.abs(grads[k][1]))))
            ratio = defects[k] / est if est > 0 else (np.inf if defects[k] > 0 else 0.0)
            info[k] = {"defect": defects[k], "coarse": d2, "estimate": est, "ratio": ratio}
            if ratio > GUARD_FACTOR and defects[k] > GUARD_FLOOR * scale:
                raise CurlDefectError(
                    f"curl defect of {k} is {defects[k]:.3e}, {ratio:.1f}x its "
                    "discretization estimate",
                    defects,
                )
    return PotentialFields(
        L=L, S=S, R=R, C0=C0, C1=C1,
        grad_L=grads["L"], grad_S=grads["S"], grad_R=grads["R"],
        curl_defect=defects, guard=info,
    )


def verify_identities(grid: ImmersionGrid, frames: FrameField, pot: PotentialFields,
                      res: ResidueSet, margin: int = INTERIOR_MARGIN) -> dict:
    """Max-norm residuals of the identities linking ``H``, ``S`` and ``R``.

    With ``(f_s, f_theta)`` the finite-difference gradients of the
    integrated potentials, in grid coordinates:

    * ``mean_curvature``: ``4 e^{2 lambda} H = -grad R -| grad^perp Phi + grad^perp S . grad Phi
      + C0 d_s Phi + C1 -| d_s Phi``
    * ``gradient_R``: ``grad R = (-1)^m *(n . grad^perp R) + grad^perp S *n
      + C0 grad log rho *n + C1 grad^perp log rho + (-1)^m *(n . C1 grad log rho)``
    * ``gradient_S``: ``grad S = -<grad^perp R, *n> + C0 grad^perp log rho
      - <C1 grad log rho, *n>``
    """
    m = grid.m
    sig = (-1.0) ** m
    n = frames.normal
    tn = hodge_star(n)  # *n = e1 ^ e2
    Pu, Pv = MultiVector.vector(frames.du), MultiVector.vector(frames.dv)
    Rs = MultiVector(m, 2, _d(grid, pot.R, 0))
    Rv = MultiVector(m, 2, _d(grid, pot.R, 1))
    Ss, Sv = _d(grid, pot.S, 0), _d(grid, pot.S, 1)
    C0 = pot.C0
    C1 = MultiVector(m, 2, pot.C1)

    lhs = frames.H * (4.0 * frames.area_density)
    rhs = (
        -(contract(Rs, -Pv) + contract(Rv, Pu))
        + (Pu * (-Sv) + Pv * Ss)
        + Pu * C0
        + contract(C1, Pu)
    )
    mean_curv = (lhs - rhs).coef

    # (grad^perp R)_s = -R_theta, (grad^perp R)_theta = R_s
    m1_s = Rs - (hodge_star(bullet(n, -Rv)) * sig + tn * (-Sv) + tn * C0 + hodge_star(bullet(n, C1)) * sig)
    m1_v = Rv - (hodge_star(bullet(n, Rs)) * sig + tn * Ss + C1)
    m11_s = Ss - (-inner(-Rv, tn) - inner(C1, tn))
    m11_v = Sv - (-inner(Rs, tn) + C0)

    sl = slice(margin, grid.domain.nu - margin) if not grid.domain.periodic_u else slice(None)

    def mx(*arrs):
        out = 0.0
        for a in arrs:
            a = a[sl]
            a = a if a.ndim == 3 else a[..., None]
            out = max(out, float(np.max(np.linalg.norm(a, axis=-1))))
        return out

    return {
        "mean_curvature": mx(mean_curv),
        "gradient_R": mx(m1_s.coef, m1_v.coef),
        "gradient_S": mx(m11_s, m11_v),
        "scale": mx(lhs.coef),
    }


# ---------------------------------------------------------------------------
# Hopf torus oracle


def _rotation_derivative(M, a: MultiVector) -> MultiVector:
    """Derivation action ``a ^ b -> Ma ^ b + a ^ Mb`` of a matrix on 2-vectors."""
    m = a.m
    cols = [MultiVector.vector(M[:, j]) for j in range(m)]
    out = MultiVector.zero(m, 2)
    for k, (i, j) in enumerate(basis(m, 2)):
        ei, ej = MultiVector.blade(m, i), MultiVector.blade(m, j)
        term = wedge(cols[i - 1], ej) + wedge(ei, cols[j - 1])
        out = out + term * a.coef[k]
    return out


def analytic_c1_hopf(sol, index: int, star_sign: float = STAR_SIGN) -> MultiVector:
    """Closed-form ``c1`` of the Hopf torus on the fiber over ``s[index]``.

    Uses ``H = k n - Phi`` with ``n = i d_s Phi``, ``d_s n = -2k d_s Phi -
    d_theta Phi`` and ``d_theta N = (i .) acting on N = *(d_s Phi ^ d_theta
    Phi)``, evaluates the integrand ``F`` at ``theta = 0`` and uses the
    equivariance ``F(theta) = exp(i theta)_* F(0)``, whose angular average is
    ``(F + (i .)_* F) / 2``.
    """
    from .elastica import left_i_matrix

    fr = sol.frame(index)
    m = 4
    v = MultiVector.vector
    phi, ps, pt, nS = v(fr["Phi"]), v(fr["dPhi_s"]), v(fr["dPhi_theta"]), v(fr["n"])
    k, dk = fr["k"], fr["dk_s"]
    Li = left_i_matrix()
    N = hodge_star(wedge(ps, pt))
    normal = SimpleUnitNormal(N, check=True, tol=1e-8)
    H = nS * k - phi
    dn = ps * (-2.0 * k) - pt
    dH = nS * dk + dn * k - ps
    dN = _rotation_derivative(Li, N)
    T = dH - project_normal(normal, dH) * 3.0 - hodge_star(wedge(dN, H)) * star_sign
    F = -wedge(T, phi) - contract(hodge_star(contract(N, H)), pt) * (2.0 * (-1.0) ** (m - 1))
    return (F + pushforward(Li, F)) * 0.5
