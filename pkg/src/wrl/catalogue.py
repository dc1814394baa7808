"""Analytic test surfaces in conformal charts and Möbius transformations."""
from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from . import elastica
from .immersion import ChartDomain, ImmersionGrid

SURFACE_KINDS = (
    "plane",
    "sphere",
    "catenoid",
    "inverted-catenoid",
    "clifford-torus-R4",
    "clifford-torus-R3",
    "hopf-torus",
    "graph-bump",
    "round-cylinder",
)
SCHEMA = "1"
# node spacing of the elastica integrator used for Hopf tori (torus parameter)
HOPF_MAX_STEP = 5e-4


@dataclass
class SurfaceSpec:
    """Kind, kind-specific parameters and grid resolution ``(nu, nv)``."""

    kind: str
    params: dict = field(default_factory=dict)
    resolution: tuple = (128, 64)

    def __post_init__(self):
        if self.kind not in SURFACE_KINDS:
            raise ValueError(f"unknown surface kind {self.kind!r}")
        self.resolution = tuple(int(x) for x in self.resolution)
        if len(self.resolution) != 2:
            raise ValueError("resolution must be (nu, nv)")
        if min(self.resolution) < 16:
            raise ValueError("resolution too coarse (minimum 16 per direction)")

    def with_resolution(self, nu: int, nv: int) -> "SurfaceSpec":
        return SurfaceSpec(self.kind, dict(self.params), (nu, nv))

    def to_dict(self) -> dict:
        return {
            "schema": SCHEMA,
            "kind": self.kind,
            "params": self.params,
            "resolution": list(self.resolution),
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "SurfaceSpec":
        if not isinstance(doc, dict) or "kind" not in doc:
            raise ValueError("surface spec needs a 'kind'")
        if "schema" in doc and str(doc["schema"]) != SCHEMA:
            raise ValueError(f"unsupported schema {doc['schema']!r}")
        params = doc.get("params", {})
        if not isinstance(params, dict):
            raise ValueError("'params' must be an object")
        return cls(doc["kind"], dict(params), tuple(doc.get("resolution", (128, 64))))

    @classmethod
    def from_json(cls, text: str) -> "SurfaceSpec":
        return cls.from_dict(json.loads(text))


# ---------------------------------------------------------------------------
# Möbius maps


@dataclass
class MobiusMap:
    """Composition of elementary conformal maps, applied left to right.

    Each step is a one-key dict: ``{"translation": vector}``,
    ``{"dilation": factor}``, ``{"rotation": orthogonal matrix}`` or
    ``{"inversion": center}`` (unit-radius inversion).
    """

    steps: list = field(default_factory=list)

    def __post_init__(self):
        checked = []
        for step in self.steps:
            if not isinstance(step, dict) or len(step) != 1:
                raise ValueError("each Möbius step is a one-key mapping")
            (name, val), = step.items()
            if name == "translation":
                val = np.asarray(val, float)
            elif name == "dilation":
                val = float(val)
                if not val > 0:
                    raise ValueError("dilation factor must be positive")
            elif name == "rotation":
                val = np.asarray(val, float)
                if np.max(np.abs(val @ val.T - np.eye(len(val)))) > 1e-10:
                    raise ValueError("rotation matrix is not orthogonal")
            elif name == "inversion":
                val = np.asarray(val, float)
            else:
                raise ValueError(f"unknown Möbius step {name!r}")
            checked.append({name: val})
        self.steps = checked

    def to_dict(self) -> dict:
        out = []
        for step in self.steps:
            (name, val), = step.items()
            out.append({name: np.asarray(val).tolist() if name != "dilation" else val})
        return {"steps": out}

    @classmethod
    def from_dict(cls, doc) -> "MobiusMap":
        steps = doc["steps"] if isinstance(doc, dict) else doc
        return cls(list(steps))


def _apply_step(name, val, pts, tangents):
    if name == "translation":
        return pts + val, tangents
    if name == "dilation":
        return pts * val, None if tangents is None else tuple(t * val for t in tangents)
    if name == "rotation":
        rot = lambda x: x @ val.T
        return rot(pts), None if tangents is None else tuple(rot(t) for t in tangents)
    y = pts - val
    r2 = np.sum(y * y, -1)[..., None]
    out = val + y / r2
    if tangents is None:
        return out, None
    # differential of the inversion: (I - 2 y y^T / |y|^2) / |y|^2
    push = lambda t: (t - 2.0 * y * np.sum(y * t, -1)[..., None] / r2) / r2
    return out, tuple(push(t) for t in tangents)


def _diameter(pts) -> float:
    flat = pts.reshape(-1, pts.shape[-1])
    return float(np.linalg.norm(flat.max(0) - flat.min(0)))


def apply_mobius(mobius: MobiusMap, grid: ImmersionGrid, margin: float = 1e-3) -> ImmersionGrid:
    """Apply a Möbius map pointwise to a grid and its exact tangents.

    Raises
    ------
    ValueError
        If an inversion center lies within ``margin`` times the surface
        diameter of the (current image of the) surface, including any
        completion points recorded in metadata (e.g. sphere poles).
    """
    pts = grid.points
    tangents = grid.tangents
    extra = np.asarray(grid.metadata.get("completion_points", np.zeros((0, grid.m))), float)
    for step in mobius.steps:
        (name, val), = step.items()
        if np.ndim(val) and np.shape(val)[0] != grid.m:
            raise ValueError("Möbius step dimension does not match the surface")
        if name == "inversion":
            cloud = np.concatenate([pts.reshape(-1, grid.m), extra])
            dist = np.min(np.linalg.norm(cloud - val, axis=-1))
            if dist < margin * _diameter(cloud):
                raise ValueError("inversion center too close to the surface")
        pts, tangents = _apply_step(name, val, pts, tangents)
        if len(extra):
            extra, _ = _apply_step(name, val, extra, None)
    meta = {k: v for k, v in grid.metadata.items() if k not in ("caps", "completion_points")}
    if grid.metadata.get("caps"):
        meta["caps_dropped"] = grid.metadata["caps"]
    if len(extra):
        meta["completion_points"] = extra
    meta["mobius"] = mobius.to_dict()
    return ImmersionGrid(grid.domain, pts, tangents, meta)


def random_mobius(rng: np.random.Generator, grid: ImmersionGrid, length: int | None = None,
                  min_distance: float = 0.5) -> MobiusMap:
    """Random composition of at most four steps with well-separated inversions.

    Inversion centers are drawn at distance at least ``min_distance`` times
    the surface diameter from the current image of the surface.
    """
    m = grid.m
    if length is None:
        length = int(rng.integers(1, 5))
    steps = []
    pts = grid.points.reshape(-1, m)
    extra = np.asarray(grid.metadata.get("completion_points", np.zeros((0, m))), float)
    names = ["translation", "dilation", "rotation", "inversion"]
    for i in range(length):
        name = names[int(rng.integers(0, 4))] if i else "inversion"
        cloud = np.concatenate([pts, extra])
        diam = _diameter(cloud)
        if name == "translation":
            val = rng.normal(size=m) * diam
        elif name == "dilation":
            val = float(np.exp(rng.uniform(-1.0, 1.0)))
        elif name == "rotation":
            q, r = np.linalg.qr(rng.normal(size=(m, m)))
            val = q * np.sign(np.diag(r))
        else:
            lo, hi = cloud.min(0), cloud.max(0)
            while True:
                val = rng.uniform(lo - 0.5 * diam, hi + 0.5 * diam)
                if np.min(np.linalg.norm(cloud - val, axis=-1)) >= min_distance * diam:
                    break
        steps.append({name: val})
        pts, _ = _apply_step(name, np.asarray(val, float) if name != "dilation" else val, pts, None)
        if len(extra):
            extra, _ = _apply_step(name, np.asarray(val, float) if name != "dilation" else val, extra, None)
    return MobiusMap(steps)


# ---------------------------------------------------------------------------
# surfaces


def _pad(arr, m):
    if arr.shape[-1] == m:
        return arr
    pad = np.zeros(arr.shape[:-1] + (m - arr.shape[-1],))
    return np.concatenate([arr, pad], axis=-1)


def _plane(p, nu, nv):
    m = int(p.get("m", 3))
    if p.get("chart", "rectangle") == "annulus":
        dom = ChartDomain("annulus", (p.get("rho_min", 0.1), p.get("rho_max", 1.0)),
                          (0.0, 2 * np.pi), nu, nv)
        S, V = np.meshgrid(dom.s, dom.v, indexing="ij")
        rho = np.exp(S)
        pts = np.stack([rho * np.cos(V), rho * np.sin(V), 0 * S], -1)
        du = pts.copy()
        dv = np.stack([-rho * np.sin(V), rho * np.cos(V), 0 * S], -1)
    else:
        dom = ChartDomain("rectangle", tuple(p.get("u_range", (-1.0, 1.0))),
                          tuple(p.get("v_range", (-1.0, 1.0))), nu, nv)
        U, V = dom.mesh()
        pts = np.stack([U, V, 0 * U], -1)
        du = np.broadcast_to([1.0, 0.0, 0.0], pts.shape).copy()
        dv = np.broadcast_to([0.0, 1.0, 0.0], pts.shape).copy()
    return ImmersionGrid(dom, _pad(pts, m), (_pad(du, m), _pad(dv, m)), {"conformal": True})


def _sphere(p, nu, nv):
    R = float(p.get("radius", 1.0))
    u0, u1 = float(p.get("u_min", -6.0)), float(p.get("u_max", 6.0))
    dom = ChartDomain("cylinder", (u0, u1), (0.0, 2 * np.pi), nu, nv)
    U, V = dom.mesh()
    sech, tanh = 1.0 / np.cosh(U), np.tanh(U)
    pts = R * np.stack([sech * np.cos(V), sech * np.sin(V), tanh], -1)
    du = R * np.stack([-sech * tanh * np.cos(V), -sech * tanh * np.sin(V), sech**2], -1)
    dv = R * np.stack([-sech * np.sin(V), sech * np.cos(V), 0 * U], -1)
    # polar caps beyond the band, completed analytically (|H| = 1/R, |II|^2 = 2/R^2)
    caps, poles = 0.0, []
    if u1 >= 3.0:
        caps += 2 * np.pi * (1 - np.tanh(u1))
        poles.append([0.0, 0.0, R])
    if u0 <= -3.0:
        caps += 2 * np.pi * (1 + np.tanh(u0))
        poles.append([0.0, 0.0, -R])
    meta = {
        "conformal": True,
        "closed": len(poles) == 2,
        "caps": {"W": caps, "E": 2 * caps},
        "completion_points": np.array(poles).reshape(-1, 3),
    }
    return ImmersionGrid(dom, pts, (du, dv), meta)


def _catenoid_chart(p, nu, nv):
    T = float(p.get("T", 2.0))
    a = float(p.get("neck", 1.0))
    if p.get("chart", "annulus") == "annulus":
        dom = ChartDomain("annulus", (np.exp(-T), np.exp(T)), (0.0, 2 * np.pi), nu, nv)
    else:
        dom = ChartDomain("cylinder", (-T, T), (0.0, 2 * np.pi), nu, nv)
    S, V = np.meshgrid(dom.s, dom.v, indexing="ij")
    pts = a * np.stack([np.cosh(S) * np.cos(V), np.cosh(S) * np.sin(V), S], -1)
    du = a * np.stack([np.sinh(S) * np.cos(V), np.sinh(S) * np.sin(V), np.ones_like(S)], -1)
    dv = a * np.stack([-np.cosh(S) * np.sin(V), np.cosh(S) * np.cos(V), 0 * S], -1)
    return ImmersionGrid(dom, pts, (du, dv), {"conformal": True, "neck": a})


def _inverted_catenoid(p, nu, nv):
    base = _catenoid_chart(p, nu, nv)
    a = base.metadata["neck"]
    center = np.asarray(p.get("center", (0.0, 0.0, 0.5 * a)), float)
    out = apply_mobius(MobiusMap([{"inversion": center}]), base)
    out.metadata["inversion_center"] = center.tolist()
    return out


def _clifford_r4(nu, nv):
    dom = ChartDomain("torus", (0.0, 2 * np.pi), (0.0, 2 * np.pi), nu, nv)
    A, B = dom.mesh()
    c = 2 ** -0.5
    pts = c * np.stack([np.cos(A), np.sin(A), np.cos(B), np.sin(B)], -1)
    du = c * np.stack([-np.sin(A), np.cos(A), 0 * A, 0 * A], -1)
    dv = c * np.stack([0 * A, 0 * A, -np.sin(B), np.cos(B)], -1)
    return ImmersionGrid(dom, pts, (du, dv), {"conformal": True})


def stereographic(x, tangents=None):
    """Projection of S^3 minus ``(0,0,0,1)`` to R^3 and its differential."""
    x = np.asarray(x, float)
    d = (1.0 - x[..., 3])[..., None]
    y = x[..., :3] / d
    if tangents is None:
        return y, None
    push = lambda t: t[..., :3] / d + x[..., :3] * t[..., 3:4] / d**2
    return y, tuple(push(t) for t in tangents)


def _clifford_r3(p, nu, nv):
    base = _clifford_r4(nu, nv)
    ang = float(p.get("rotation_angle", 0.0))
    pts, tang = base.points, base.tangents
    if ang:
        rot = np.eye(4)
        c, s = np.cos(ang), np.sin(ang)
        rot[2:, 2:] = [[c, -s], [s, c]]
        pts = pts @ rot.T
        tang = tuple(t @ rot.T for t in tang)
    if np.max(pts[..., 3]) > 1.0 - 1e-6:
        raise ValueError("projection pole lies on the surface")
    y, ty = stereographic(pts, tang)
    return ImmersionGrid(base.domain, y, ty, {"conformal": True})


def _hopf_torus(p, nu, nv):
    k0 = float(p.get("k0", 0.0))
    dk0 = float(p.get("dk0", 0.0))
    length = float(p.get("s_length", 4.0))
    h = length / (nu - 1)
    stride = int(np.ceil(h / float(p.get("max_step", HOPF_MAX_STEP))))
    sol = elastica.build_solution(k0, dk0, length, h / stride)
    idx = stride * np.arange(nu)
    dom = ChartDomain("cylinder", (0.0, length), (0.0, 2 * np.pi), nu, nv)
    theta = dom.v
    q, dq = sol.lift.q[idx], sol.lift.dq[idx]
    pts = elastica.fiber_point(q[:, None, :], theta[None, :])
    du = elastica.fiber_point(dq[:, None, :], theta[None, :])
    dv = elastica.qmul(np.array([0.0, 1.0, 0.0, 0.0]), pts)
    meta = {"conformal": True, "elastica": sol, "elastica_index": idx, "k0": k0, "dk0": dk0}
    return ImmersionGrid(dom, pts, (du, dv), meta)


def _graph_bump(p, nu, nv):
    amp = float(p.get("amplitude", 1.0))
    cx, cy = (float(x) for x in p.get("center", (0.0, 0.0)))
    if p.get("chart", "rectangle") == "annulus":
        dom = ChartDomain("annulus", (p.get("rho_min", 0.3), p.get("rho_max", 1.5)),
                          (0.0, 2 * np.pi), nu, nv)
        S, V = np.meshgrid(dom.s, dom.v, indexing="ij")
        X, Y = np.exp(S) * np.cos(V), np.exp(S) * np.sin(V)
    else:
        dom = ChartDomain("rectangle", tuple(p.get("u_range", (-2.0, 2.0))),
                          tuple(p.get("v_range", (-2.0, 2.0))), nu, nv)
        X, Y = dom.mesh()
    Z = amp * np.exp(-((X - cx) ** 2 + (Y - cy) ** 2))
    return ImmersionGrid(dom, np.stack([X, Y, Z], -1), None, {"conformal": False})


def _round_cylinder(p, nu, nv):
    a = float(p.get("radius", 1.0))
    height = float(p.get("height", 10.0))
    t = 0.5 * height / a
    dom = ChartDomain("cylinder", (-t, t), (0.0, 2 * np.pi), nu, nv)
    U, V = dom.mesh()
    pts = a * np.stack([np.cos(V), np.sin(V), U], -1)
    du = np.broadcast_to([0.0, 0.0, a], pts.shape).copy()
    dv = a * np.stack([-np.sin(V), np.cos(V), 0 * U], -1)
    return ImmersionGrid(dom, pts, (du, dv), {"conformal": True})


def realize(spec: SurfaceSpec) -> ImmersionGrid:
    """Sample the surface described by ``spec`` on its conformal chart."""
    nu, nv = spec.resolution
    p = spec.params
    kind = spec.kind
    if kind == "plane":
        grid = _plane(p, nu, nv)
    elif kind == "sphere":
        grid = _sphere(p, nu, nv)
    elif kind == "catenoid":
        grid = _catenoid_chart(p, nu, nv)
    elif kind == "inverted-catenoid":
        grid = _inverted_catenoid(p, nu, nv)
    elif kind == "clifford-torus-R4":
        grid = _clifford_r4(nu, nv)
    elif kind == "clifford-torus-R3":
        grid = _clifford_r3(p, nu, nv)
    elif kind == "hopf-torus":
        grid = _hopf_torus(p, nu, nv)
    elif kind == "graph-bump":
        grid = _graph_bump(p, nu, nv)
    else:
        grid = _round_cylinder(p, nu, nv)
    grid.metadata["kind"] = kind
    return grid


def extract_annulus(grid: ImmersionGrid, rho_min: float, rho_max: float) -> ImmersionGrid:
    """Restrict a cylinder or annulus chart to the rows with ``rho`` in range.

    Cylinder charts are read as annuli through ``rho = exp(u)``. The result
    keeps the source nodes, so the bounds are snapped inward to grid rows.
    """
    dom = grid.domain
    if dom.kind not in ("annulus", "cylinder"):
        raise ValueError("source chart must be an annulus or a cylinder")
    if not 0 < rho_min < rho_max:
        raise ValueError("need 0 < rho_min < rho_max")
    s = dom.s
    lo, hi = np.log(rho_min), np.log(rho_max)
    tol = 1e-9 * max(1.0, abs(s[0]), abs(s[-1]))
    if lo < s[0] - tol or hi > s[-1] + tol:
        raise ValueError("annulus bounds outside the source chart")
    keep = np.nonzero((s >= lo - tol) & (s <= hi + tol))[0]
    if len(keep) < 16:
        raise ValueError("sub-annulus has fewer than 16 rows")
    i0, i1 = keep[0], keep[-1] + 1
    sub = ChartDomain("annulus", (float(np.exp(s[i0])), float(np.exp(s[i1 - 1]))),
                      dom.v_range, i1 - i0, dom.nv)
    tang = None if grid.tangents is None else tuple(t[i0:i1] for t in grid.tangents)
    meta = {k: v for k, v in grid.metadata.items() if k not in ("caps", "closed")}
    if "elastica_index" in meta:
        meta["elastica_index"] = meta["elastica_index"][i0:i1]
    out = ImmersionGrid(sub, grid.points[i0:i1], tang, meta)
    # log(rho) of the new nodes must coincide with the source rows
    if np.max(np.abs(sub.s - s[i0:i1])) > 1e-9 * max(1.0, np.max(np.abs(s))):
        raise AssertionError("row alignment lost while extracting the annulus")
    return out
