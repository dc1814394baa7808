"""Invariant suites run by ``wrl verify``.

Each check returns a plain dict with a name, the measured value, the
threshold, a pass flag and (where meaningful) a discretization-error
estimate. Checks are deterministic: fixed seeds, fixed resolutions.
"""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from itertools import product

import numpy as np

from . import collar, elastica, lorentz, residues
from .catalogue import SurfaceSpec, apply_mobius, extract_annulus, random_mobius, realize
from .errors import CurlDefectError
from .immersion import (
    STAR_SIGN,
    build_frames,
    divergence,
    gauss_bonnet_residual,
    willmore_current,
    willmore_energy,
)
from .multivec import (
    MultiVector,
    basis,
    bullet,
    contract,
    hodge_star,
    inner,
    wedge,
)
from .numerics import convergence_order

SUITES = ("multivec", "immersion", "residues", "elastica", "lorentz", "collar")
SEED = 20240611


def _check(name, value, tolerance, passed, **extra) -> dict:
    out = {"name": name, "value": float(value), "tolerance": tolerance, "passed": bool(passed)}
    out.update(extra)
    return out


def annulus_grid(spec: SurfaceSpec):
    """Realize ``spec`` and read cylinder charts as annuli (``rho = e^u``)."""
    g = realize(spec)
    if g.domain.kind == "cylinder":
        s = g.domain.s
        g = extract_annulus(g, float(np.exp(s[0])), float(np.exp(s[-1])))
    elif g.domain.kind != "annulus":
        raise ValueError(f"{spec.kind} has no annular chart")
    return g


# ---------------------------------------------------------------------------
# multivectors


def _random_mv(rng, m, p, n=None):
    shape = (len(basis(m, p)),) if n is None else (n, len(basis(m, p)))
    return MultiVector(m, p, rng.normal(size=shape))


def _orthonormal(rng, m, k):
    q, r = np.linalg.qr(rng.normal(size=(m, m)))
    q = q * np.sign(np.diag(r))
    return [MultiVector.vector(q[:, i]) for i in range(k)]


def multivec_checks() -> list:
    rng = np.random.default_rng(SEED)
    star2 = hodge_dual = adj = leib = twist = rotated = 0.0
    for m in range(3, 7):
        for p in range(m + 1):
            for a_idx in basis(m, p):
                a = MultiVector.blade(m, *a_idx)
                star2 = max(star2, np.max(np.abs((hodge_star(hodge_star(a)) - a * (-1.0) ** (p * (m - p))).coef)))
                for b_idx in basis(m, p):
                    b = MultiVector.blade(m, *b_idx)
                    lhs = wedge(b, hodge_star(a))
                    rhs = MultiVector.volume(m) * inner(b, a)
                    hodge_dual = max(hodge_dual, np.max(np.abs((lhs - rhs).coef)))
        for p, q in product(range(m + 1), repeat=2):
            if q > p:
                continue
            a, b, c = _random_mv(rng, m, p, 200), _random_mv(rng, m, q, 200), _random_mv(rng, m, p - q, 200)
            adj = max(adj, np.max(np.abs(inner(contract(a, b), c) - inner(a, wedge(b, c)))))
        for p, q, r in product(range(1, m + 1), repeat=3):
            if q + r > m or p + q + r - 2 > m or p + q + r < 2:
                continue
            if p + q - 2 < 0 or p + r - 2 < 0:
                continue
            a = _random_mv(rng, m, p, 20)
            b, c = _random_blade(rng, m, q), _random_blade(rng, m, r)
            lhs = bullet(a, wedge(b, c))
            rhs = wedge(bullet(a, b), c) + wedge(bullet(a, c), b) * (-1.0) ** (q * r)
            leib = max(leib, np.max(np.abs((lhs - rhs).coef)))
        for _ in range(20):
            e1, e2, N = _orthonormal(rng, m, 3)
            n = hodge_star(wedge(e1, e2))
            lhs = hodge_star(contract(n, N))
            rhs = wedge(wedge(e1, e2), N) * (-1.0) ** (m - 1)
            twist = max(twist, np.max(np.abs((lhs - rhs).coef)))
            u = e1 * rng.normal() + e2 * rng.normal()
            # rotation induced by grad^perp = (-d_2, d_1) on frame components
            Ju = e1 * inner(u, e2) - e2 * inner(u, e1)
            lhs = contract(hodge_star(contract(n, N)), u) * (-1.0) ** (m - 1)
            rotated = max(rotated, np.max(np.abs((lhs + wedge(Ju, N)).coef)))
    tol = 1e-12
    return [
        _check("multivec.star_star_sign", star2, tol, star2 < tol),
        _check("multivec.star_definition", hodge_dual, tol, hodge_dual < tol),
        _check("multivec.contraction_adjointness", adj, tol, adj < tol),
        _check("multivec.bullet_leibniz", leib, tol, leib < tol),
        _check("multivec.normal_twist_identity", twist, tol, twist < tol),
        _check("multivec.rotated_tangent_identity", rotated, tol, rotated < tol),
    ]


def _random_blade(rng, m, k, n=20):
    """Batch of random decomposable k-vectors."""
    out = MultiVector.vector(rng.normal(size=(n, m)))
    for _ in range(k - 1):
        out = wedge(out, MultiVector.vector(rng.normal(size=(n, m))))
    return out


# ---------------------------------------------------------------------------
# immersions and energies


def _energy(spec):
    g = realize(spec)
    return willmore_energy(g, build_frames(g))


def immersion_checks() -> list:
    out = []
    sphere = SurfaceSpec("sphere", {}, (256, 128))
    W = _energy(sphere)
    W_half = _energy(sphere.with_resolution(128, 64))
    rel = abs(W - 4 * np.pi) / (4 * np.pi)
    out.append(_check("immersion.sphere_willmore", rel, 1e-3, rel < 1e-3, W=W, error_estimate=abs(W - W_half)))

    cl = SurfaceSpec("clifford-torus-R3", {}, (128, 128))
    W = _energy(cl)
    W_oracle = _energy(cl.with_resolution(512, 512))
    rel = abs(W - W_oracle) / W_oracle
    out.append(_check("immersion.clifford_r3_willmore", rel, 5e-3, rel < 5e-3, W=W, oracle=W_oracle,
                      rel_to_2pi2=abs(W_oracle - 2 * np.pi**2) / (2 * np.pi**2)))

    for kind, chi in (("sphere", 2), ("clifford-torus-R4", 0)):
        g = realize(SurfaceSpec(kind, {}, (256, 128) if kind == "sphere" else (128, 128)))
        res = gauss_bonnet_residual(g, build_frames(g), chi)
        out.append(_check(f"immersion.gauss_bonnet_{kind}", res, 1e-2, res < 1e-2))

    rng = np.random.default_rng(SEED)
    for kind, res in (("sphere", (256, 128)), ("clifford-torus-R3", (256, 256))):
        g = realize(SurfaceSpec(kind, {}, res))
        W0 = willmore_energy(g, build_frames(g))
        worst = 0.0
        for _ in range(10):
            h = apply_mobius(random_mobius(rng, g), g)
            # caps of the sphere band are dropped by the map; their share is < 1e-5
            worst = max(worst, abs(willmore_energy(h, build_frames(h)) - W0) / W0)
        out.append(_check(f"immersion.mobius_invariance_{kind}", worst, 5e-3, worst < 5e-3))

    divs = []
    for n in (64, 128):
        g = realize(SurfaceSpec("catenoid", {"chart": "cylinder"}, (2 * n, n)))
        f = build_frames(g)
        d = divergence(g, willmore_current(g, f))
        divs.append(float(np.max(np.linalg.norm(d[4:-4], axis=-1))))
    order = convergence_order(divs[0], divs[1])
    out.append(_check("immersion.catenoid_div_current_order", order, 1.8, order >= 1.8, divergence=divs[1]))
    g = realize(SurfaceSpec("graph-bump", {}, (128, 128)))
    d = divergence(g, willmore_current(g, build_frames(g)))
    bump = float(np.max(np.linalg.norm(d[4:-4, 4:-4], axis=-1)))
    out.append(_check("immersion.graph_bump_div_current", bump, 0.1, bump > 0.1))
    return out


# ---------------------------------------------------------------------------
# residues


FRACTIONS = (0.3, 0.4, 0.5, 0.6, 0.7)


def _sweep_dev(spec):
    g = annulus_grid(spec)
    return residues.residue_sweep(g, build_frames(g), residues.chart_radii(g, FRACTIONS))["deviation"]["max"]


def residue_checks() -> list:
    out = []
    cat = SurfaceSpec("catenoid", {}, (128, 64))
    d1, d2 = _sweep_dev(cat), _sweep_dev(cat.with_resolution(256, 128))
    order = convergence_order(d1, d2)
    out.append(_check("residues.catenoid_radius_independence_order", order, 1.8, order >= 1.8, deviation=d2))

    g = annulus_grid(cat.with_resolution(256, 128))
    c_cat = float(np.linalg.norm(residues.residue_c(g, build_frames(g), 1.0)))
    out.append(_check("residues.catenoid_c", c_cat, 1e-5, c_cat < 1e-5))
    inv = SurfaceSpec("inverted-catenoid", {}, (256, 128))
    g = annulus_grid(inv)
    c_inv = residues.residue_c(g, build_frames(g), 1.0)
    g4 = annulus_grid(inv.with_resolution(1024, 512))
    c_ref = residues.residue_c(g4, build_frames(g4), 1.0)
    ratio = float(np.linalg.norm(c_inv)) / max(c_cat, 1e-300)
    out.append(_check("residues.inverted_catenoid_c_ratio", ratio, 100.0, ratio >= 100.0))
    rel = float(np.linalg.norm(c_inv - c_ref) / np.linalg.norm(c_ref))
    out.append(_check("residues.inverted_catenoid_c_oracle", rel, 0.02, rel < 0.02, c=c_inv.tolist()))

    errs = []
    for res in ((64, 32), (128, 64)):
        g = annulus_grid(SurfaceSpec("hopf-torus", {"k0": 0.5, "s_length": 2.0}, res))
        f = build_frames(g)
        row = g.domain.nu // 2
        rs = residues.residues(g, f, float(np.exp(g.domain.s[row])))
        an = residues.analytic_c1_hopf(g.metadata["elastica"], g.metadata["elastica_index"][rs.row])
        errs.append(float(np.max(np.abs(an.coef - rs.c1.coef))))
    order = convergence_order(*errs)
    out.append(_check("residues.hopf_c1_analytic_order", order, 1.8, order >= 1.8, error=errs[-1],
                      c1_norm=float(np.linalg.norm(rs.c1.coef))))

    g = annulus_grid(cat.with_resolution(256, 128))
    f = build_frames(g)
    rs = residues.residues(g, f, 1.0)
    pot = residues.solve_potentials(g, f, rs)
    ident = residues.verify_identities(g, f, pot, rs)
    worst = max(ident[k] for k in ("mean_curvature", "gradient_R", "gradient_S"))
    out.append(_check("residues.catenoid_identities", worst, 1e-3, worst < 1e-3, **{k: ident[k] for k in ("mean_curvature", "gradient_R", "gradient_S")}))

    g = realize(SurfaceSpec("graph-bump", {"chart": "annulus"}, (128, 64)))
    f = build_frames(g)
    try:
        residues.solve_potentials(g, f, residues.residues(g, f, 0.67))
        tripped = False
    except CurlDefectError:
        tripped = True
    out.append(_check("residues.graph_bump_guard_trips", float(tripped), 1.0, tripped))
    return out


def residue_observations() -> list:
    """Measured values reported without a pass/fail verdict."""
    g = annulus_grid(SurfaceSpec("hopf-torus", {"k0": 0.0, "s_length": 2.0}, (128, 64)))
    rs = residues.residues(g, build_frames(g), float(np.exp(1.0)))
    return [{"name": "residues.clifford_hopf_c1_norm", "value": float(np.linalg.norm(rs.c1.coef)),
             "note": "c1 of the k = 0 Hopf torus (Clifford torus) on a fiber"}]


# ---------------------------------------------------------------------------
# elastica, Lorentz, collar


def elastica_checks() -> list:
    prof = elastica.solve_elastica(0.5, 0.0, 20.0, 1e-3)
    drift = elastica.first_integral_drift(prof)
    order = elastica.step_halving_order(0.5, 0.0, 20.0, 0.05)["order"]
    sol = elastica.build_solution(0.5, 0.0, 2.0, 5e-4)
    horiz = elastica.horizontality(sol.lift)
    proj = float(np.max(np.linalg.norm(elastica.hopf_project(sol.lift.q) - sol.curve.gamma, axis=-1)))
    return [
        _check("elastica.first_integral_drift", drift, 1e-8, drift < 1e-8),
        _check("elastica.step_halving_order", order, 3.8, order >= 3.8),
        _check("elastica.horizontality", horiz, 1e-8, horiz < 1e-8),
        _check("elastica.projection", proj, 1e-8, proj < 1e-8),
    ]


def lorentz_checks() -> list:
    rng = np.random.default_rng(SEED)
    worst = 0.0
    for _ in range(20):
        s = lorentz.MeasuredSample(rng.random(200), rng.random(200))
        for p in (1.5, 2.0, 3.0):
            worst = max(worst, abs(lorentz.lorentz_norm(s, p, p) - lorentz.lp_norm(s, p)) / lorentz.lp_norm(s, p))
    weak = lorentz.inverse_radius_weak_l2()
    growth = lorentz.inverse_radius_log_growth()
    duality = [lorentz.duality_bound(f, r) for f in (lambda x: 1.0 + 0 * x, lambda x: 1.0 / x, lambda x: 0 * x)
          for r in (1e-1, 1e-2)]
    return [
        _check("lorentz.lpp_equals_lp", worst, 1e-10, worst < 1e-10),
        _check("lorentz.inverse_radius_weak_l2_drift", weak["drift"], 0.05, weak["stable"], norm=weak["norms"][-1]),
        _check("lorentz.inverse_radius_log_growth_band", growth["band"], 10.0, growth["within_band"]),
        _check("lorentz.duality_bound_holds", float(all(x["holds"] for x in duality)), 1.0,
               all(x["holds"] for x in duality)),
    ]


def collar_checks() -> list:
    gl = max(abs(collar.geodesic_length(collar.CollarChart(l)) - l) for l in (1.0, 0.1, 0.01))
    ks = []
    for n in (129, 257):
        _, K = collar.gaussian_curvature(collar.CollarChart(0.5), n)
        ks.append(float(np.max(np.abs(K + 1))))
    conf = max(collar.torus_chart_conformal_defect(l, method=m) for l in (1.0, 0.1) for m in ("exact", "fd"))
    return [
        _check("collar.geodesic_length", gl, 1e-12, gl < 1e-12),
        _check("collar.curvature_order", convergence_order(*ks), 1.8, convergence_order(*ks) >= 1.8, error=ks[-1]),
        _check("collar.torus_chart_conformal", conf, 1e-10, conf < 1e-10),
    ]


_SUITE_FUNCS = {
    "multivec": multivec_checks,
    "immersion": immersion_checks,
    "residues": residue_checks,
    "elastica": elastica_checks,
    "lorentz": lorentz_checks,
    "collar": collar_checks,
}


def run_suite(suite: str = "all", threads: int = 1) -> dict:
    """Run one suite or all of them; results are ordered independently of ``threads``."""
    names = list(SUITES) if suite == "all" else [suite]
    for n in names:
        if n not in _SUITE_FUNCS:
            raise ValueError(f"unknown suite {n!r}")
    jobs = [_SUITE_FUNCS[n] for n in names]
    if "residues" in names:
        jobs.append(residue_observations)
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(lambda f: f(), jobs))
    else:
        results = [f() for f in jobs]
    checks = [c for r in results[: len(names)] for c in r]
    observations = [c for r in results[len(names):] for c in r]
    return {
        "suites": names,
        "checks": checks,
        "observations": observations,
        "passed": sum(c["passed"] for c in checks),
        "failed": sum(not c["passed"] for c in checks),
        "sign_convention": STAR_SIGN,
    }
