import json

import numpy as np
import pytest

from wrl.catalogue import (
    SURFACE_KINDS,
    MobiusMap,
    SurfaceSpec,
    apply_mobius,
    extract_annulus,
    random_mobius,
    realize,
    stereographic,
)
from wrl.immersion import build_frames, willmore_energy


@pytest.mark.parametrize("kind", SURFACE_KINDS)
def test_every_kind_realizes(kind):
    g = realize(SurfaceSpec(kind, {}, (32, 32)))
    assert g.points.shape[:2] == (32, 32)
    assert g.metadata["kind"] == kind
    assert np.all(np.isfinite(g.points))


@pytest.mark.parametrize(
    "doc",
    [{"kind": "blob"}, {"kind": "sphere", "resolution": [8, 8]}, {"kind": "sphere", "schema": "7"},
     {"kind": "sphere", "params": [1]}, {"params": {}}, [1, 2]],
)
def test_spec_rejects(doc):
    with pytest.raises(ValueError):
        SurfaceSpec.from_dict(doc)


def test_spec_roundtrip():
    s = SurfaceSpec("hopf-torus", {"k0": 0.5}, (64, 32))
    t = SurfaceSpec.from_json(json.dumps(s.to_dict()))
    assert t == s


@pytest.mark.parametrize(
    "steps",
    [[{"shear": 1}], [{"dilation": -1.0}], [{"rotation": [[1, 1, 0], [0, 1, 0], [0, 0, 1]]}],
     [{"translation": [0, 0, 0], "dilation": 2}]],
)
def test_mobius_rejects(steps):
    with pytest.raises(ValueError):
        MobiusMap(steps)


def test_mobius_roundtrip_and_composition():
    g = realize(SurfaceSpec("catenoid", {}, (32, 16)))
    mob = MobiusMap([{"translation": [1, 0, 0]}, {"dilation": 2.0}])
    assert MobiusMap.from_dict(json.loads(json.dumps(mob.to_dict()))).to_dict() == mob.to_dict()
    h = apply_mobius(mob, g)
    assert np.allclose(h.points, 2 * (g.points + [1, 0, 0]))
    assert np.allclose(h.tangents[0], 2 * g.tangents[0])


def test_inversion_is_involution_with_exact_differential():
    g = realize(SurfaceSpec("catenoid", {"chart": "cylinder"}, (64, 32)))
    inv = MobiusMap([{"inversion": [0.2, 0.1, 3.0]}])
    back = apply_mobius(inv, apply_mobius(inv, g))
    assert np.max(np.abs(back.points - g.points)) < 1e-12
    assert np.max(np.abs(back.tangents[1] - g.tangents[1])) < 1e-12


def test_inversion_center_on_surface_rejected():
    g = realize(SurfaceSpec("sphere", {}, (32, 16)))
    with pytest.raises(ValueError):
        apply_mobius(MobiusMap([{"inversion": g.points[10, 3]}]), g)
    # the poles are completion points even though they are not sampled
    with pytest.raises(ValueError):
        apply_mobius(MobiusMap([{"inversion": [0, 0, 1.0]}]), g)


def test_mobius_dimension_mismatch():
    g = realize(SurfaceSpec("catenoid", {}, (32, 16)))
    with pytest.raises(ValueError):
        apply_mobius(MobiusMap([{"translation": [1, 0, 0, 0]}]), g)


def test_random_mobius_is_deterministic():
    g = realize(SurfaceSpec("sphere", {}, (32, 16)))
    a = random_mobius(np.random.default_rng(3), g).to_dict()
    b = random_mobius(np.random.default_rng(3), g).to_dict()
    assert a == b
    assert "inversion" in a["steps"][0]


def test_mobius_preserves_sphere_energy(rng):
    g = realize(SurfaceSpec("sphere", {}, (256, 128)))
    W0 = willmore_energy(g, build_frames(g))
    for _ in range(3):
        h = apply_mobius(random_mobius(rng, g), g)
        assert "caps_dropped" in h.metadata
        assert willmore_energy(h, build_frames(h)) == pytest.approx(W0, rel=5e-3)


def test_stereographic_differential():
    rng = np.random.default_rng(0)
    x = rng.normal(size=(20, 4))
    x /= np.linalg.norm(x, axis=1, keepdims=True)
    t = rng.normal(size=(20, 4))
    t -= np.sum(t * x, 1, keepdims=True) * x
    h = 1e-6
    y, (ty,) = stereographic(x, (t,))
    yp, _ = stereographic(x + h * t)
    ym, _ = stereographic(x - h * t)
    assert np.max(np.abs((yp - ym) / (2 * h) - ty)) < 1e-6


@pytest.mark.parametrize("angle", [0.0, 0.4, 1.3])
def test_clifford_r3_energy_independent_of_rotation(angle):
    g = realize(SurfaceSpec("clifford-torus-R3", {"rotation_angle": angle}, (128, 128)))
    assert willmore_energy(g, build_frames(g)) == pytest.approx(2 * np.pi**2, rel=5e-3)


def test_catenoid_annulus_matches_cylinder():
    a = realize(SurfaceSpec("catenoid", {}, (64, 32)))
    c = realize(SurfaceSpec("catenoid", {"chart": "cylinder"}, (64, 32)))
    assert np.max(np.abs(a.points - c.points)) < 1e-12
    assert a.domain.kind == "annulus" and np.allclose(a.domain.u_range, (np.exp(-2), np.exp(2)))


def test_extract_annulus():
    g = realize(SurfaceSpec("sphere", {}, (129, 32)))
    sub = extract_annulus(g, np.exp(-2.0), np.exp(2.0))
    s = g.domain.s
    keep = (s >= -2 - 1e-9) & (s <= 2 + 1e-9)
    assert sub.domain.nu == keep.sum()
    assert np.array_equal(sub.points, g.points[keep])
    assert "caps" not in sub.metadata
    with pytest.raises(ValueError):
        extract_annulus(g, np.exp(-7.0), 1.0)
    with pytest.raises(ValueError):
        extract_annulus(g, 1.0, 1.01)
    with pytest.raises(ValueError):
        extract_annulus(realize(SurfaceSpec("clifford-torus-R4", {}, (32, 32))), 0.5, 1.0)


@pytest.mark.parametrize("k0", [0.0, 0.5])
def test_hopf_torus_lies_on_s3(k0):
    g = realize(SurfaceSpec("hopf-torus", {"k0": k0, "s_length": 2.0}, (64, 32)))
    assert np.max(np.abs(np.linalg.norm(g.points, axis=-1) - 1)) < 1e-10
