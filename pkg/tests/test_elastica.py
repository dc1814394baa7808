import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from wrl import elastica as E


@settings(max_examples=30, deadline=None)
@given(st.lists(st.floats(-2, 2), min_size=12, max_size=12))
def test_quaternion_product_is_multiplicative(vals):
    a, b, c = np.array(vals).reshape(3, 4)
    assert np.allclose(E.qmul(E.qmul(a, b), c), E.qmul(a, E.qmul(b, c)), atol=1e-9)
    assert np.linalg.norm(E.qmul(a, b)) == pytest.approx(np.linalg.norm(a) * np.linalg.norm(b), abs=1e-9)


def test_left_i_matrix_matches_product():
    q = np.random.default_rng(0).normal(size=(10, 4))
    assert np.allclose(E.qmul([0, 1, 0, 0], q), q @ E.left_i_matrix().T)


def test_hopf_map_conventions():
    assert np.allclose(E.hopf_project(np.array([1.0, 0, 0, 0])), [0, 0, 1])
    q = np.random.default_rng(1).normal(size=(20, 4))
    q /= np.linalg.norm(q, axis=1, keepdims=True)
    p = E.hopf_project(q)
    assert np.allclose(np.linalg.norm(p, axis=1), 1)
    # fibers are left i-orbits
    assert np.allclose(E.hopf_project(E.fiber_point(q, 0.7)), p)
    with pytest.raises(ValueError):
        E.hopf_project(2 * q)


@pytest.mark.parametrize("k0, dk0", [(0.5, 0.0), (1.0, 0.3), (-0.7, 0.1)])
def test_first_integral_conserved(k0, dk0):
    prof = E.solve_elastica(k0, dk0, 20.0, 1e-3)
    assert E.first_integral_drift(prof) < 1e-8


def test_zero_curvature_is_great_circle():
    sol = E.build_solution(0.0, 0.0, np.pi, np.pi / 1000)
    assert np.max(np.abs(sol.k)) == 0.0
    # speed-2 great circle closes after s = pi
    assert np.allclose(sol.curve.gamma[-1], sol.curve.gamma[0], atol=1e-10)
    assert np.max(np.abs(sol.curve.gamma[:, 1])) < 1e-12


def test_step_halving_order():
    out = E.step_halving_order(0.5, 0.0, 20.0, 0.05)
    assert out["order"] > 3.8
    assert out["diff_fine"] < out["diff_coarse"]


@pytest.mark.parametrize("length, ds", [(1.0, 0.3), (-1.0, 0.1), (1.0, 0.0)])
def test_solver_rejects_bad_steps(length, ds):
    with pytest.raises(ValueError):
        E.solve_elastica(0.5, 0.0, length, ds)


def test_curve_has_prescribed_geodesic_curvature():
    sol = E.build_solution(0.8, 0.2, 3.0, 1e-3)
    c = sol.curve
    assert np.max(np.abs(np.linalg.norm(c.gamma, axis=1) - 1)) < 1e-10
    assert np.max(np.abs(np.linalg.norm(c.dgamma, axis=1) - 2)) < 1e-10
    assert np.max(np.abs(E.geodesic_curvature(c) - sol.k)) < 1e-9


def test_hopf_lift_horizontal_and_projects():
    sol = E.build_solution(0.5, 0.0, 2.0, 5e-4)
    assert E.horizontality(sol.lift) < 1e-8
    assert np.max(np.linalg.norm(E.hopf_project(sol.lift.q) - sol.curve.gamma, axis=1)) < 1e-8
    assert np.allclose(np.linalg.norm(sol.lift.dq, axis=1), 1, atol=1e-8)


def test_solution_frame_and_serialization():
    sol = E.build_solution(0.5, 0.0, 1.0, 1e-2)
    fr = sol.frame(10)
    assert set(fr) == {"Phi", "dPhi_s", "dPhi_theta", "n", "k", "dk_s"}
    # conformal: |Phi_s| = |Phi_theta| = 1, orthogonal
    assert np.linalg.norm(fr["dPhi_s"]) == pytest.approx(1, abs=1e-9)
    assert abs(fr["dPhi_s"] @ fr["dPhi_theta"]) < 1e-9
    doc = sol.to_dict()
    assert len(doc["s"]) == len(doc["k"]) == len(doc["lift"]) == 101
