import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from wrl import lorentz as L

samples = st.integers(1, 40).flatmap(lambda n: st.tuples(
    st.lists(st.floats(0, 100), min_size=n, max_size=n),
    st.lists(st.floats(0.01, 10), min_size=n, max_size=n)))


@settings(max_examples=60, deadline=None)
@given(samples, st.sampled_from([1.5, 2.0, 3.0, 5.0]))
def test_lpp_equals_lp(data, p):
    s = L.MeasuredSample(*data)
    lp = L.lp_norm(s, p)
    assert L.lorentz_norm(s, p, p) == pytest.approx(lp, rel=1e-10, abs=1e-300)


@settings(max_examples=40, deadline=None)
@given(samples, st.randoms(use_true_random=False))
def test_rearrangement_invariance(data, rnd):
    v, w = data
    perm = list(range(len(v)))
    rnd.shuffle(perm)
    a = L.MeasuredSample(v, w)
    b = L.MeasuredSample(np.array(v)[perm], np.array(w)[perm])
    for q in (1.0, 2.0, np.inf):
        assert L.lorentz_norm(a, 2.0, q) == pytest.approx(L.lorentz_norm(b, 2.0, q), rel=1e-12)


@settings(max_examples=40, deadline=None)
@given(samples, st.floats(0.1, 10))
def test_homogeneity(data, lam):
    v, w = data
    a = L.MeasuredSample(v, w)
    b = L.MeasuredSample(np.array(v) * lam, w)
    assert L.lorentz_norm(b, 2.0, 1.0) == pytest.approx(lam * L.lorentz_norm(a, 2.0, 1.0), rel=1e-10, abs=1e-300)


def test_constant_function():
    # f = 1 on a set of measure A: ||f||_{p,q} = (p/q)^{1/q} A^{1/p}
    s = L.MeasuredSample([1.0, 1.0], [0.5, 1.5])
    assert L.lorentz_norm(s, 2.0, 1.0) == pytest.approx(2 * np.sqrt(2.0))
    assert L.lorentz_norm(s, 2.0, np.inf) == pytest.approx(np.sqrt(2.0))


def test_nesting_of_q():
    rng = np.random.default_rng(0)
    s = L.MeasuredSample(rng.random(100), rng.random(100))
    vals = [L.lorentz_norm(s, 2.0, q) for q in (1.0, 2.0, 4.0, np.inf)]
    # ||f||_{p,q2} <= C ||f||_{p,q1} for q1 < q2; with this normalization the sequence decreases
    assert all(a >= b for a, b in zip(vals, vals[1:]))


@pytest.mark.parametrize("p, q", [(1.0, 2.0), (0.5, 1.0), (np.inf, 1.0), (2.0, 0.5)])
def test_invalid_exponents(p, q):
    with pytest.raises(ValueError):
        L.lorentz_norm(L.MeasuredSample([1.0], [1.0]), p, q)


@pytest.mark.parametrize("values, weights, area", [([1, 2], [1], None), ([1], [-1], None),
                                                    ([np.inf], [1], None), ([1, 1], [1, 1], 3.0)])
def test_sample_validation(values, weights, area):
    with pytest.raises(ValueError):
        L.MeasuredSample(values, weights, area)


def test_zero_function():
    assert L.lorentz_norm(L.MeasuredSample([0, 0], [1, 1]), 2, 1) == 0.0


def test_annulus_rings_areas():
    for spacing in ("linear", "log"):
        edges, areas = L.annulus_rings(0.1, 1.0, 50, spacing)
        assert np.sum(areas) == pytest.approx(np.pi * 0.99)
    with pytest.raises(ValueError):
        L.annulus_rings(0.0, 1.0, 10, "log")


def test_inverse_radius_in_weak_l2():
    out = L.inverse_radius_weak_l2()
    assert out["stable"]
    assert out["norms"][-1] == pytest.approx(np.sqrt(np.pi), rel=1e-12)


def test_faster_singularity_leaves_weak_l2():
    out = L.inverse_radius_weak_l2(exponent=1.5)
    assert not out["stable"]


def test_inverse_radius_log_growth_and_closed_form():
    out = L.inverse_radius_log_growth()
    assert out["within_band"]
    for row in out["rows"]:
        assert row["rel_err"] < 1e-3
    with pytest.raises(ValueError):
        L.inverse_radius_log_growth([0.5])


@pytest.mark.parametrize("f", [lambda x: 1.0 + 0 * x, lambda x: 1.0 / x, lambda x: np.log(1 / x), lambda x: 0 * x])
@pytest.mark.parametrize("r", [1e-1, 1e-2, 1e-3])
def test_duality_bound(f, r):
    out = L.duality_bound(f, r)
    assert out["holds"]
    assert out["lhs"] <= out["rhs"]
