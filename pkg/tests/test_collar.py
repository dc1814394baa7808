import numpy as np
import pytest

from wrl import collar as C
from wrl.numerics import convergence_order


@pytest.mark.parametrize("l", [1.5, 1.0, 0.1, 0.01, 1e-4])
def test_geodesic_length(l):
    assert abs(C.geodesic_length(C.CollarChart(l)) - l) < 1e-12


@pytest.mark.parametrize("l", [0.0, -1.0, C.COLLAR_MAX_LENGTH, 5.0])
def test_collar_length_range(l):
    with pytest.raises(ValueError):
        C.CollarChart(l)


def test_core_geodesic_is_shortest_circle():
    chart = C.CollarChart(0.3)
    t, lengths = C.circle_lengths(chart)
    assert t[np.argmin(lengths)] == pytest.approx(chart.geodesic_t, rel=1e-3)
    assert np.min(lengths) == pytest.approx(0.3, rel=1e-6)
    t0, t1 = chart.t_range
    assert t0 < chart.geodesic_t < t1
    assert chart.geodesic_t == pytest.approx(0.5 * (t0 + t1))


def test_metric_factor_range():
    chart = C.CollarChart(0.5)
    t0, t1 = chart.t_range
    with pytest.raises(ValueError):
        C.metric_factor(chart, t0 - 1.0)
    with pytest.raises(ValueError):
        C.metric_factor(chart, [t0, t1 + 1.0])
    # symmetric about the core geodesic
    assert C.metric_factor(chart, t0) == pytest.approx(C.metric_factor(chart, t1), rel=1e-12)


@pytest.mark.parametrize("l", [1.0, 0.5, 0.1])
def test_curvature_minus_one(l):
    errs = []
    for n in (129, 257):
        _, K = C.gaussian_curvature(C.CollarChart(l), n)
        errs.append(np.max(np.abs(K + 1)))
    assert errs[1] < 0.05
    assert convergence_order(*errs) > 1.8


@pytest.mark.parametrize("l", [1.0, 0.2, 0.05])
def test_cylinder_to_annulus(l):
    chart = C.CollarChart(l)
    out = C.cylinder_to_annulus(chart)
    assert out["inner_radius"] == pytest.approx(np.exp(-1 / l))
    assert out["modulus"] == pytest.approx(1 / (2 * np.pi * l))
    assert out["geodesic_radius_mapped"] == pytest.approx(out["geodesic_radius"], rel=1e-12)
    t0, t1 = chart.t_range
    assert C.annulus_radius(chart, t1) == pytest.approx(out["inner_radius"])
    assert C.annulus_radius(chart, t0) == pytest.approx(1.0)


@pytest.mark.parametrize("l", [2.0, 1.0, 0.1])
@pytest.mark.parametrize("method", ["exact", "fd"])
def test_torus_chart_conformal(l, method):
    assert C.torus_chart_conformal_defect(l, method=method) < 1e-10


def test_torus_chart_rejects():
    with pytest.raises(ValueError):
        C.torus_cylinder_chart(-1.0, 0.0, 0.5)
    with pytest.raises(ValueError):
        C.torus_cylinder_chart(1.0, 0.0, 0.0)
