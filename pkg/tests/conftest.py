import numpy as np
import pytest

from wrl.catalogue import SurfaceSpec
from wrl.immersion import build_frames
from wrl.verification import annulus_grid


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def annulus_with_frames(kind, params=None, resolution=(128, 64)):
    g = annulus_grid(SurfaceSpec(kind, params or {}, resolution))
    return g, build_frames(g)


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if not RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(RESULTS):
        ok, detail = RESULTS[n]
        terminalreporter.write_line(f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
