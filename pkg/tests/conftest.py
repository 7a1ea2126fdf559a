import os

import numpy as np
import pytest

from models.curve import CurvePoint, MavarCurve
from models.generator import AmplitudeMode, GeneratorSpec
from modules.mavar import confidence_width
from modules.synth import gen_lrd


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: long-running acceptance runs (deselect with -m 'not slow')")


@pytest.fixture
def rng():
    """Seeded generator for test data"""
    return np.random.default_rng(20240601)


@pytest.fixture
def write_lines(tmp_path):
    """Write text lines to a file under tmp_path and return its path"""
    def _write(name, lines, newline="\n"):
        path = tmp_path / name
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(newline.join(lines) + newline)
        return str(path)
    return _write


@pytest.fixture
def lrd_series():
    """Synthetic LRD rate series factory"""
    def _make(hurst=0.8, n=4096, seed=1, tau0=1.0, mode=AmplitudeMode.RAYLEIGH, normalize=True):
        spec = GeneratorSpec(n=n, hurst=hurst, seed=seed, mode=mode, normalize=normalize)
        return gen_lrd(spec, tau0)
    return _make


@pytest.fixture
def make_curve():
    """MavarCurve from explicit n values and MAVAR values"""
    def _make(n_values, values, n_samples, tau0=1.0):
        points = [
            CurvePoint(n=int(n), tau=int(n) * tau0, value=float(v), m=n_samples - 3 * int(n) + 1,
                       conf=confidence_width(n_samples, int(n)))
            for n, v in zip(n_values, values)
        ]
        return MavarCurve(points=points, source_label="synthetic", n_samples=n_samples, tau0=tau0)
    return _make


@pytest.fixture
def out_dir(tmp_path):
    path = tmp_path / "out"
    os.makedirs(path, exist_ok=True)
    return str(path)
