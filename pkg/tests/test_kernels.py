import os
import subprocess
import sys

import numpy as np
import pytest

from quatell import _fallback, kernels
from quatell.lattice import lipschitz

compiled = pytest.importorskip("quatell._kernels")


@pytest.fixture(scope="module")
def data():
    pts = np.concatenate(list(lipschitz().half_chunks(6.0)))
    qs = np.random.default_rng(3).uniform(-0.5, 0.5, size=(7, 4))
    return pts, qs


@pytest.mark.parametrize("taylor,grad", [(1, False), (3, False), (1, True)])
def test_backends_agree(data, taylor, grad):
    pts, qs = data
    a = _fallback.pair_sum(pts, qs, taylor, grad)
    b = compiled.pair_sum(pts, qs, taylor, grad)
    assert np.allclose(a[0], b[0], rtol=1e-12, atol=1e-12)
    if grad:
        assert np.allclose(a[1], b[1], rtol=1e-11, atol=1e-11)


def test_gradient_requires_taylor_one(data):
    pts, qs = data
    for fn in (_fallback.pair_sum, compiled.pair_sum):
        with pytest.raises(ValueError):
            fn(pts, qs, 3, True)


def test_empty_inputs():
    v, g = _fallback.pair_sum(np.zeros((0, 4)), np.zeros((2, 4)), 1, True)
    assert v.shape == (2, 4) and np.all(v == 0) and g.shape == (2, 3, 4)


def test_pair_term_matches_definition(data):
    pts, qs = data
    q = qs[:1]
    lam = pts[:5]
    g = lambda p: p * np.array([1, -1, -1, -1]) / ((p**2).sum(-1) ** 2)[..., None]
    eps = 1e-4
    c1 = (g(lam + eps * q) - g(lam - eps * q)) / (2 * eps)
    expect = (g(q + lam) + g(q - lam) - 2 * c1).sum(axis=0)
    assert np.allclose(_fallback.pair_sum(lam, q, 1)[0][0], expect, atol=1e-6)


def test_backend_selection():
    assert kernels.BACKEND == "cython"
    env = dict(os.environ, QUATELL_PURE_PYTHON="1")
    out = subprocess.run(
        [sys.executable, "-c", "import quatell.kernels as k; print(k.BACKEND)"],
        env=env, capture_output=True, text=True, check=True,
    )
    assert out.stdout.strip() == "python"
