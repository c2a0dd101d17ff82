import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from quatell.algebra import (
    E1,
    E2,
    E3,
    DomainError,
    MultiIndex,
    Quat,
    SingularMatrix,
    bilinear,
    det4,
    indices_upto,
    mat4_invert,
    qinv,
    qmul,
    sigma,
)

finite = st.floats(-10, 10, allow_nan=False, allow_infinity=False)
quats = st.builds(Quat, finite, finite, finite, finite)


def test_basis_products():
    assert E1 * E2 == E3
    assert E2 * E3 == E1
    assert E1 * E1 == Quat(-1)
    assert E1 * E2 * E3 == Quat(-1)


def test_small_products():
    q = Quat(1, 2, 3, 4)
    assert q * 1 == q
    assert (Quat(1, 1) * Quat(1, -1)) == Quat(2)


def test_inverse_examples():
    assert E1.inv() == -E1
    assert Quat(2).inv() == Quat(0.5)
    assert (Quat(1, 1) * Quat(1, 1).inv()).isclose(Quat(1))
    assert Quat(1, 1).inv().isclose(Quat(0.5, -0.5))


def test_inverse_of_zero_raises():
    with pytest.raises(DomainError):
        Quat().inv()
    with pytest.raises(DomainError):
        qinv(np.zeros(4))


@given(quats, quats, quats)
def test_associative(a, b, c):
    assert ((a * b) * c).isclose(a * (b * c), tol=1e-9 * (1 + a.abs() * b.abs() * c.abs()))


@given(quats, quats)
def test_norm_multiplicative_and_conj_antihomomorphic(a, b):
    scale = 1 + (a.norm() * b.norm())
    assert math.isclose((a * b).norm(), a.norm() * b.norm(), rel_tol=1e-9, abs_tol=1e-9 * scale)
    assert (a * b).conj().isclose(b.conj() * a.conj(), tol=1e-9 * scale)


def test_vectorised_matches_scalar(rng):
    a = rng.normal(size=(10, 4))
    b = rng.normal(size=(10, 4))
    out = qmul(a, b)
    for i in range(10):
        assert np.allclose(out[i], (Quat(*a[i]) * Quat(*b[i])).array)


def test_sigma_order_and_counts():
    assert sigma(0) == (MultiIndex(0, 0, 0),)
    assert list(sigma(1)) == [(0, 0, 1), (0, 1, 0), (1, 0, 0)]
    for n in range(8):
        assert len(sigma(n)) == (n + 1) * (n + 2) // 2
    assert len(indices_upto(3)) == 1 + 3 + 6 + 10


def test_multiindex_partial_order():
    assert MultiIndex(1, 0, 0) <= MultiIndex(1, 1, 0)
    assert not MultiIndex(2, 0, 0) <= MultiIndex(1, 1, 0)
    assert MultiIndex(2, 1, 0).factorial() == 2


def test_mat4_invert_examples():
    inv, d = mat4_invert(np.eye(4))
    assert np.allclose(inv, np.eye(4)) and d == 1
    m = np.diag([1, math.sqrt(2), math.sqrt(3), math.sqrt(5)])
    inv, d = mat4_invert(m)
    assert np.allclose(inv, np.diag(1 / np.diag(m)))
    assert math.isclose(d, math.sqrt(30))
    h = [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 1, 0], [0.5, 0.5, 0.5, 0.5]]
    assert math.isclose(det4(h), 0.5)
    with pytest.raises(SingularMatrix):
        mat4_invert(np.ones((4, 4)))


def test_bilinear_respects_order():
    u = np.array([E1.array, 0 * E1.array, 0 * E1.array, 0 * E1.array])
    v = np.array([0 * E1.array, E2.array, 0 * E1.array, 0 * E1.array])
    m = np.zeros((4, 4, 4))
    m[0, 1] = Quat(1).array
    assert np.allclose(bilinear(u, m, v), E3.array)
    assert np.allclose(bilinear(v[[1, 0, 2, 3]], m, u[[1, 0, 2, 3]]), -E3.array)
