import math

import numpy as np
import pytest

from quatell.algebra import E1, E2, E3, Quat, qmul
from quatell.lattice import (
    DegreeTooSmall,
    Lattice,
    NonUnit,
    NotIntegral,
    OrderContext,
    ParseError,
    SingularLattice,
    coset_reps,
    eisenstein,
    homothety,
    lambda_hat,
    lattice_new,
    lattice_sum,
    load_lattice_spec,
    shells,
    smooth_weight,
    tail_bound,
    u_matrix,
)
from quatell.regular import kernel


def random_lattice(rng):
    while True:
        m = rng.normal(size=(4, 4))
        if abs(np.linalg.det(m)) > 0.2:
            return lattice_new(m.ravel())


def test_identity_lattice_data():
    lat = lattice_new(np.eye(4).ravel())
    assert np.allclose(lambda_hat(lat), np.eye(4))
    assert lat.r_min == 1.0
    assert np.allclose(lat.q_entry(2, 3), E3.array)
    assert np.allclose(lat.q_entry(2, 4), -E2.array)
    assert np.allclose(lat.q_entry(3, 4), E1.array)
    for j in (2, 3, 4):
        assert np.allclose(lat.q_entry(1, j), 0)
    q = lat.gram_q
    assert np.allclose(q[0], [np.zeros(4), E1.array, E2.array, E3.array])
    assert np.allclose(q, -q.transpose(1, 0, 2))


def test_diag_and_hurwitz(diag235, hurwitz_lat):
    assert math.isclose(diag235.det, math.sqrt(30))
    assert math.isclose(diag235.r_min, 1.0)
    assert math.isclose(hurwitz_lat.det, 0.5)
    assert math.isclose(hurwitz_lat.r_min, 1.0)


def test_lambda_hat_contractions(rng):
    for _ in range(10):
        lat = random_lattice(rng)
        lh = lat.lambda_hat
        for alpha in range(4):
            s = (lh * lat.matrix[:, alpha, None]).sum(axis=0)
            expect = np.zeros(4)
            expect[alpha] = lat.det
            assert np.allclose(s, expect, atol=1e-10)
        assert np.allclose(lat.gram_q[..., 0], 0)


def test_negative_determinant_is_swapped():
    m = np.eye(4)[[1, 0, 2, 3]]
    lat = lattice_new(m.ravel())
    assert lat.swapped and lat.det > 0
    with pytest.raises(SingularLattice):
        lattice_new(np.ones(16))


def test_shell_counts():
    lat = lattice_new(np.eye(4).ravel())
    assert len(shells(lat, 1)) == 8
    assert len(shells(lat, 1.5)) == 32
    pts = shells(lat, 2.1)
    assert np.allclose(pts[0::2], -pts[1::2])
    norms = (pts**2).sum(axis=1)
    assert np.all(np.diff(norms[0::2]) >= -1e-12)


def test_homothety(rng):
    lat = random_lattice(rng)
    same = homothety(lat, Quat(1), Quat(1))
    assert np.allclose(same.matrix, lat.matrix)
    a = Quat(*rng.normal(size=4))
    a = a * (1 / a.abs())
    b = Quat(0, 1)
    moved = homothety(lat, a, b)
    assert math.isclose(moved.det, lat.det, rel_tol=1e-12)
    with pytest.raises(NonUnit):
        homothety(lat, Quat(2), Quat(1))


def test_eisenstein_parity_and_degree(z4):
    assert eisenstein(z4, (1, 1, 0), 10).value == Quat()
    assert eisenstein(z4, (2, 2, 0), 10).value == Quat()
    with pytest.raises(DegreeTooSmall):
        eisenstein(z4, (1, 0, 0), 10)


def test_eisenstein_methods_agree(z4):
    smooth = eisenstein(z4, (2, 1, 0), 20)
    ball = eisenstein(z4, (2, 1, 0), 20, method="ball")
    rich = eisenstein(z4, (2, 1, 0), 20, method="richardson")
    assert (smooth.value - ball.value).abs() <= ball.bound
    assert (smooth.value - rich.value).abs() <= rich.bound
    assert smooth.estimate < 1e-5


def test_eisenstein_homothety(z4, rng):
    a = Quat(*rng.normal(size=4))
    a = a * (1 / a.abs())
    b = Quat(*rng.normal(size=4))
    b = b * (1 / b.abs())
    moved = homothety(z4, a.inv(), b.inv())  # a^{-1} L b
    ker = kernel((2, 1, 0))
    lhs = qmul(b.array, lattice_sum(moved, ker, 12.0))
    rhs = lattice_sum(z4, lambda p: qmul(b.array[None], ker(qmul(qmul(a.inv().array[None], p), b.array[None]))), 12.0)
    assert np.abs(lhs - rhs).max() < 1e-6


def test_smooth_weight_and_tail_bound(z4):
    s = np.array([0.0, 0.4, 0.5, 0.75, 1.0, 1.2])
    w = smooth_weight(s)
    assert w[0] == w[1] == w[2] == 1.0 and w[-1] == w[-2] == 0.0
    assert math.isclose(w[3], 0.5)
    assert tail_bound(z4, 3, 40) < tail_bound(z4, 3, 20)


def test_u_matrix_and_cosets(hurwitz_ctx):
    assert np.array_equal(u_matrix(hurwitz_ctx, Quat(1)), np.eye(4, dtype=int))
    u = u_matrix(hurwitz_ctx, Quat(1, 1))
    assert round(np.linalg.det(u)) == 4
    reps = coset_reps(hurwitz_ctx, Quat(1, 1))
    assert len(reps) == 4 and reps[0] == Quat()
    assert coset_reps(hurwitz_ctx, Quat(1)) == [Quat()]
    assert len(hurwitz_ctx.units()) == 24


def test_u_matrix_multiplicative(hurwitz_ctx):
    els = [Quat(1), E1, Quat(0.5, 0.5, 0.5, 0.5), Quat(1, 1)]
    for a in els:
        for b in els:
            ab = u_matrix(hurwitz_ctx, a * b)
            assert np.array_equal(ab, u_matrix(hurwitz_ctx, b) @ u_matrix(hurwitz_ctx, a))


def test_not_integral(z4_ctx):
    with pytest.raises(NotIntegral):
        u_matrix(z4_ctx, Quat(0.5, 0.5, 0.5, 0.5))


def test_load_lattice_spec():
    assert isinstance(load_lattice_spec("preset:lipschitz"), OrderContext)
    h = load_lattice_spec("1,0,0,0, 0,1,0,0, 0,0,1,0, .5,.5,.5,.5")
    assert isinstance(h, Lattice) and math.isclose(h.det, 0.5)
    d = load_lattice_spec("diag:2,3,5")
    assert math.isclose(d.det, math.sqrt(30))
    with pytest.raises(ParseError):
        load_lattice_spec("diag:2,3")
    with pytest.raises(ParseError):
        load_lattice_spec("preset:nope")
    with pytest.raises(ParseError) as err:
        load_lattice_spec("1,2,x")
    assert err.value.position >= 0
