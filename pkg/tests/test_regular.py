import numpy as np
import pytest

from quatell.algebra import E1, E2, MultiIndex, Quat, sigma
from quatell.regular import (
    DegreeTooLarge,
    HomogeneousRegular,
    bound_constant,
    d_l,
    dbar_l,
    dbar_r,
    eval_G,
    eval_P,
    eval_P_bruteforce,
    eval_z,
    fueter_table,
    kelvin_inversion,
    kernel,
    partial_nu,
    pole_order,
)


def test_z_examples():
    assert eval_z(1, Quat(1)) == E1
    assert eval_z(1, E1) == Quat(-1)
    assert eval_z(2, Quat(3, 0, 4, 0)) == Quat(-4, 0, 3, 0)


def test_P_examples():
    q = Quat(0.3, -1, 2, 0.5)
    assert eval_P((0, 0, 0), q) == Quat(1)
    assert eval_P((1, 1, 0), E1 + E2).isclose(Quat(1))
    assert eval_P((2, 0, 0), Quat(1, 1)).isclose(-E1)


def test_P_recursion_matches_permutation_sum(rng):
    for _ in range(5):
        q = Quat(*rng.normal(size=4))
        for n in range(5):
            for nu in sigma(n):
                assert eval_P(nu, q).isclose(eval_P_bruteforce(nu, q), tol=1e-11)


def test_P_on_pure_quaternions(rng):
    x = rng.normal(size=3)
    q = Quat(0, *x)
    for nu in sigma(4):
        expect = (-1) ** 4 * np.prod(x ** np.array(nu)) / MultiIndex(*nu).factorial()
        assert eval_P(nu, q).isclose(Quat(expect), tol=1e-12)


def test_P_left_and_right_regular(rng):
    q = Quat(*rng.normal(size=4) * 0.5)
    for nu in [(1, 0, 0), (1, 1, 0), (2, 1, 1)]:
        f = lambda p, nu=nu: eval_P(nu, p)
        assert dbar_l(f, q).abs() < 1e-7
        assert dbar_r(f, q).abs() < 1e-7


def test_dbar_examples(rng):
    q = Quat(*rng.normal(size=4))
    z1 = lambda p: eval_z(1, p)
    assert dbar_l(z1, q).abs() < 1e-8
    assert d_l(z1, q).isclose(E1, tol=1e-8)
    assert dbar_l(lambda p: Quat(p.x0), q).isclose(Quat(0.5), tol=1e-8)


def test_G_examples():
    assert eval_G(Quat(2)).isclose(Quat(1 / 8))
    assert eval_G(Quat(0, 2)).isclose(-E1 * (1 / 8))
    q = Quat(1, 1)
    assert eval_G(q).isclose(q.inv() * (1 / q.norm()))


def test_kernel_values_and_fd(rng):
    assert Quat(*kernel((0, 0, 0))(np.array([2.0, 0, 0, 0]))).isclose(Quat(1 / 8))
    assert Quat(*kernel((1, 0, 0))(np.array([1.0, 0, 0, 0]))).isclose(-E1, tol=1e-12)
    q = Quat(1)
    fd = partial_nu(eval_G, (1, 1, 0), q)
    assert Quat(*kernel((1, 1, 0))(q.array)).isclose(fd, tol=1e-6 * max(1, fd.abs()))
    p = Quat(*rng.normal(size=4))
    fd = partial_nu(eval_G, (1, 0, 1), p)
    assert Quat(*kernel((1, 0, 1))(p.array)).isclose(fd, tol=1e-5 * max(1, fd.abs()))


def test_kernel_homogeneity_and_parity(rng):
    q = rng.normal(size=4)
    for nu in [(1, 0, 0), (2, 1, 0), (1, 1, 1)]:
        ker = kernel(nu)
        n = sum(nu)
        assert np.allclose(ker(2.5 * q), 2.5 ** (-n - 3) * ker(q))
        assert np.allclose(ker(-q), (-1) ** (n + 1) * ker(q))


def test_kernel_degree_limit():
    with pytest.raises(DegreeTooLarge):
        kernel((13, 0, 0))


def test_pole_order_of_G():
    assert pole_order(kernel((0, 0, 0))) == 2


def test_kelvin_inversion():
    q = Quat(0.3, 0.7, -0.2, 0.4)
    one = lambda p: Quat(1)
    assert kelvin_inversion(one)(q).isclose(eval_G(q))
    assert kelvin_inversion(eval_G)(q).isclose(Quat(1), tol=1e-12)
    p1 = lambda p: eval_P((1, 0, 0), p)
    assert kelvin_inversion(kelvin_inversion(p1))(q).isclose(p1(q), tol=1e-12)


def test_bound_constant_dominates(rng):
    for n in (3, 5):
        c = bound_constant(n)
        pts = rng.normal(size=(2000, 4))
        pts /= np.linalg.norm(pts, axis=1)[:, None]
        worst = max(np.linalg.norm(kernel(nu)(pts), axis=1).max() for nu in sigma(n))
        assert worst <= c


def test_homogeneous_regular_is_regular(rng):
    f = HomogeneousRegular(2, {(1, 1, 0): Quat(1, 2, 0, 0), (0, 0, 2): E2})
    q = Quat(*rng.normal(size=4))
    assert dbar_l(f, q).abs() < 1e-7


def test_fueter_table_vectorised(rng):
    pts = rng.normal(size=(6, 4))
    table = fueter_table(pts, 3)
    for i in range(6):
        assert Quat(*table[MultiIndex(2, 0, 1)][i]).isclose(eval_P((2, 0, 1), Quat(*pts[i])), tol=1e-12)
