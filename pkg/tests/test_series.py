import numpy as np
import pytest

from quatell.algebra import E2, MultiIndex, Quat
from quatell.regular import HomogeneousRegular, eval_P, kernel
from quatell.series import (
    QSeries,
    TruncationMismatch,
    ck_mul,
    coefficients_of,
    coeffs_from_sphere,
    regular_from_series,
    series_of,
    shift_expansion,
    sum_expansion,
)


def z(j):
    return {MultiIndex(*[1 if k == j else 0 for k in (1, 2, 3)]): 1}


def test_series_of_z_and_constants():
    s = series_of(z(1), 4)
    assert s.as_dict() == {MultiIndex(1, 0, 0): Quat(-1)}
    c = series_of({(0, 0, 0): E2}, 4)
    assert c.isclose(QSeries.constant(E2, 4))


def test_ck_products():
    z1, z2 = series_of(z(1), 4), series_of(z(2), 4)
    assert ck_mul(z1, z1).isclose(series_of({(2, 0, 0): 2}, 4))
    assert ck_mul(z1, z2).isclose(series_of({(1, 1, 0): 1}, 4))
    assert ck_mul(z1, QSeries.constant(1, 4)).isclose(z1)


def test_ck_product_restricts_to_pointwise(rng):
    f = series_of(HomogeneousRegular(2, {(1, 1, 0): Quat(1, 2, 0, 0), (0, 0, 2): E2}), 6)
    g = series_of({(1, 0, 0): Quat(0, 0, 1, 1), (0, 0, 0): Quat(0.5)}, 6)
    x = rng.normal(size=(5, 3))
    from quatell.algebra import qmul

    assert np.allclose(ck_mul(f, g).evaluate(x), qmul(f.evaluate(x), g.evaluate(x)))


def test_truncation_mismatch():
    with pytest.raises(TruncationMismatch):
        ck_mul(QSeries.zero(3), QSeries.zero(4))


def test_round_trip(rng):
    coeffs = {MultiIndex(1, 2, 0): Quat(1, 2, 3, 4), MultiIndex(0, 0, 1): Quat(-1)}
    s = series_of(coeffs, 5)
    back = coefficients_of(s)
    assert all(back[k].isclose(v) for k, v in coeffs.items())
    f = regular_from_series(s)
    q = Quat(*rng.normal(size=4))
    expect = eval_P((1, 2, 0), q) * Quat(1, 2, 3, 4) + eval_P((0, 0, 1), q) * Quat(-1)
    assert f(q).isclose(expect, tol=1e-12)


def test_shift_expansion_both_orders():
    p = Quat(0.3, 1.0, -0.4, 0.2)
    q = Quat(0.05, 0.1, 0.02, -0.08)
    c = shift_expansion((1, 0, 0), p, 12)
    exact = Quat(*kernel((1, 0, 0))((p + q).array))
    right = sum_expansion(c, q, "right")
    left = sum_expansion(c, q, "left")
    assert right.isclose(exact, tol=1e-8)
    assert right.isclose(left, tol=1e-10)
    assert sum_expansion(c, Quat(), "right").isclose(Quat(*kernel((1, 0, 0))(p.array)))


def test_coeffs_from_sphere():
    a, b = coeffs_from_sphere(lambda x: kernel((0, 0, 0))(x), 0, 1.0, 2)
    assert b[(0, 0, 0)].isclose(Quat(1), tol=1e-10)
    assert a[(1, 0, 0)].abs() < 1e-10
    f = lambda x: np.array([eval_P((1, 1, 0), Quat(*y)).array for y in np.atleast_2d(x)])
    a, b = coeffs_from_sphere(f, 0, 1.0, 2)
    assert a[(1, 1, 0)].isclose(Quat(1), tol=1e-10)
    assert a[(2, 0, 0)].abs() < 1e-10
    assert b[(0, 0, 0)].abs() < 1e-10
