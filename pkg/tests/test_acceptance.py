"""Acceptance gate: one test per criterion, each run at its stated tolerance.

Every test records a PASS/FAIL line (shown in the terminal summary) before
asserting, so failing criteria are reported with their measured values.
"""

import itertools
import math
import time

import numpy as np
import pytest

from conftest import ACCEPTANCE_LINES
from quatell.algebra import E1, Quat, bilinear, qconj, qdot, qmul
from quatell.cli import binom_reports, gexp_rate
from quatell.elliptic import average_cosets, e_star, evaluator, quasi_periods, transform_a, wp, wp_series
from quatell.geometry import (
    D3Q,
    TWO_PI2,
    apply_jq_left,
    apply_jq_right,
    check_fprop,
    check_ii_second,
    dz,
    map_LR,
    period_1form,
    period_3form,
    residue_at,
)
from quatell.lattice import (
    diagonal_lattice,
    eisenstein,
    homothety,
    hurwitz_order,
    lattice_new,
    lattice_sum,
    lipschitz,
    lipschitz_order,
    u_matrix,
)
from quatell.regular import kernel, sigma


def record(label, ok, detail):
    line = f"[{'PASS' if ok else 'FAIL'}] criterion {label}: {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    return ok


def int_det(m):
    """Exact integer determinant by the Leibniz formula."""
    m = [[int(x) for x in row] for row in m]
    total = 0
    for perm in itertools.permutations(range(4)):
        sign = 1
        for i in range(4):
            for j in range(i + 1, 4):
                if perm[i] > perm[j]:
                    sign = -sign
        total += sign * math.prod(m[i][perm[i]] for i in range(4))
    return total


@pytest.fixture(scope="module")
def z4_eval():
    lat = lipschitz_order().lattice
    return lat, evaluator(lat, 40.0), quasi_periods(lat, 40.0).array


@pytest.fixture(scope="module")
def hurwitz_eval():
    ctx = hurwitz_order()
    lat = ctx.lattice
    return ctx, evaluator(lat, 40.0), quasi_periods(lat, 40.0).array


def test_criterion_01_residue():
    g = lambda q: kernel((0, 0, 0))(q)
    t0 = time.perf_counter()
    errs = [(residue_at(g, 0.0, r, 24) - Quat(1)).abs() for r in (0.5, 1.0, 2.0)]
    elapsed = time.perf_counter() - t0
    ok = max(errs) <= 1e-8 and elapsed < 1.0
    assert record("1 (Cauchy-Fueter residue)", ok, f"max |err| = {max(errs):.2e}, {elapsed:.2f} s")


@pytest.mark.parametrize("name", ["Z4", "diag:2,3,5", "hurwitz"])
def test_criterion_02_legendre(name):
    lat = {"Z4": lipschitz, "diag:2,3,5": lambda: diagonal_lattice(2, 3, 5),
           "hurwitz": lambda: hurwitz_order().lattice}[name]()
    t0 = time.perf_counter()
    eta = quasi_periods(lat, 40.0).array
    elapsed = time.perf_counter() - t0
    rel = np.linalg.norm(qdot(lat.lambda_hat, eta) - [TWO_PI2, 0, 0, 0]) / TWO_PI2
    ok = rel <= 1e-3 and elapsed <= 120
    assert record(f"2 (Legendre, {name})", ok, f"rel = {rel:.2e}, {elapsed:.1f} s")


def test_criterion_03_regular_forms():
    rng = np.random.default_rng(2024)
    worst = [0.0, 0.0, 0.0]
    count = 0
    while count < 20:
        m = rng.normal(size=(4, 4))
        if np.linalg.det(m) <= 0.05:
            continue
        lat = lattice_new(m.ravel())
        count += 1
        base = rng.uniform(-0.3, 0.3, size=4) @ lat.matrix
        periods = [period_1form(lat, form=dz(j), base=base, order=8, check_poles=False) for j in (1, 2, 3)]
        for p in periods:
            worst[0] = max(worst[0], np.abs(qdot(lat.lambda_hat, p)).max())
            norm = bilinear(qconj(p), lat.gram_q, p)
            worst[2] = max(worst[2], np.abs(norm - [-2 * lat.det, 0, 0, 0]).max())
            for p2 in periods:
                worst[1] = max(worst[1], np.abs(bilinear(p2, lat.gram_q, p)).max())
    ok = max(worst) <= 1e-10
    assert record(
        "3 (Theorem 1(iii), dz_j, 20 lattices)", ok,
        f"lambda_hat.P {worst[0]:.1e}, tP'QP {worst[1]:.1e}, tconj(P)QP + 2 det {worst[2]:.1e} (c = 2)",
    )


def test_criterion_04_rlem(z4_eval):
    lat, ev, eta = z4_eval
    p1 = period_1form(lat, lambda q: np.atleast_2d(q) @ np.zeros((4, 4)) + _z1(q))
    err_dz = max(
        np.abs(period_3form(lat, map_LR(dz(1), "right"), 24) - apply_jq_right(lat, p1)).max(),
        np.abs(period_3form(lat, map_LR(dz(1), "left"), 24) - apply_jq_left(lat, p1)).max(),
    )
    dzeta = ev.dzeta()
    pz = period_1form(lat, lambda q: ev(np.atleast_2d(q)))
    right = apply_jq_right(lat, pz)
    left = apply_jq_left(lat, pz)
    rel_r = np.abs(period_3form(lat, map_LR(dzeta, "right"), 24) - right).max() / np.abs(right).max()
    rel_l = np.abs(period_3form(lat, map_LR(dzeta, "left"), 24) - left).max() / np.abs(left).max()
    ok = err_dz <= 1e-10 and max(rel_r, rel_l) <= 1e-4
    assert record("4 (Lemma Rlem)", ok, f"dz1 abs {err_dz:.1e}; dzeta rel R {rel_r:.1e}, L {rel_l:.1e}")


def _z1(q):
    q = np.atleast_2d(np.asarray(q, dtype=float))
    out = np.zeros_like(q)
    out[:, 0] = -q[:, 1]
    out[:, 1] = q[:, 0]
    return out


def test_criterion_05_eisenstein():
    lat = lipschitz()
    even_ok = all(eisenstein(lat, nu, 20).value == Quat() for n in (2, 4) for nu in sigma(n))
    e20 = eisenstein(lat, (2, 1, 0), 20)
    e40 = eisenstein(lat, (2, 1, 0), 40)
    gap = (e20.value - e40.value).abs()
    radii_ok = gap <= e20.bound + e40.bound
    a = Quat(1, 2, -1, 0.5)
    a = a * (1 / a.abs())
    b = Quat(0.3, -1, 0.2, 2)
    b = b * (1 / b.abs())
    moved = homothety(lat, a.inv(), b.inv())
    worst = 0.0
    for nu in [(2, 1, 0), (1, 1, 1), (0, 0, 3)]:
        ker = kernel(nu)
        lhs = qmul(b.array, lattice_sum(moved, ker, 16.0))
        rhs = lattice_sum(lat, lambda p: qmul(b.array[None], ker(qmul(qmul(a.inv().array[None], p), b.array[None]))), 16.0)
        worst = max(worst, float(np.abs(lhs - rhs).max()))
    ok = even_ok and radii_ok and worst <= 1e-6
    assert record(
        "5 (Eisenstein properties)", ok,
        f"even zero {even_ok}; |E20 - E40| = {gap:.1e} <= {e20.bound + e40.bound:.1e}; homothety {worst:.1e}",
    )


def test_criterion_06_wp_consistency():
    lat = lipschitz()
    rng = np.random.default_rng(6)
    worst = 0.0
    ok = True
    for _ in range(10):
        d = rng.normal(size=4)
        q = 0.3 * lat.r_min * d / np.linalg.norm(d)
        direct = wp(lat, (2, 1, 0), q, 40.0)
        series = wp_series(lat, (2, 1, 0), q, 8)
        diff = (direct.value - series.value).abs()
        allowed = direct.bound + series.bound
        ok &= diff <= allowed
        worst = max(worst, diff / allowed)
    assert record("6 (wp vs wp_series)", ok, f"max |diff| / combined bound = {worst:.2f}")


def test_criterion_07_algebraic_identities():
    rng = np.random.default_rng(7)
    binom = max(r.lhs[0] for r in binom_reports(rng.normal(size=(20, 4)), 6))
    rates = []
    for _ in range(20):
        p = rng.normal(size=4)
        q = rng.normal(size=4)
        q *= 0.25 * np.linalg.norm(p) / np.linalg.norm(q)
        rates.append(gexp_rate(p, q))
    ok = binom <= 1e-11 and max(rates) <= 0.25 + 0.05
    assert record("7 (binom, Gexp)", ok, f"binom rel {binom:.1e}; Gexp per-degree rate {max(rates):.3f}")


def test_criterion_08_qm(hurwitz_eval):
    ctx, _, eta = hurwitz_eval
    lat = ctx.lattice
    elements = [Quat(1), E1, Quat(0.5, 0.5, 0.5, 0.5), Quat(1, 1)]
    mats = {a: u_matrix(ctx, a) for a in elements}
    integral = all(np.issubdtype(m.dtype, np.integer) for m in mats.values())
    mult = all(
        np.array_equal(u_matrix(ctx, a * b), mats[b] @ mats[a]) for a in elements for b in elements
    )
    dets = all(int_det(mats[a]) == round(a.norm() ** 2) for a in elements)
    worst = max(
        np.linalg.norm(qdot(lat.lambda_hat, mats[a].astype(float) @ eta) - TWO_PI2 * a.conj().array)
        for a in elements
    )
    ok = integral and mult and dets and worst <= 1e-3 * TWO_PI2
    assert record("8 (QM relations)", ok, f"integral {integral}, U_ab {mult}, det {dets}; max residual {worst:.1e}")


def test_criterion_09_transforms(hurwitz_eval):
    ctx, ev, eta = hurwitz_eval
    lat = ctx.lattice
    a = Quat(1, 1)
    base = np.array([0.013, 0.021, -0.017, 0.011])
    za = transform_a(ev, a)
    res = (residue_at(za, 0.0, 0.3, 24) - Quat(1 / a.norm())).abs()
    target = qmul(u_matrix(ctx, a).astype(float) @ eta, a.array[None, :])
    pa = period_1form(lat, za, base=base)
    rel_a = np.abs(pa - target).max() / np.abs(target).max()
    zr = average_cosets(ev, ctx, a)
    pr = period_1form(lat, zr, base=base)
    rel_r = np.abs(pr - eta).max() / np.abs(eta).max()
    ok = res <= 1e-5 and rel_a <= 1e-3 and rel_r <= 1e-3
    assert record("9 (transform laws)", ok, f"res err {res:.1e}; P(dzeta_a) rel {rel_a:.1e}; P(dzeta_R) rel {rel_r:.1e}")


def test_criterion_10_thm1_ii_second(z4_eval):
    lat, ev, eta = z4_eval
    t0 = time.perf_counter()
    rep = check_ii_second(lat, eta, ev.function(), ev.dzeta(), 0.4 * lat.r_min, 32)
    elapsed = time.perf_counter() - t0
    lhs = float(np.linalg.norm(rep.lhs))
    ok = rep.abs_residual <= 1e-3 * lhs and elapsed <= 300
    assert record(
        "10 (Theorem 1(ii) second identity)", ok,
        f"|tEta Q eta| = {lhs:.1e}, |sum| = {rep.abs_residual:.1e}, {elapsed:.0f} s",
    )


def test_criterion_11_e_star():
    lat = diagonal_lattice(2, 3, 5)
    es = e_star(lat, 40.0)
    total = sum(qmul(np.eye(4)[j], es.E[j]) for j in (1, 2, 3))
    target = -math.pi**2 / (2 * math.sqrt(30))
    rel_example = np.linalg.norm(total - [target, 0, 0, 0]) / abs(target)
    rho = qdot(np.eye(4), es.E)
    rel_rho = np.linalg.norm(rho - [TWO_PI2 / lat.det, 0, 0, 0]) / (TWO_PI2 / lat.det)
    ok_a = record("11a (diagonal example)", rel_example <= 1e-2,
                  f"e1E1+e2E2+e3E3 = {total[0]:.6f} vs {target:.6f} (Eprop sign measured: {es.eprop_sign})")
    ok_b = record("11b (rho contraction)", rel_rho <= 1e-3, f"rel = {rel_rho:.1e}")
    assert ok_a and ok_b


@pytest.mark.slow
def test_criterion_12_fprop(z4_eval):
    lat, ev, _ = z4_eval
    rep = check_fprop(lat, D3Q, ev.function(), ev.dzeta(), 0.4 * lat.r_min, n=2_000_000, seed=0)
    ok = rep.rel_residual <= 5e-2
    assert record("12 (Prop. fprop, QMC N = 2e6)", ok, f"rel = {rep.rel_residual:.1e}")
