"""Elliptic and quasi-elliptic functions of a lattice: the Weierstrass functions
wp_nu, the zeta function, its quasi-periods eta and the vector (E_0..E_3),
and the transforms f_a(q) = f(aq) a and coset averages.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Dict, Optional, Tuple

import numpy as np

from .algebra import (
    DomainError,
    MultiIndex,
    Quat,
    QuatellError,
    basis,
    delta,
    qconj,
    qdot,
    qmul,
    qnorm,
    sigma,
)
from .geometry import QForm, ResidualReport, TWO_PI2
from .kernels import pair_sum
from .lattice import (
    Lattice,
    OrderContext,
    as_lattice,
    cell_radius,
    coset_reps,
    lattice_kernel_sums,
    tail_bound,
)
from .regular import fueter_table, kernel

DEFAULT_R = 40.0


class PoleHit(QuatellError):
    pass


class OutsideDisk(QuatellError):
    pass


def _pts(q) -> Tuple[np.ndarray, bool]:
    if isinstance(q, Quat):
        return q.array[None, :], True
    a = np.asarray(q, dtype=float)
    if a.ndim == 1:
        return a[None, :], True
    return a, False


def _check_poles(lat: Lattice, pts: np.ndarray, tol: float = 1e-9):
    c = pts @ lat.inverse
    near = np.round(c) @ lat.matrix
    d = np.sqrt(qnorm(pts - near))
    if np.any(d < tol):
        raise PoleHit(f"point within {d.min():.1e} of a lattice point")


def _G(p):
    n = qnorm(p)
    return qconj(p) / (n * n)[..., None]


def _dG(p):
    """d/dx_k G(p) for k = 1..3, shape (..., 3, 4)."""
    n = qnorm(p)
    cp = qconj(p)
    out = np.empty(p.shape[:-1] + (3, 4))
    for k in range(3):
        out[..., k, :] = -4.0 * p[..., k + 1, None] * cp / (n**3)[..., None]
        out[..., k, k + 1] -= 1.0 / n**2
    return out


def _abs_p_sum(table, m: int) -> np.ndarray:
    return sum(np.sqrt(qnorm(table[mu])) for mu in sigma(m))


def _scale(lat: Lattice) -> float:
    return lat.covolume ** 0.25


# ---------------------------------------------------------------------------
# Eisenstein tables shared by the evaluators


def eisenstein_table(lat: Lattice, degree: int, radius: float = DEFAULT_R) -> Dict[MultiIndex, np.ndarray]:
    """Smooth-cutoff values E_mu for every |mu| = degree (cached on the lattice).

    Degree 3 uses ``radius``; higher degrees converge much faster and use a
    smaller radius tied to the lattice scale.
    """
    if degree % 2 == 0:
        return {mu: np.zeros(4) for mu in sigma(degree)}
    rad = radius if degree == 3 else min(radius, max(16.0 * _scale(lat), 8.0 * lat.r_min))
    key = ("E", degree, round(rad, 9))
    if key not in lat._cache:
        lat._cache[key] = lattice_kernel_sums(lat, sigma(degree), rad)
    return lat._cache[key]


# ---------------------------------------------------------------------------
# zeta


@dataclass
class ZetaValue:
    value: np.ndarray
    bound: np.ndarray


class ZetaEvaluator:
    """Weierstrass zeta of a lattice.

    Two evaluation paths are available:

    * ``direct``: G(q) plus the pair sum over |lambda| <= R of
      G(q+l) + G(q-l) minus the ray-Taylor terms of orders 1 and 3, with the
      order-3 part restored from smooth-cutoff Eisenstein values.
    * ``local`` (for |q| up to the cell radius): an exact pair sum over the
      near points |lambda| <= r0 plus the Taylor series of the far part,
      sum over odd degrees of P_mu(q) times Eisenstein tails.
    """

    def __init__(self, lat: Lattice, R: float = DEFAULT_R, far_degree: int = 11,
                 reach: Optional[float] = None, near_factor: float = 4.0):
        if far_degree % 2 == 0:
            far_degree -= 1
        self.lattice = lat
        self.R = float(R)
        self.far_degree = far_degree
        self.reach = float(reach) if reach is not None else cell_radius(lat)
        self.r0 = near_factor * self.reach
        self.R_eff = max(self.R, 2.5 * self.r0)
        chunks = list(lat.half_chunks(self.r0))
        self.near = np.concatenate(chunks) if chunks else np.zeros((0, 4))
        n3 = list(sigma(3))
        sub = 0.8 * self.R_eff
        tails = lattice_kernel_sums(lat, n3, self.R_eff, inner=self.r0, extra_radii=(sub,))
        ball = lattice_kernel_sums(lat, n3, self.r0, method="ball")
        self.e3 = {mu: tails[mu] + ball[mu] for mu in n3}
        self.e3_error = max(float(np.sqrt(qnorm(tails[mu] - tails[(mu, sub)]))) for mu in n3)
        self.far: Dict[MultiIndex, np.ndarray] = {mu: tails[mu] for mu in n3}
        for n in range(5, far_degree + 1, 2):
            self.far.update(
                lattice_kernel_sums(lat, sigma(n), 3.0 * self.r0, inner=self.r0)
            )

    # -- local path -------------------------------------------------------------

    def _local(self, qs: np.ndarray, grad: bool):
        val, g = pair_sum(self.near, qs, 1, grad)
        val = val + _G(qs)
        table = fueter_table(qs, self.far_degree)
        for mu, f in self.far.items():
            val -= qmul(table[mu], f)
        if not grad:
            return val, None
        g = g + _dG(qs)
        for mu, f in self.far.items():
            for k in range(3):
                if mu[k] > 0:
                    g[:, k] += qmul(table[mu.minus(delta(k + 1))], f)
        return val, g

    def local_estimate(self, q) -> float:
        """Size of the first omitted far-series degree at q (error estimate)."""
        pts, _ = _pts(q)
        ratio = np.sqrt(qnorm(pts)).max() / self.r0
        top = max(self.far)
        scale = max(float(np.sqrt(qnorm(self.far[mu]))) for mu in sigma(top.degree))
        return float(scale * (3 * ratio * self.r0) ** (top.degree + 2) / math.factorial(top.degree + 2))

    def _within(self, pts: np.ndarray) -> np.ndarray:
        return np.sqrt(qnorm(pts)) <= 1.05 * self.reach

    # -- direct path ---------------------------------------------------------------

    def direct(self, q, R: Optional[float] = None, accelerated: bool = True) -> ZetaValue:
        """Truncated lattice sum over |lambda| <= R (batch over queries)."""
        pts, _ = _pts(q)
        _check_poles(self.lattice, pts)
        R = self.R if R is None else float(R)
        taylor = 3 if accelerated else 1
        acc = np.zeros((len(pts), 4))
        for chunk in self.lattice.half_chunks(R):
            acc += pair_sum(chunk, pts, taylor)[0]
        val = _G(pts) + acc
        table = fueter_table(pts, 7)
        if accelerated:
            for mu, e in self.e3.items():
                val -= qmul(table[mu], e)
            bound = 2.0 * _abs_p_sum(table, 5) * tail_bound(self.lattice, 5, R)
            bound = bound + _abs_p_sum(table, 3) * self.e3_error
        else:
            bound = 2.0 * _abs_p_sum(table, 3) * tail_bound(self.lattice, 3, R)
        return ZetaValue(val, bound)

    # -- public evaluation ---------------------------------------------------------

    def __call__(self, q):
        """zeta(q); the local path is used inside the cell, the direct one elsewhere."""
        pts, scalar = _pts(q)
        _check_poles(self.lattice, pts)
        inside = self._within(pts)
        out = np.empty_like(pts)
        if np.any(inside):
            out[inside] = self._local(pts[inside], False)[0]
        if np.any(~inside):
            out[~inside] = self.direct(pts[~inside]).value
        return Quat.from_array(out[0]) if scalar and not isinstance(q, np.ndarray) else (out[0] if scalar else out)

    def value_and_partials(self, q) -> Tuple[np.ndarray, np.ndarray]:
        """zeta and its partials (d/dt, d/dx1, d/dx2, d/dx3), shapes (M, 4), (M, 4, 4).

        The x-partials are wp_(k); the t-partial follows from left regularity.
        """
        pts, _ = _pts(q)
        _check_poles(self.lattice, pts)
        if not np.all(self._within(pts)):
            raise DomainError("partials are evaluated inside the fundamental cell only")
        val, g = self._local(pts, True)
        part = np.empty((len(pts), 4, 4))
        part[:, 1:] = g
        part[:, 0] = -sum(qmul(basis(k + 1), g[:, k]) for k in range(3))
        return val, part

    def wp_unit(self, q) -> np.ndarray:
        """(wp_(1), wp_(2), wp_(3)) at points inside the cell, shape (M, 3, 4)."""
        return self.value_and_partials(q)[1][:, 1:]

    def dzeta(self) -> QForm:
        """The 1-form d(zeta) (valid inside the fundamental cell)."""
        return QForm.from_partials(lambda p: self.value_and_partials(p)[1])

    def function(self) -> Callable:
        """zeta as an array function (for quadrature inside the cell)."""
        return lambda p: self(np.atleast_2d(p))


def evaluator(lat: Lattice, R: float = DEFAULT_R) -> ZetaEvaluator:
    """Cached :class:`ZetaEvaluator` for a lattice and radius."""
    lat = as_lattice(lat)
    key = ("zeta", float(R))
    if key not in lat._cache:
        lat._cache[key] = ZetaEvaluator(lat, R)
    return lat._cache[key]


def zeta(lat: Lattice, q, R: float = DEFAULT_R, accelerated: bool = True) -> Tuple[Quat, float]:
    """(zeta(q), error bound) from the direct accelerated lattice sum."""
    res = evaluator(lat, R).direct(Quat.coerce(q).array, R, accelerated)
    return Quat.from_array(res.value[0]), float(res.bound[0])


# ---------------------------------------------------------------------------
# quasi-periods and the E-vector


@dataclass(frozen=True)
class PeriodVector:
    """Four quaternions (entries h = 1..4)."""

    entries: np.ndarray

    def __post_init__(self):
        a = np.array(self.entries, dtype=float).reshape(4, 4)
        a.setflags(write=False)
        object.__setattr__(self, "entries", a)

    def __getitem__(self, h: int) -> Quat:
        return Quat.from_array(self.entries[h])

    def swap34(self) -> "PeriodVector":
        return PeriodVector(self.entries[[0, 1, 3, 2]])

    def tolist(self) -> list:
        return self.entries.tolist()


@dataclass(frozen=True)
class QuasiPeriods:
    eta: PeriodVector
    bound: float
    difference_check: float  # max |eta_h - (zeta(q0 + l_h) - zeta(q0))|
    R: float

    @property
    def array(self) -> np.ndarray:
        return self.eta.entries


def quasi_periods(lat: Lattice, R: float = DEFAULT_R, seed: int = 0) -> QuasiPeriods:
    """eta_h = 2 zeta(lambda_h / 2), cross-checked against zeta(q0 + l_h) - zeta(q0)."""
    lat = as_lattice(lat)
    key = ("eta", float(R), seed)
    if key in lat._cache:
        return lat._cache[key]
    ev = evaluator(lat, R)
    rng = np.random.default_rng(seed)
    q0 = rng.uniform(-0.25, 0.25, size=4) @ lat.matrix
    queries = np.concatenate([0.5 * lat.matrix, q0[None, :], q0 + lat.matrix])
    res = ev.direct(queries, R)
    eta = 2.0 * res.value[:4]
    diff = res.value[5:] - res.value[4]
    check = float(np.sqrt(qnorm(eta - diff)).max())
    bound = float(2.0 * res.bound[:4].max())
    out = QuasiPeriods(PeriodVector(eta), bound, check, float(R))
    lat._cache[key] = out
    return out


@dataclass(frozen=True)
class EStar:
    E: np.ndarray  # rows E_0..E_3 (Lambda^{-1} eta)
    E_transpose: np.ndarray  # Lambda^{-T} eta, reported for comparison
    reports: Tuple[ResidualReport, ...]
    eprop_sign: str


def _z_of(w: np.ndarray, j: int) -> np.ndarray:
    z = np.zeros(4)
    z[0] = -w[j]
    z[j] = w[0]
    return z


def e_star(lat: Lattice, R: float = DEFAULT_R, eta: Optional[np.ndarray] = None) -> EStar:
    """E = Lambda^{-1} eta with the contraction and Eprop residuals (both signs)."""
    lat = as_lattice(lat)
    if eta is None:
        eta = quasi_periods(lat, R).array
    E = lat.inverse @ eta
    ET = lat.inverse.T @ eta
    params = dict(R=R)
    reports = [
        ResidualReport.make("rho.E", qdot(np.eye(4), E), Quat(TWO_PI2 / lat.det), **params),
        ResidualReport.make(
            "e1E1+e2E2+e3E3 = -pi^2/(2 det)",
            qdot(np.eye(4)[1:], E[1:]),
            Quat(-math.pi**2 / (2 * lat.det)),
            note="closed form stated for diagonal lattices",
            **params,
        ),
    ]
    worst = {}
    for sign, label in ((-1.0, "statement"), (1.0, "proof")):
        res = 0.0
        for h in range(4):
            w = lat.matrix[h]
            rhs = -sum(qmul(_z_of(w, j), E[j]) for j in (1, 2, 3))
            rhs = rhs + np.array([sign * TWO_PI2 / lat.det * w[0], 0, 0, 0])
            r = ResidualReport.make(f"eprop.{label} h={h + 1}", eta[h], rhs, **params)
            res = max(res, r.abs_residual)
            reports.append(r)
        worst[label] = res
    sign = min(worst, key=worst.get)
    return EStar(E, ET, tuple(reports), sign)


# ---------------------------------------------------------------------------
# wp_nu


@dataclass
class WpValue:
    value: Quat
    bound: float


def wp(lat: Lattice, nu, q, R: float = DEFAULT_R) -> WpValue:
    """wp_nu(q) = G_nu(q) + sum_{0<|l|<=R} [G_nu(q + l) - G_nu(l)] over symmetric pairs.

    For |nu| in {1, 2} the leading non-cancelling Taylor order of each pair is
    replaced by its smooth-cutoff Eisenstein total.
    """
    lat = as_lattice(lat)
    nu = MultiIndex(*nu)
    n = nu.degree
    if n < 1:
        raise DomainError("wp_nu needs |nu| >= 1 (use zeta for nu = 0)")
    q = Quat.coerce(q).array
    _check_poles(lat, q[None, :])
    ker = kernel(nu)
    acc = np.zeros(4)
    for chunk in lat.half_chunks(R):
        part = ker(q + chunk) + ker(q - chunk)
        if n % 2 == 1:
            part -= 2.0 * ker(chunk)
        acc += part.sum(axis=0)
    value = ker(q) + acc
    table = fueter_table(q, 12)
    m0 = 2 if n % 2 == 1 else 1
    if n <= 2:
        m = 3 - n
        mus = sigma(m)
        targets = [mu.plus(nu) for mu in mus]
        ball = lattice_kernel_sums(lat, targets, R, method="ball")
        smooth = eisenstein_table(lat, 3, R)
        sign = (-1) ** m
        for mu, t in zip(mus, targets):
            value += sign * qmul(table[mu], smooth[t] - ball[t])
        m0 = m + 2
    bound = 0.0
    for m in range(m0, 13 - n, 2):
        bound += 2.0 * float(_abs_p_sum(table, m)) * tail_bound(lat, n + m, R)
    return WpValue(Quat.from_array(value), bound)


def wp_series(lat: Lattice, nu, q, D: int = 12, order: str = "right", R: float = DEFAULT_R) -> WpValue:
    """G_nu(q) + sum_{0<|mu|<=D} (-1)^|mu| P_mu(q) E_{mu+nu} for 0 < |q| < r_L.

    ``order`` selects P_mu(q) E (right) or E P_mu(q) (left); the bound is the
    size of the first omitted non-zero degree, doubled.
    """
    lat = as_lattice(lat)
    nu = MultiIndex(*nu)
    qa = Quat.coerce(q).array
    if not 0.0 < math.sqrt(qnorm(qa)) < lat.r_min:
        raise OutsideDisk("series needs 0 < |q| < r_L")
    n = nu.degree
    extra = 1 if (n + D + 1) % 2 == 1 else 2
    top = D + extra
    table = fueter_table(qa, top)
    value = kernel(nu)(qa)
    tail = np.zeros(4)
    for m in range(1, top + 1):
        if (m + n) % 2 == 0:
            continue
        es = eisenstein_table(lat, m + n, R)
        acc = np.zeros(4)
        for mu in sigma(m):
            e = es[mu.plus(nu)]
            acc += qmul(table[mu], e) if order == "right" else qmul(e, table[mu])
        acc *= (-1) ** m
        if m <= D:
            value += acc
        else:
            tail += acc
    return WpValue(Quat.from_array(value), 2.0 * float(np.sqrt(qnorm(tail))))


# ---------------------------------------------------------------------------
# transforms


def transform_a(f: Callable, a) -> Callable:
    """f_a(q) = f(a q) a."""
    a = Quat.coerce(a)
    if a.norm() == 0.0:
        raise DomainError("a must be non-zero")
    aa = a.array

    def fa(q):
        pts, scalar = _pts(q)
        v = np.asarray(f(qmul(aa[None, :], pts)), dtype=float).reshape(pts.shape)
        out = qmul(v, aa[None, :])
        return out[0] if scalar else out

    return fa


def average_cosets(f: Callable, ctx: OrderContext, a) -> Callable:
    """f_R(q) = (1 / N(a)^2) sum_r f(q - r) over coset representatives of a^{-1}L / L."""
    reps = np.array([r.array for r in coset_reps(ctx, a)])
    weight = 1.0 / len(reps)

    def fr(q):
        pts, scalar = _pts(q)
        total = np.zeros(pts.shape)
        for r in reps:
            total += np.asarray(f(pts - r), dtype=float).reshape(pts.shape)
        out = weight * total
        return out[0] if scalar else out

    return fr


def direct_function(lat: Lattice, R: float = DEFAULT_R) -> Callable:
    """zeta as an array function using the direct path everywhere."""
    ev = evaluator(lat, R)
    return lambda p: ev.direct(np.atleast_2d(p), R).value
