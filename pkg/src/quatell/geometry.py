"""Quaternion-valued differential forms on H, affine cubes and spheres,
quadrature, period vectors, and the numerical verification harness for the
period relations.

A k-form is stored through its coefficients on the increasing index sets
I of {0, 1, 2, 3} (0 = t), in the order of ``itertools.combinations``.
Coefficients are quaternions and wedge products keep their order.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from functools import lru_cache
from itertools import combinations
from typing import Callable, Dict, List, Optional, Tuple

import numpy as np

from .algebra import J, Quat, QuatellError, basis, bilinear, qconj, qdot, qmul, qnorm
from .lattice import Lattice, OrderContext, as_lattice, u_matrix

TWO_PI2 = 2.0 * math.pi**2


class DegreeMismatch(QuatellError):
    pass


class PoleOnPath(QuatellError):
    pass


SETS = {k: list(combinations(range(4), k)) for k in range(5)}


def _perm_sign(seq) -> int:
    seq = list(seq)
    sign = 1
    for i in range(len(seq)):
        for j in range(i + 1, len(seq)):
            if seq[i] > seq[j]:
                sign = -sign
    return sign


@lru_cache(maxsize=None)
def _wedge_table(k1: int, k2: int):
    out = []
    pos = {s: i for i, s in enumerate(SETS[k1 + k2])}
    for i, a in enumerate(SETS[k1]):
        for j, b in enumerate(SETS[k2]):
            if set(a) & set(b):
                continue
            out.append((i, j, pos[tuple(sorted(a + b))], _perm_sign(a + b)))
    return tuple(out)


def _as_points(q) -> np.ndarray:
    q = q.array if isinstance(q, Quat) else np.asarray(q, dtype=float)
    return np.atleast_2d(q)


def _values(f, pts) -> np.ndarray:
    """Evaluate a quaternion function (or constant) at points (M, 4)."""
    if callable(f):
        v = f(pts)
        v = v.array if isinstance(v, Quat) else np.asarray(v, dtype=float)
        return np.broadcast_to(v, pts.shape)
    return np.broadcast_to(Quat.coerce(f).array, pts.shape)


@dataclass(frozen=True, eq=False)
class QForm:
    """A quaternion-valued k-form given by a coefficient function
    ``func(points (M, 4)) -> (M, C(4, k), 4)``."""

    degree: int
    func: Callable = field(repr=False)

    def coeffs(self, q) -> np.ndarray:
        pts = _as_points(q)
        return np.asarray(self.func(pts), dtype=float)

    def component(self, index_set, q) -> Quat:
        i = SETS[self.degree].index(tuple(index_set))
        return Quat.from_array(self.coeffs(q)[0, i])

    # -- constructors -------------------------------------------------------

    @classmethod
    def constant(cls, degree: int, values: Dict) -> "QForm":
        arr = np.zeros((len(SETS[degree]), 4))
        for idx, v in values.items():
            idx = tuple(idx)
            s = _perm_sign(idx)
            arr[SETS[degree].index(tuple(sorted(idx)))] += s * Quat.coerce(v).array
        arr.setflags(write=False)
        return cls(degree, lambda p: np.broadcast_to(arr, (len(p),) + arr.shape))

    @classmethod
    def zero(cls, degree: int) -> "QForm":
        return cls.constant(degree, {})

    @classmethod
    def function(cls, f) -> "QForm":
        """The 0-form f."""
        return cls(0, lambda p: _values(f, p)[:, None, :])

    @classmethod
    def from_partials(cls, partials: Callable) -> "QForm":
        """The 1-form sum_alpha (df/dx_alpha) dx_alpha from ``partials(points) -> (M, 4, 4)``."""
        return cls(1, lambda p: np.asarray(partials(p), dtype=float))

    @classmethod
    def exact(cls, f: Callable, h: float = 1e-5) -> "QForm":
        """df by vectorised central differences."""

        def partials(p):
            out = np.empty((len(p), 4, 4))
            for a in range(4):
                e = basis(a) * h
                out[:, a] = (_values(f, p + e) - _values(f, p - e)) / (2 * h)
            return out

        return cls.from_partials(partials)

    # -- algebra --------------------------------------------------------------

    def __add__(self, other: "QForm") -> "QForm":
        if other.degree != self.degree:
            raise DegreeMismatch("cannot add forms of different degree")
        return QForm(self.degree, lambda p: self.coeffs(p) + other.coeffs(p))

    def __sub__(self, other: "QForm") -> "QForm":
        return self + other.scale(-1.0)

    def scale(self, s: float) -> "QForm":
        return QForm(self.degree, lambda p: s * self.coeffs(p))

    def left(self, g) -> "QForm":
        """g * omega (g a function or constant multiplies coefficients on the left)."""
        return QForm(self.degree, lambda p: qmul(_values(g, p)[:, None, :], self.coeffs(p)))

    def right(self, f) -> "QForm":
        """omega * f."""
        return QForm(self.degree, lambda p: qmul(self.coeffs(p), _values(f, p)[:, None, :]))

    def conj(self) -> "QForm":
        return QForm(self.degree, lambda p: qconj(self.coeffs(p)))

    def wedge(self, other: "QForm") -> "QForm":
        k = self.degree + other.degree
        if k > 4:
            raise DegreeMismatch(f"wedge degree {k} exceeds 4")
        table = _wedge_table(self.degree, other.degree)

        def func(p):
            a = self.coeffs(p)
            b = other.coeffs(p)
            out = np.zeros((len(p), len(SETS[k]), 4))
            for i, j, t, s in table:
                out[:, t] += s * qmul(a[:, i], b[:, j])
            return out

        return QForm(k, func)

    __xor__ = wedge


# constant forms ------------------------------------------------------------

DQ = QForm.constant(1, {(0,): 1, (1,): (0, 1, 0, 0), (2,): (0, 0, 1, 0), (3,): (0, 0, 0, 1)})
# Dq = dx1 dx2 dx3 - e1 dt dx2 dx3 + e2 dt dx1 dx3 - e3 dt dx1 dx2
D3Q = QForm.constant(
    3,
    {(1, 2, 3): 1, (0, 2, 3): (0, -1, 0, 0), (0, 1, 3): (0, 0, 1, 0), (0, 1, 2): (0, 0, 0, -1)},
)
# The normalised square e1 dx2 dx3 + e2 dx3 dx1 + e3 dx1 dx2; the literal wedge
# DQ ^ DQ equals twice this form.
DQ_DQ = QForm.constant(2, {(2, 3): (0, 1, 0, 0), (3, 1): (0, 0, 1, 0), (1, 2): (0, 0, 0, 1)})
DV = QForm.constant(4, {(0, 1, 2, 3): 1})


def dx(alpha: int) -> QForm:
    return QForm.constant(1, {(alpha,): 1})


def dz(j: int) -> QForm:
    """dz_j = e_j dt - dx_j."""
    return QForm.constant(1, {(0,): basis(j), (j,): -1})


def map_LR(omega: QForm, side: str) -> QForm:
    """L(omega) = dq^dq ^ omega (side "left") or R(omega) = omega ^ dq^dq ("right")."""
    if omega.degree != 1:
        raise DegreeMismatch("map_LR takes a 1-form")
    if side == "left":
        return DQ_DQ.wedge(omega)
    if side == "right":
        return omega.wedge(DQ_DQ)
    raise ValueError("side must be 'left' or 'right'")


def top_coefficient(form: QForm, q) -> np.ndarray:
    """The coefficient F of a 4-form F dv at points q, shape (M, 4)."""
    if form.degree != 4:
        raise DegreeMismatch("expected a 4-form")
    return form.coeffs(q)[:, 0]


# ---------------------------------------------------------------------------
# cubes and chains


@dataclass(frozen=True, eq=False)
class Cube:
    """The affine map (t_1..t_k) -> center + sum (t_i - 1/2) dirs[i] on [0, 1]^k."""

    center: np.ndarray
    dirs: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "center", np.asarray(self.center, dtype=float).reshape(4))
        object.__setattr__(self, "dirs", np.asarray(self.dirs, dtype=float).reshape(-1, 4))

    @property
    def dim(self) -> int:
        return self.dirs.shape[0]

    def point(self, t) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        return self.center + (t - 0.5) @ self.dirs

    def face(self, i: int, eps: int) -> "Cube":
        """The face t_i = eps (i is 1-based)."""
        keep = [j for j in range(self.dim) if j != i - 1]
        return Cube(self.center + (eps - 0.5) * self.dirs[i - 1], self.dirs[keep])

    def boundary(self) -> "Chain":
        return Chain(
            [((-1) ** (i + eps), self.face(i, eps)) for i in range(1, self.dim + 1) for eps in (0, 1)]
        )

    def minors(self) -> np.ndarray:
        """det of dirs restricted to the columns of each index set."""
        k = self.dim
        return np.array([np.linalg.det(self.dirs[:, list(s)]) if k else 1.0 for s in SETS[k]])


@dataclass(frozen=True)
class Chain:
    terms: List[Tuple[int, Cube]]

    def __iter__(self):
        return iter(self.terms)


@lru_cache(maxsize=None)
def gauss_legendre01(order: int):
    x, w = np.polynomial.legendre.leggauss(order)
    return 0.5 * (x + 1.0), 0.5 * w


def _tensor_nodes(k: int, order: int):
    x, w = gauss_legendre01(order)
    if k == 0:
        return np.zeros((1, 0)), np.ones(1)
    grids = np.meshgrid(*[x] * k, indexing="ij")
    wgrid = np.meshgrid(*[w] * k, indexing="ij")
    t = np.stack([g.ravel() for g in grids], axis=1)
    wt = np.prod(np.stack([g.ravel() for g in wgrid], axis=1), axis=1)
    return t, wt


def integrate_cube(omega: QForm, cube: Cube, order: int = 24, block: int = 50_000) -> Quat:
    """Tensor Gauss-Legendre quadrature of the pullback of omega over the cube."""
    if omega.degree != cube.dim:
        raise DegreeMismatch(f"{omega.degree}-form on a {cube.dim}-cube")
    t, w = _tensor_nodes(cube.dim, order)
    minors = cube.minors()
    total = np.zeros(4)
    for s in range(0, len(t), block):
        pts = cube.point(t[s : s + block]) if cube.dim else cube.center[None, :]
        c = omega.coeffs(pts)
        total += np.einsum("m,s,msa->a", w[s : s + block], minors, c)
    return Quat.from_array(total)


def integrate_chain(omega: QForm, chain: Chain, order: int = 24) -> Quat:
    total = Quat()
    for sign, cube in chain:
        total = total + integrate_cube(omega, cube, order) * sign
    return total


# lattice chains ---------------------------------------------------------------


def segment(lat: Lattice, h: int, base=None) -> Cube:
    """gamma_h translated to start at ``base`` (default -lambda_h / 2)."""
    lam = lat.matrix[h - 1]
    start = -0.5 * lam if base is None else Quat.coerce(base).array
    return Cube(start + 0.5 * lam, lam[None, :])


def face(lat: Lattice, h: int) -> Cube:
    """xi^(h) of the fundamental cell centred at 0 (offset -lambda_h / 2)."""
    keep = [i for i in range(4) if i != h - 1]
    return Cube(-0.5 * lat.matrix[h - 1], lat.matrix[keep])


def cell(lat: Lattice) -> Cube:
    return Cube(np.zeros(4), lat.matrix)


def pair_cube(lat: Lattice, i: int, j: int) -> Cube:
    return Cube(np.zeros(4), lat.matrix[[i - 1, j - 1]])


# ---------------------------------------------------------------------------
# spheres


def _sphere_param(r: float, order: int):
    x, w = np.polynomial.legendre.leggauss(order)
    chi = 0.5 * math.pi * (x + 1.0)
    wchi = 0.5 * math.pi * w
    nphi = 2 * order
    phi = 2.0 * math.pi * np.arange(nphi) / nphi
    wphi = np.full(nphi, 2.0 * math.pi / nphi)
    C, T, P = np.meshgrid(chi, chi, phi, indexing="ij")
    W = np.einsum("i,j,k->ijk", wchi, wchi, wphi)
    C, T, P, W = C.ravel(), T.ravel(), P.ravel(), W.ravel()
    sc, cc, st, ct, sp, cp = np.sin(C), np.cos(C), np.sin(T), np.cos(T), np.sin(P), np.cos(P)
    u = np.stack([cc, sc * ct, sc * st * cp, sc * st * sp], axis=1)
    d_chi = np.stack([-sc, cc * ct, cc * st * cp, cc * st * sp], axis=1) * r
    d_th = np.stack([0 * C, -sc * st, sc * ct * cp, sc * ct * sp], axis=1) * r
    d_ph = np.stack([0 * C, 0 * C, -sc * st * sp, sc * st * cp], axis=1) * r
    return u, np.stack([d_chi, d_th, d_ph], axis=1), W


@lru_cache(maxsize=32)
def _sphere_cached(r: float, order: int):
    u, tangents, w = _sphere_param(r, order)
    # orientation: (outward normal, tangents) positively oriented
    frame = np.concatenate([u[:, None, :], tangents], axis=1)
    dets = np.linalg.det(frame)
    sign = np.sign(dets)
    minors = np.stack(
        [np.linalg.det(tangents[:, :, list(s)]) for s in SETS[3]], axis=1
    ) * sign[:, None]
    dS = np.abs(dets)  # |det(n, T)| = r^3 sin^2 chi sin theta
    return u, minors, w, dS


def sphere_nodes(r: float, order: int = 24):
    """Nodes q (on |q| = r, centred at 0), outward unit normals and surface
    weights, so that int_{|q|=r} Dq f(q) ~ sum_m w_m n_m f(q_m)."""
    u, _, w, dS = _sphere_cached(float(r), int(order))
    return u * r, u, w * dS


def sphere_integral(omega: QForm, r: float, order: int = 24, center=None) -> Quat:
    """C_r(omega): integral of a 3-form over |q - center| = r, outward orientation."""
    if omega.degree != 3:
        raise DegreeMismatch("sphere integrals take 3-forms")
    u, minors, w, _ = _sphere_cached(float(r), int(order))
    c = np.zeros(4) if center is None else Quat.coerce(center).array
    pts = u * r + c
    coef = omega.coeffs(pts)
    return Quat.from_array(np.einsum("m,ms,msa->a", w, minors, coef))


def residue_at(f: Callable, a=0.0, r: float = 1.0, order: int = 24) -> Quat:
    """(1/2 pi^2) int_{|q-a|=r} Dq f(q)."""
    nodes, normals, w = sphere_nodes(r, order)
    pts = nodes + Quat.coerce(a).array
    fv = _values(f, pts)
    return Quat.from_array(qmul(normals, fv).T @ w / TWO_PI2)


# ---------------------------------------------------------------------------
# periods


def _segment_hits(lat: Lattice, a: np.ndarray, b: np.ndarray, tol: float = 1e-9) -> bool:
    reach = max(math.sqrt(qnorm(a)), math.sqrt(qnorm(b))) + 1e-6
    pts = np.concatenate([np.zeros((1, 4)), lat.points(reach)])
    d = b - a
    t = np.clip(((pts - a) @ d) / max(qnorm(d), 1e-300), 0.0, 1.0)
    near = a + t[:, None] * d
    return bool(np.min(qnorm(pts - near)) < tol * tol)


def period_1form(lat: Lattice, f: Callable = None, form: QForm = None, base=None,
                 order: int = 24, check_poles: bool = True) -> np.ndarray:
    """P = (int_{gamma_h} omega)_h: from a potential f as f(base + lambda_h) - f(base),
    or by line quadrature of a 1-form.  ``base`` defaults to -lambda_h / 2."""
    out = np.zeros((4, 4))
    for h in range(1, 5):
        lam = lat.matrix[h - 1]
        a = -0.5 * lam if base is None else Quat.coerce(base).array
        b = a + lam
        if f is not None:
            if check_poles and (lat.contains(a) or lat.contains(b)):
                raise PoleOnPath(f"endpoint of gamma_{h} is a lattice point")
            vals = _values(f, np.stack([b, a]))
            out[h - 1] = vals[0] - vals[1]
        else:
            if check_poles and _segment_hits(lat, a, b):
                raise PoleOnPath(f"gamma_{h} passes through a lattice point")
            out[h - 1] = integrate_cube(form, segment(lat, h, a), order).array
    return out


def period_3form(lat: Lattice, omega: QForm, order: int = 24) -> np.ndarray:
    """P = (int_{xi^(h)} omega)_h."""
    return np.array([integrate_cube(omega, face(lat, h), order).array for h in range(1, 5)])


def apply_jq_left(lat: Lattice, p: np.ndarray) -> np.ndarray:
    """(JQ P)_h = sum_l (JQ)_{hl} P_l."""
    jq = lat.jq
    return np.array([qmul(jq[h], p).sum(axis=0) for h in range(4)])


def apply_jq_right(lat: Lattice, p: np.ndarray) -> np.ndarray:
    """(P JQ)_h = sum_l P_l (JQ)_{hl}."""
    jq = lat.jq
    return np.array([qmul(p, jq[h]).sum(axis=0) for h in range(4)])


def pjp(p3: np.ndarray, p1: np.ndarray) -> np.ndarray:
    """sum_h P3_h J_hh P1_h."""
    return (np.diag(J)[:, None] * qmul(p3, p1)).sum(axis=0)


# ---------------------------------------------------------------------------
# reports


def _qlist(v) -> list:
    return np.asarray(v.array if isinstance(v, Quat) else v, dtype=float).reshape(-1).tolist()


def _finite_or_none(x: float):
    return x if math.isfinite(x) else None


@dataclass(frozen=True)
class ResidualReport:
    identity: str
    lhs: Tuple[float, ...]
    rhs: Tuple[float, ...]
    params: Dict = field(default_factory=dict)
    note: str = ""

    @classmethod
    def make(cls, identity: str, lhs, rhs, note: str = "", **params) -> "ResidualReport":
        return cls(identity, tuple(_qlist(lhs)), tuple(_qlist(rhs)), dict(params), note)

    @property
    def abs_residual(self) -> float:
        return float(np.linalg.norm(np.subtract(self.lhs, self.rhs)))

    @property
    def rel_residual(self) -> float:
        scale = float(np.linalg.norm(self.rhs))
        if scale == 0.0:
            return 0.0 if self.abs_residual == 0.0 else math.inf
        return self.abs_residual / scale

    def to_dict(self) -> dict:
        p = {k: self.params.get(k) for k in ("R", "quad_order", "r", "seed")}
        p.update({k: v for k, v in self.params.items() if k not in p})
        d = {
            "identity": self.identity,
            "lhs": list(self.lhs),
            "rhs": list(self.rhs),
            "abs_residual": _finite_or_none(self.abs_residual),
            "rel_residual": _finite_or_none(self.rel_residual),
            "params": p,
        }
        if self.note:
            d["note"] = self.note
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


# ---------------------------------------------------------------------------
# verification harness


def halton_cell(lat: Lattice, n: int, seed: int = 0) -> np.ndarray:
    """n scrambled-Halton points of the centred cell."""
    from scipy.stats.qmc import Halton

    t = Halton(d=4, scramble=True, seed=seed).random(n)
    return (t - 0.5) @ lat.matrix


def region_integral(lat: Lattice, form4: QForm, r: float, n: int, seed: int = 0,
                    block: int = 20_000) -> Quat:
    """Quasi-Monte Carlo integral of a 4-form over int(xi) minus B_r(0)."""
    pts = halton_cell(lat, n, seed)
    total = np.zeros(4)
    for s in range(0, n, block):
        p = pts[s : s + block]
        p = p[qnorm(p) >= r * r]
        if len(p):
            total += top_coefficient(form4, p).sum(axis=0)
    return Quat.from_array(total * lat.covolume / n)


def cell_integral(lat: Lattice, func: Callable, order: int = 8) -> float:
    """Gauss-Legendre integral over the fundamental cell of a real function."""
    t, w = _tensor_nodes(4, order)
    pts = cell(lat).point(t)
    return float(w @ np.asarray(func(pts), dtype=float) * lat.covolume)


def check_fprop(lat: Lattice, omega3: QForm, f: Callable, omega1: QForm, r: float,
                n: int = 200_000, seed: int = 0, order: int = 24) -> ResidualReport:
    """int_{U_r} omega3 ^ omega1 + tP(omega3) J P(omega1)  vs  C_r(omega3 f)."""
    inner = region_integral(lat, omega3.wedge(omega1), r, n, seed)
    p3 = period_3form(lat, omega3, order)
    p1 = period_1form(lat, f)
    lhs = inner.array + pjp(p3, p1)
    rhs = sphere_integral(omega3.right(f), r, order)
    return ResidualReport.make("fprop", lhs, rhs, r=r, quad_order=order, seed=seed, n=n)


def check_thm1_i(lat: Lattice, f: Callable, df: QForm, g_form: QForm, g_period: np.ndarray,
                 r: float, n: int = 200_000, seed: int = 0, order: int = 24) -> List[ResidualReport]:
    """tP(w') Q P(w) against -/+ int_{U_r} R(w') ^ w - C_r(R(w') f), both signs."""
    rw = map_LR(g_form, "right")
    inner = region_integral(lat, rw.wedge(df), r, n, seed).array
    cr = sphere_integral(rw.right(f), r, order).array
    lhs = bilinear(g_period, lat.gram_q, period_1form(lat, f))
    params = dict(r=r, quad_order=order, seed=seed, n=n)
    return [
        ResidualReport.make("thm1.i (stated: -int)", lhs, -inner - cr, **params),
        ResidualReport.make("thm1.i (+int)", lhs, inner - cr, **params),
    ]


def check_ii_second(lat: Lattice, eta: np.ndarray, f: Callable, df: QForm, r: float,
                    order: int = 32, **params) -> ResidualReport:
    """tP(w) Q P(w) + C_r(R(w) f) with w = df (meromorphic, regular away from L)."""
    lhs = bilinear(eta, lat.gram_q, eta)
    rhs = -sphere_integral(map_LR(df, "right").right(f), r, order).array
    return ResidualReport.make("thm1.ii.second", lhs, rhs, r=r, quad_order=order, **params)


def check_ii_third(lat: Lattice, eta: np.ndarray, f: Callable, r: float, order: int = 24,
                   **params) -> ResidualReport:
    lhs = qdot(lat.lambda_hat, eta)
    rhs = TWO_PI2 * residue_at(f, 0.0, r, order).array
    return ResidualReport.make("thm1.ii.third", lhs, rhs, r=r, quad_order=order, **params)


def check_iii(lat: Lattice, f: Callable, df: QForm, dl_abs2: Callable,
              g_period: Optional[np.ndarray] = None, order: int = 8) -> List[ResidualReport]:
    """Identities for an everywhere-regular w = df: tlhat P = 0, tP' Q P = 0 and
    tconj(P) Q P = -c int_X |d_l f|^2 dv (c reported)."""
    p = period_1form(lat, f, check_poles=False)
    out = [ResidualReport.make("thm1.iii.lambda_hat", qdot(lat.lambda_hat, p), Quat(), quad_order=order)]
    if g_period is not None:
        out.append(ResidualReport.make("thm1.iii.bilinear", bilinear(g_period, lat.gram_q, p), Quat()))
    norm_int = cell_integral(lat, dl_abs2, order)
    lhs = bilinear(qconj(p), lat.gram_q, p)
    c = -lhs[0] / norm_int if norm_int else math.nan
    out.append(
        ResidualReport.make(
            "thm1.iii.norm", lhs, Quat(-c * norm_int), quad_order=order, c=c,
            note=f"measured c = {c:.12g}; stated c = 1",
        )
    )
    return out


def dvlem_constant(df: QForm, dl_abs2: Callable, points: np.ndarray) -> Tuple[float, float]:
    """Estimate c in R(conj w) ^ w = -c |d_l f|^2 dv at the given points.

    Returns ``(c, spread)`` where spread is the largest deviation of the
    pointwise ratio (including imaginary parts) from c.
    """
    form = map_LR(df.conj(), "right").wedge(df)
    top = top_coefficient(form, points)
    n2 = np.asarray(dl_abs2(points), dtype=float)
    ratios = -top / n2[:, None]
    c = float(np.mean(ratios[:, 0]))
    spread = float(np.max(np.abs(ratios - np.array([c, 0, 0, 0]))))
    return c, spread


def check_qm(ctx: OrderContext, a, eta: np.ndarray, **params) -> List[ResidualReport]:
    """tlhat U_a eta = 2 pi^2 conj(a), and the intermediate form with conj(a)^{-1}."""
    lat = as_lattice(ctx)
    a = Quat.coerce(a)
    u = u_matrix(ctx, a).astype(float)
    ueta = u @ eta
    lhs = qdot(lat.lambda_hat, ueta)
    inter = qdot(lat.lambda_hat, qmul(ueta, a.conj().inv().array[None, :]))
    return [
        ResidualReport.make(f"qm a={_fmt(a)}", lhs, a.conj() * TWO_PI2, **params),
        ResidualReport.make(f"qm.rel1 a={_fmt(a)}", inter, Quat(TWO_PI2), **params),
    ]


def _fmt(a: Quat) -> str:
    return ",".join(f"{x:g}" for x in a)
