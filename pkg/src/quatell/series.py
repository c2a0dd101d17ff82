"""Truncated power series in Z1, Z2, Z3 with quaternion coefficients.

A left-regular function sum_nu P_nu(q) a_nu is encoded by its restriction to
the pure quaternions x = x1 e1 + x2 e2 + x3 e3.  Since
P_nu(x) = (-1)^|nu| x^nu / nu!, the encoding is

    sum_nu P_nu a_nu  ->  sum_nu (-1)^|nu| Z^nu / (n1! n2! n3!) a_nu,

and the Cauchy product of encodings corresponds to the CK-product of the
functions (the regular extension of the pointwise product on H_0).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Dict, Mapping, Tuple

import numpy as np

from .algebra import DomainError, MultiIndex, Quat, QuatellError, indices_upto, qmul
from .regular import HomogeneousRegular, fueter_table, kernel

DEFAULT_DEGREE = 12


class TruncationMismatch(QuatellError):
    pass


def _index_arrays(degree: int):
    idx = indices_upto(degree)
    pos = {nu: i for i, nu in enumerate(idx)}
    return idx, pos


@dataclass(frozen=True, eq=False)
class QSeries:
    """sum_{|nu| <= degree} Z^nu c_nu, coefficients stored densely in the
    order of ``indices_upto(degree)`` as an array of shape (count, 4)."""

    degree: int
    coeffs: np.ndarray

    def __post_init__(self):
        c = np.array(self.coeffs, dtype=float)
        if c.shape != (len(indices_upto(self.degree)), 4):
            raise ValueError("coefficient array has the wrong shape")
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    @classmethod
    def zero(cls, degree: int = DEFAULT_DEGREE) -> "QSeries":
        return cls(degree, np.zeros((len(indices_upto(degree)), 4)))

    @classmethod
    def constant(cls, c, degree: int = DEFAULT_DEGREE) -> "QSeries":
        out = np.zeros((len(indices_upto(degree)), 4))
        out[0] = Quat.coerce(c).array
        return cls(degree, out)

    @classmethod
    def from_dict(cls, coeffs: Mapping, degree: int = DEFAULT_DEGREE) -> "QSeries":
        _, pos = _index_arrays(degree)
        out = np.zeros((len(pos), 4))
        for nu, c in coeffs.items():
            nu = MultiIndex(*nu)
            if nu.degree <= degree:
                out[pos[nu]] += Quat.coerce(c).array
        return cls(degree, out)

    def as_dict(self) -> Dict[MultiIndex, Quat]:
        idx, _ = _index_arrays(self.degree)
        return {nu: Quat.from_array(c) for nu, c in zip(idx, self.coeffs) if np.any(c)}

    def coefficient(self, nu) -> Quat:
        _, pos = _index_arrays(self.degree)
        return Quat.from_array(self.coeffs[pos[MultiIndex(*nu)]])

    def __add__(self, other: "QSeries") -> "QSeries":
        _check(self, other)
        return QSeries(self.degree, self.coeffs + other.coeffs)

    def __sub__(self, other: "QSeries") -> "QSeries":
        _check(self, other)
        return QSeries(self.degree, self.coeffs - other.coeffs)

    def scale(self, s: float) -> "QSeries":
        return QSeries(self.degree, self.coeffs * s)

    def evaluate(self, x) -> np.ndarray:
        """Value at real points x = (x1, x2, x3) (array (..., 3)); Z_j -> x_j."""
        x = np.asarray(x, dtype=float)
        idx, _ = _index_arrays(self.degree)
        exps = np.array(idx, dtype=np.int64)
        mono = np.prod(x[..., None, :] ** exps, axis=-1)
        return mono @ self.coeffs

    def isclose(self, other: "QSeries", tol: float = 1e-12) -> bool:
        _check(self, other)
        return bool(np.max(np.abs(self.coeffs - other.coeffs)) <= tol)


def _check(a: QSeries, b: QSeries):
    if a.degree != b.degree:
        raise TruncationMismatch(f"degrees {a.degree} and {b.degree} differ")


def ck_mul(f: QSeries, g: QSeries) -> QSeries:
    """Truncated Cauchy product; coefficients multiply in the order f then g.

    Cost is O(D^6) quaternion products for truncation degree D.
    """
    _check(f, g)
    idx, pos = _index_arrays(f.degree)
    out = np.zeros_like(f.coeffs)
    gi = np.array(idx)
    for i, mu in enumerate(idx):
        a = f.coeffs[i]
        if not np.any(a):
            continue
        room = f.degree - mu.degree
        sel = [j for j, nu in enumerate(idx) if nu.degree <= room]
        targets = [pos[MultiIndex(*(np.array(mu) + gi[j]))] for j in sel]
        np.add.at(out, targets, qmul(a[None, :], g.coeffs[sel]))
    return QSeries(f.degree, out)


def series_of(f, degree: int = DEFAULT_DEGREE) -> QSeries:
    """Encoding of sum_nu P_nu a_nu given as a coefficient map, a
    :class:`HomogeneousRegular`, or a sequence of those."""
    if isinstance(f, HomogeneousRegular):
        coeffs = dict(f.coefficients)
    elif isinstance(f, Mapping):
        coeffs = dict(f)
    else:
        coeffs = {}
        for part in f:
            for nu, c in (part.coefficients if isinstance(part, HomogeneousRegular) else part).items():
                nu = MultiIndex(*nu)
                coeffs[nu] = Quat.coerce(coeffs.get(nu, Quat())) + Quat.coerce(c)
    out = {}
    for nu, c in coeffs.items():
        nu = MultiIndex(*nu)
        out[nu] = Quat.coerce(c) * ((-1) ** nu.degree / nu.factorial())
    return QSeries.from_dict(out, degree)


def coefficients_of(s: QSeries) -> Dict[MultiIndex, Quat]:
    """Inverse of :func:`series_of`: the map nu -> a_nu."""
    return {nu: c * ((-1) ** nu.degree * nu.factorial()) for nu, c in s.as_dict().items()}


def regular_from_series(s: QSeries) -> Callable:
    """The regular function sum P_nu a_nu encoded by ``s``."""
    coeffs = coefficients_of(s)
    top = s.degree

    def f(q):
        scalar = isinstance(q, Quat)
        arr = q.array if scalar else np.asarray(q, dtype=float)
        table = fueter_table(arr, top)
        out = np.zeros(arr.shape)
        for nu, a in coeffs.items():
            out += qmul(table[nu], a.array)
        return Quat.from_array(out) if scalar else out

    return f


# ---------------------------------------------------------------------------
# expansions of G_mu


def shift_expansion(mu, p, degree: int = DEFAULT_DEGREE) -> Dict[MultiIndex, Quat]:
    """Coefficients (-1)^|nu| G_{nu+mu}(p) of G_mu(p + q) = sum_nu P_nu(q) coef(nu).

    The same coefficients also expand G_mu(p + q) = sum_nu coef(nu) P_nu(q).
    """
    mu = MultiIndex(*mu)
    p = Quat.coerce(p)
    if p.norm() == 0.0:
        raise DomainError("expansion point must be non-zero")
    top = mu.degree + degree
    out = {}
    for nu in indices_upto(degree):
        ker = kernel(nu.plus(mu), max_degree=max(top, 12))
        out[nu] = Quat.from_array(ker(p.array)) * ((-1) ** nu.degree)
    return out


def sum_expansion(coeffs: Mapping, q, order: str = "right", upto: int | None = None) -> Quat:
    """sum_nu P_nu(q) c_nu (order "right") or sum_nu c_nu P_nu(q) ("left")."""
    q = Quat.coerce(q)
    top = max(MultiIndex(*nu).degree for nu in coeffs)
    if upto is not None:
        top = min(top, upto)
    table = fueter_table(q.array, top)
    acc = np.zeros(4)
    for nu, c in coeffs.items():
        nu = MultiIndex(*nu)
        if nu.degree > top:
            continue
        c = Quat.coerce(c).array
        acc += qmul(table[nu], c) if order == "right" else qmul(c, table[nu])
    return Quat.from_array(acc)


def coeffs_from_sphere(f: Callable, a=0.0, r: float = 1.0, degree: int = 2, order: int = 24
                       ) -> Tuple[Dict[MultiIndex, Quat], Dict[MultiIndex, Quat]]:
    """(a_nu, b_nu) for |nu| <= degree from integrals over the sphere |q - a| = r:

        a_nu = (1/2 pi^2) int G_nu(q - a) Dq f(q),
        b_nu = (1/2 pi^2) int P_nu(q - a) Dq f(q).
    """
    from .geometry import sphere_nodes

    a = Quat.coerce(a).array
    nodes, normals, weights = sphere_nodes(r, order)
    pts = nodes + a
    fv = f(pts)
    fv = np.asarray(fv.array if isinstance(fv, Quat) else fv, dtype=float)
    dqf = qmul(normals, fv) * weights[:, None]
    table = fueter_table(nodes, degree)
    av, bv = {}, {}
    scale = 1.0 / (2.0 * math.pi**2)
    for nu in indices_upto(degree):
        g = kernel(nu)(nodes)
        av[nu] = Quat.from_array(qmul(g, dqf).sum(axis=0) * scale)
        bv[nu] = Quat.from_array(qmul(table[nu], dqf).sum(axis=0) * scale)
    return av, bv
