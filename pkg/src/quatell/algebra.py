"""Quaternion arithmetic, multi-indices and small matrix algebra.

Quaternions are stored either as :class:`Quat` values or as numpy arrays whose
last axis has length 4, in component order ``(x0, x1, x2, x3)`` with respect to
the basis ``1, e1, e2, e3``.  The array functions broadcast over leading axes.
"""

from __future__ import annotations

import math
from functools import lru_cache
from typing import Iterable, NamedTuple, Sequence

import numpy as np

SINGULAR_THRESHOLD = 1e-9


class QuatellError(Exception):
    """Base class for domain errors raised by this package."""


class SingularMatrix(QuatellError):
    pass


class DomainError(QuatellError, ValueError):
    pass


# ---------------------------------------------------------------------------
# array kernels


def qmul(a, b):
    """Hamilton product of quaternion arrays ``a`` and ``b`` (broadcasting)."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    a0, a1, a2, a3 = a[..., 0], a[..., 1], a[..., 2], a[..., 3]
    b0, b1, b2, b3 = b[..., 0], b[..., 1], b[..., 2], b[..., 3]
    return np.stack(
        [
            a0 * b0 - a1 * b1 - a2 * b2 - a3 * b3,
            a0 * b1 + a1 * b0 + a2 * b3 - a3 * b2,
            a0 * b2 - a1 * b3 + a2 * b0 + a3 * b1,
            a0 * b3 + a1 * b2 - a2 * b1 + a3 * b0,
        ],
        axis=-1,
    )


def qconj(a):
    a = np.asarray(a, dtype=float)
    return a * np.array([1.0, -1.0, -1.0, -1.0])


def qnorm(a):
    """Reduced norm N(q) = x0^2 + x1^2 + x2^2 + x3^2 (the squared length)."""
    a = np.asarray(a, dtype=float)
    return np.einsum("...i,...i->...", a, a)


def qinv(a):
    a = np.asarray(a, dtype=float)
    n = qnorm(a)
    if np.any(n == 0.0):
        raise DomainError("quaternion inverse of 0")
    return qconj(a) / n[..., None]


def basis(alpha: int) -> np.ndarray:
    """The unit e_alpha as an array, with e_0 = 1."""
    e = np.zeros(4)
    e[alpha] = 1.0
    return e


def real(x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    out = np.zeros(x.shape + (4,))
    out[..., 0] = x
    return out


# ---------------------------------------------------------------------------
# scalar value type


class Quat:
    """An immutable quaternion ``x0 + x1 e1 + x2 e2 + x3 e3``."""

    __slots__ = ("_c",)

    def __init__(self, x0: float = 0.0, x1: float = 0.0, x2: float = 0.0, x3: float = 0.0):
        object.__setattr__(self, "_c", (float(x0), float(x1), float(x2), float(x3)))

    def __setattr__(self, name, value):
        raise AttributeError("Quat is immutable")

    @classmethod
    def from_array(cls, a) -> "Quat":
        a = np.asarray(a, dtype=float).reshape(4)
        return cls(*a)

    @classmethod
    def coerce(cls, value) -> "Quat":
        if isinstance(value, Quat):
            return value
        if isinstance(value, (int, float, np.floating, np.integer)):
            return cls(float(value))
        return cls.from_array(value)

    @property
    def x0(self) -> float:
        return self._c[0]

    @property
    def x1(self) -> float:
        return self._c[1]

    @property
    def x2(self) -> float:
        return self._c[2]

    @property
    def x3(self) -> float:
        return self._c[3]

    @property
    def array(self) -> np.ndarray:
        return np.array(self._c)

    def __iter__(self):
        return iter(self._c)

    def __getitem__(self, i):
        return self._c[i]

    def __len__(self):
        return 4

    def __repr__(self):
        return "Quat({}, {}, {}, {})".format(*(repr(c) for c in self._c))

    def __eq__(self, other):
        if isinstance(other, (int, float)):
            other = Quat(other)
        if not isinstance(other, Quat):
            return NotImplemented
        return self._c == other._c

    def __hash__(self):
        return hash(self._c)

    def __add__(self, other):
        o = Quat.coerce(other)
        return Quat(*(a + b for a, b in zip(self._c, o._c)))

    __radd__ = __add__

    def __sub__(self, other):
        o = Quat.coerce(other)
        return Quat(*(a - b for a, b in zip(self._c, o._c)))

    def __rsub__(self, other):
        return Quat.coerce(other) - self

    def __neg__(self):
        return Quat(*(-a for a in self._c))

    def __mul__(self, other):
        if isinstance(other, (int, float, np.floating, np.integer)):
            return Quat(*(a * other for a in self._c))
        a0, a1, a2, a3 = self._c
        b0, b1, b2, b3 = Quat.coerce(other)._c
        return Quat(
            a0 * b0 - a1 * b1 - a2 * b2 - a3 * b3,
            a0 * b1 + a1 * b0 + a2 * b3 - a3 * b2,
            a0 * b2 - a1 * b3 + a2 * b0 + a3 * b1,
            a0 * b3 + a1 * b2 - a2 * b1 + a3 * b0,
        )

    def __rmul__(self, other):
        if isinstance(other, (int, float, np.floating, np.integer)):
            return Quat(*(a * other for a in self._c))
        return Quat.coerce(other) * self

    def __truediv__(self, other):
        if isinstance(other, (int, float, np.floating, np.integer)):
            return Quat(*(a / other for a in self._c))
        return self * Quat.coerce(other).inv()

    def conj(self) -> "Quat":
        a0, a1, a2, a3 = self._c
        return Quat(a0, -a1, -a2, -a3)

    def norm(self) -> float:
        """Reduced norm N(q) = q conj(q)."""
        return sum(a * a for a in self._c)

    def abs(self) -> float:
        return math.sqrt(self.norm())

    def trace(self) -> "Quat":
        return Quat(2.0 * self._c[0])

    def inv(self) -> "Quat":
        n = self.norm()
        if n == 0.0:
            raise DomainError("quaternion inverse of 0")
        return self.conj() / n

    def isclose(self, other, tol: float = 1e-12) -> bool:
        o = Quat.coerce(other)
        return max(abs(a - b) for a, b in zip(self._c, o._c)) <= tol


ONE = Quat(1.0)
E1 = Quat(0.0, 1.0)
E2 = Quat(0.0, 0.0, 1.0)
E3 = Quat(0.0, 0.0, 0.0, 1.0)
UNITS = (ONE, E1, E2, E3)


def conj(q: Quat) -> Quat:
    return Quat.coerce(q).conj()


def norm(q: Quat) -> float:
    return Quat.coerce(q).norm()


def trace(q: Quat) -> Quat:
    return Quat.coerce(q).trace()


def inverse(q: Quat) -> Quat:
    return Quat.coerce(q).inv()


def as_quat_array(q) -> np.ndarray:
    if isinstance(q, Quat):
        return q.array
    return np.asarray(q, dtype=float)


# ---------------------------------------------------------------------------
# multi-indices


class MultiIndex(NamedTuple):
    n1: int
    n2: int
    n3: int

    @property
    def degree(self) -> int:
        return self.n1 + self.n2 + self.n3

    def __le__(self, other):  # componentwise partial order
        return all(a <= b for a, b in zip(self, other))

    def __ge__(self, other):
        return all(a >= b for a, b in zip(self, other))

    def __lt__(self, other):
        return self <= other and tuple(self) != tuple(other)

    def __gt__(self, other):
        return self >= other and tuple(self) != tuple(other)

    def plus(self, other) -> "MultiIndex":
        return MultiIndex(*(a + b for a, b in zip(self, other)))

    def minus(self, other) -> "MultiIndex":
        return MultiIndex(*(a - b for a, b in zip(self, other)))

    def factorial(self) -> int:
        return math.factorial(self.n1) * math.factorial(self.n2) * math.factorial(self.n3)


def delta(j: int) -> MultiIndex:
    """The unit multi-index with a one in slot j (j in 1..3)."""
    e = [0, 0, 0]
    e[j - 1] = 1
    return MultiIndex(*e)


@lru_cache(maxsize=None)
def sigma(n: int) -> tuple:
    """All multi-indices of degree n in lexicographic order."""
    if n < 0:
        raise ValueError("degree must be non-negative")
    out = [
        MultiIndex(a, b, n - a - b)
        for a in range(n + 1)
        for b in range(n + 1 - a)
    ]
    return tuple(sorted(out))


def indices_upto(n: int) -> tuple:
    return tuple(nu for d in range(n + 1) for nu in sigma(d))


# ---------------------------------------------------------------------------
# real 4x4 matrices


def det4(m) -> float:
    """Determinant of a 4x4 matrix by cofactor expansion along the first row."""
    m = np.asarray(m, dtype=float)
    return float(sum((-1) ** j * m[0, j] * _det3(_minor(m, 0, j)) for j in range(4)))


def _det3(a) -> float:
    return (
        a[0, 0] * (a[1, 1] * a[2, 2] - a[1, 2] * a[2, 1])
        - a[0, 1] * (a[1, 0] * a[2, 2] - a[1, 2] * a[2, 0])
        + a[0, 2] * (a[1, 0] * a[2, 1] - a[1, 1] * a[2, 0])
    )


def _minor(m, i, j):
    return np.delete(np.delete(m, i, axis=0), j, axis=1)


def cofactor_matrix(m) -> np.ndarray:
    m = np.asarray(m, dtype=float)
    c = np.empty((4, 4))
    for i in range(4):
        for j in range(4):
            c[i, j] = (-1) ** (i + j) * _det3(_minor(m, i, j))
    return c


def mat4_invert(m, threshold: float = SINGULAR_THRESHOLD):
    """Return ``(inverse, determinant)`` of a real 4x4 matrix via cofactors."""
    m = np.asarray(m, dtype=float)
    if m.shape != (4, 4):
        raise ValueError("expected a 4x4 matrix")
    d = det4(m)
    if abs(d) <= threshold:
        raise SingularMatrix(f"|det| = {abs(d):.3e} below threshold {threshold:g}")
    return cofactor_matrix(m).T / d, d


J = np.diag([1.0, -1.0, 1.0, -1.0])


# ---------------------------------------------------------------------------
# quaternion vectors and matrices (arrays of shape (4, 4) and (4, 4, 4))


def qmat_apply_left(m, v):
    """(M v)_h = sum_l M[h, l] * v[l], entries of M on the left."""
    m = np.asarray(m, dtype=float)
    v = np.asarray(v, dtype=float)
    if m.ndim == 2:
        m = real(m)
    return qmul(m, v[None, :, :]).sum(axis=1)


def qmat_apply_right(m, v):
    """(M v)_h = sum_l v[l] * M[h, l], entries of M on the right."""
    m = np.asarray(m, dtype=float)
    v = np.asarray(v, dtype=float)
    if m.ndim == 2:
        m = real(m)
    return qmul(v[None, :, :], m).sum(axis=1)


def qdot(u, v):
    """sum_h u[h] * v[h] in this order."""
    return qmul(np.asarray(u, dtype=float), np.asarray(v, dtype=float)).sum(axis=0)


def bilinear(u, m, v):
    """sum_{h,l} u[h] * M[h, l] * v[l], evaluated in exactly this order."""
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    m = np.asarray(m, dtype=float)
    if m.ndim == 2:
        m = real(m)
    return qmul(qmul(u[:, None, :], m), v[None, :, :]).sum(axis=(0, 1))


def to_list(a) -> list:
    """Quaternion array to nested lists of floats (JSON encoding order)."""
    return np.asarray(a, dtype=float).tolist()


def quats(values: Iterable) -> np.ndarray:
    return np.array([as_quat_array(v) for v in values], dtype=float)


def qvec(values: Sequence) -> np.ndarray:
    v = quats(values)
    if v.shape != (4, 4):
        raise ValueError("expected four quaternions")
    return v
