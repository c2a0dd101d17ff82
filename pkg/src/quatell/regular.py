"""Homogeneous regular functions: z_j, Fueter polynomials P_nu, the Cauchy-Fueter
kernel G and its x-derivatives G_nu, inversion, and the Fueter operators.

All evaluators take a quaternion (``Quat``) or an array of shape ``(..., 4)``
and return the same kind of object.
"""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Dict, Mapping, Tuple

import numpy as np

from .algebra import (
    DomainError,
    MultiIndex,
    Quat,
    QuatellError,
    basis,
    indices_upto,
    qconj,
    qinv,
    qmul,
    qnorm,
    sigma,
)

MAX_DEGREE = 12


class DegreeTooLarge(QuatellError):
    pass


def _wrap(fn):
    """Let an array evaluator accept and return ``Quat`` scalars."""

    def wrapped(*args, q):
        if isinstance(q, Quat):
            return Quat.from_array(fn(*args, q.array))
        return fn(*args, np.asarray(q, dtype=float))

    return wrapped


# ---------------------------------------------------------------------------
# z_j and P_nu


def _z(j: int, q: np.ndarray) -> np.ndarray:
    if j not in (1, 2, 3):
        raise ValueError("j must be 1, 2 or 3")
    out = np.zeros(q.shape)
    out[..., 0] = -q[..., j]
    out[..., j] = q[..., 0]
    return out


def eval_z(j: int, q):
    """z_j(q) = t e_j - x_j."""
    return _wrap(_z)(j, q=q)


def fueter_table(q: np.ndarray, degree: int) -> Dict[MultiIndex, np.ndarray]:
    """P_nu(q) for every |nu| <= degree, by the recursion n P_nu = sum_j z_j P_{nu - delta_j}."""
    q = np.asarray(q, dtype=float)
    zs = [_z(j, q) for j in (1, 2, 3)]
    one = np.zeros(q.shape)
    one[..., 0] = 1.0
    table = {MultiIndex(0, 0, 0): one}
    for n in range(1, degree + 1):
        for nu in sigma(n):
            acc = np.zeros(q.shape)
            for j in range(3):
                if nu[j] > 0:
                    lower = list(nu)
                    lower[j] -= 1
                    acc += qmul(zs[j], table[MultiIndex(*lower)])
            table[nu] = acc / n
    return table


def _P(nu, q):
    nu = MultiIndex(*nu)
    return fueter_table(q, nu.degree)[nu]


def eval_P(nu, q):
    """The Fueter polynomial P_nu at q."""
    return _wrap(_P)(nu, q=q)


def eval_P_bruteforce(nu, q) -> Quat:
    """P_nu from its defining symmetrised sum over distinct index tuples."""
    from itertools import permutations

    nu = MultiIndex(*nu)
    q = Quat.coerce(q)
    letters = [1] * nu.n1 + [2] * nu.n2 + [3] * nu.n3
    tuples = set(permutations(letters))
    total = Quat()
    for tup in tuples:
        term = Quat(1.0)
        for j in tup:
            term = term * eval_z(j, q)
        total = total + term
    return total / math.factorial(nu.degree)


# ---------------------------------------------------------------------------
# G and the exact rational kernels G_nu


def _G(q):
    n = qnorm(q)
    if np.any(n == 0.0):
        raise DomainError("G is singular at 0")
    return qconj(q) / (n * n)[..., None]


def eval_G(q):
    """Cauchy-Fueter kernel G(q) = q^{-1} / N(q) = conj(q) / N(q)^2."""
    return _wrap(_G)(q=q)


Monomial = Tuple[int, int, int, int]


@dataclass(frozen=True)
class RationalKernel:
    """``numerator(q) / N(q)**k`` with an exact integer-coefficient numerator.

    ``terms`` maps exponent tuples ``(a0, a1, a2, a3)`` of ``t, x1, x2, x3`` to
    integer quaternion coefficients ``(c0, c1, c2, c3)``.
    """

    k: int
    terms: Tuple[Tuple[Monomial, Tuple[int, int, int, int]], ...]
    _cache: dict = field(default_factory=dict, compare=False, repr=False, hash=False)

    @classmethod
    def from_dict(cls, k: int, terms: Mapping) -> "RationalKernel":
        clean = tuple(
            sorted((tuple(m), tuple(int(c) for c in coef)) for m, coef in terms.items() if any(coef))
        )
        return cls(k, clean)

    @property
    def numerator_degree(self) -> int:
        return max((sum(m) for m, _ in self.terms), default=0)

    @property
    def degree(self) -> int:
        """Homogeneity degree of the kernel."""
        return self.numerator_degree - 2 * self.k

    def as_dict(self) -> Dict[Monomial, Tuple[int, ...]]:
        return dict(self.terms)

    def derivative(self, alpha: int) -> "RationalKernel":
        """Exact d/dx_alpha (alpha = 0 for t) by the quotient rule."""
        out: Dict[Monomial, list] = {}

        def add(mono, coef, scale):
            slot = out.setdefault(mono, [0, 0, 0, 0])
            for i in range(4):
                slot[i] += scale * coef[i]

        for mono, coef in self.terms:
            # d(P) * N
            if mono[alpha] > 0:
                dm = list(mono)
                dm[alpha] -= 1
                for beta in range(4):
                    m2 = list(dm)
                    m2[beta] += 2
                    add(tuple(m2), coef, mono[alpha])
            # - 2k x_alpha P
            m3 = list(mono)
            m3[alpha] += 1
            add(tuple(m3), coef, -2 * self.k)
        return RationalKernel.from_dict(self.k + 1, out)

    def _arrays(self):
        if "arrays" not in self._cache:
            monos = np.array([m for m, _ in self.terms], dtype=np.int64).reshape(-1, 4)
            coefs = np.array([c for _, c in self.terms], dtype=float).reshape(-1, 4)
            self._cache["arrays"] = (monos, coefs)
        return self._cache["arrays"]

    def numerator(self, q) -> np.ndarray:
        q = np.asarray(q, dtype=float)
        monos, coefs = self._arrays()
        return monomial_matrix(q, monos) @ coefs

    def evaluate(self, q):
        """Value at q (``Quat`` or array), evaluated on the unit sphere and rescaled."""
        if isinstance(q, Quat):
            return Quat.from_array(self.evaluate(q.array))
        q = np.asarray(q, dtype=float)
        n = qnorm(q)
        if np.any(n == 0.0):
            raise DomainError("rational kernel evaluated at its pole")
        r = np.sqrt(n)
        u = q / r[..., None]
        return self.numerator(u) * (r ** self.degree)[..., None]

    __call__ = evaluate

    def restrict_to_pure(self) -> Dict[Tuple[int, int, int], Tuple[int, ...]]:
        """Numerator restricted to t = 0, as a polynomial in x1, x2, x3."""
        out: Dict[Tuple[int, int, int], list] = {}
        for mono, coef in self.terms:
            if mono[0] == 0:
                slot = out.setdefault(mono[1:], [0, 0, 0, 0])
                for i in range(4):
                    slot[i] += coef[i]
        return {m: tuple(c) for m, c in out.items() if any(c)}


def monomial_matrix(q: np.ndarray, monos: np.ndarray) -> np.ndarray:
    """Values of the monomials ``monos`` (rows of exponents) at points ``q``."""
    top = int(monos.max()) if monos.size else 0
    flat = q.reshape(-1, 4)
    powers = np.ones((top + 1, flat.shape[0], 4))
    for d in range(1, top + 1):
        powers[d] = powers[d - 1] * flat
    vals = (
        powers[monos[:, 0], :, 0]
        * powers[monos[:, 1], :, 1]
        * powers[monos[:, 2], :, 2]
        * powers[monos[:, 3], :, 3]
    )
    return vals.T.reshape(q.shape[:-1] + (monos.shape[0],))


_G_KERNEL = RationalKernel.from_dict(
    2,
    {(1, 0, 0, 0): (1, 0, 0, 0), (0, 1, 0, 0): (0, -1, 0, 0), (0, 0, 1, 0): (0, 0, -1, 0), (0, 0, 0, 1): (0, 0, 0, -1)},
)

_kernel_lock = threading.Lock()
_kernel_table: Dict[MultiIndex, RationalKernel] = {MultiIndex(0, 0, 0): _G_KERNEL}


def kernel(nu, max_degree: int = MAX_DEGREE) -> RationalKernel:
    """Exact rational form of G_nu = d^nu G / dx^nu."""
    nu = MultiIndex(*nu)
    if nu.degree > max_degree:
        raise DegreeTooLarge(f"|nu| = {nu.degree} exceeds {max_degree}")
    with _kernel_lock:
        return _kernel_locked(nu)


def _kernel_locked(nu: MultiIndex) -> RationalKernel:
    if nu in _kernel_table:
        return _kernel_table[nu]
    j = next(i for i in (2, 1, 0) if nu[i] > 0)
    lower = list(nu)
    lower[j] -= 1
    result = _kernel_locked(MultiIndex(*lower)).derivative(j + 1)
    _kernel_table[nu] = result
    return result


def eval_G_nu(nu, q):
    return kernel(nu)(q)


def pole_order(ker: RationalKernel) -> int:
    """Smallest power k with N^k * G_nu|_{H_0} polynomial, N = x1^2 + x2^2 + x3^2."""
    poly = ker.restrict_to_pure()
    k = ker.k
    while k > 0 and poly:
        quotient = _divide_by_n(poly)
        if quotient is None:
            break
        poly, k = quotient, k - 1
    return k


def _divide_by_n(poly):
    """Exact division by x1^2 + x2^2 + x3^2, or None if it does not divide."""
    rem = {m: list(c) for m, c in poly.items()}
    quot: Dict[Tuple[int, int, int], list] = {}
    while rem:
        lead = max(rem, key=lambda m: (m[0], m[1], m[2]))
        coef = rem[lead]
        if lead[0] < 2:
            return None
        qm = (lead[0] - 2, lead[1], lead[2])
        quot[qm] = [a + b for a, b in zip(quot.get(qm, [0] * 4), coef)]
        for sub in ((2, 0, 0), (0, 2, 0), (0, 0, 2)):
            m = (qm[0] + sub[0], qm[1] + sub[1], qm[2] + sub[2])
            slot = rem.setdefault(m, [0, 0, 0, 0])
            for i in range(4):
                slot[i] -= coef[i]
            if not any(slot):
                del rem[m]
    return {m: tuple(c) for m, c in quot.items() if any(c)}


# ---------------------------------------------------------------------------
# inversion and bounds


def kelvin_inversion(f: Callable) -> Callable:
    """(R f)(q) = q^{-1} f(q^{-1}) / N(q)."""

    def rf(q):
        scalar = isinstance(q, Quat)
        arr = q.array if scalar else np.asarray(q, dtype=float)
        if np.any(qnorm(arr) == 0.0):
            raise DomainError("inversion undefined at 0")
        qi = qinv(arr)
        fv = f(Quat.from_array(qi)) if scalar else f(qi)
        fv = fv.array if isinstance(fv, Quat) else np.asarray(fv, dtype=float)
        out = qmul(qi, fv) / qnorm(arr)[..., None]
        return Quat.from_array(out) if scalar else out

    return rf


def sphere_samples(count: int) -> np.ndarray:
    """Deterministic, roughly uniform points on the unit 3-sphere (Halton + Gaussian map)."""
    from scipy.stats import norm as gaussian
    from scipy.stats.qmc import Halton

    pts = Halton(d=4, scramble=False).random(count + 1)[1:]
    g = gaussian.ppf(np.clip(pts, 1e-12, 1 - 1e-12))
    return g / np.linalg.norm(g, axis=1)[:, None]


@lru_cache(maxsize=None)
def bound_constant(n: int, samples: int = 10_000, safety: float = 1.5) -> float:
    """C_n with |G_nu(q)| <= C_n / |q|^(n+3) for every |nu| = n."""
    if n > MAX_DEGREE:
        raise DegreeTooLarge(f"n = {n} exceeds {MAX_DEGREE}")
    u = sphere_samples(samples)
    sup = 0.0
    for nu in sigma(n):
        vals = kernel(nu).numerator(u)
        sup = max(sup, float(np.sqrt(qnorm(vals)).max()))
    return safety * sup


# ---------------------------------------------------------------------------
# homogeneous regular functions


@dataclass(frozen=True)
class HomogeneousRegular:
    """sum over |nu| = degree of P_nu(q) a_nu, with right coefficients a_nu."""

    degree: int
    coefficients: Mapping

    def __call__(self, q):
        scalar = isinstance(q, Quat)
        arr = q.array if scalar else np.asarray(q, dtype=float)
        table = fueter_table(arr, self.degree)
        out = np.zeros(arr.shape)
        for nu, a in self.coefficients.items():
            out += qmul(table[MultiIndex(*nu)], np.asarray(Quat.coerce(a).array))
        return Quat.from_array(out) if scalar else out


def regular_polynomial(coefficients: Mapping) -> Callable:
    """sum_nu P_nu(q) a_nu for a finite coefficient map (any degrees)."""
    top = max((MultiIndex(*nu).degree for nu in coefficients), default=0)

    def f(q):
        scalar = isinstance(q, Quat)
        arr = q.array if scalar else np.asarray(q, dtype=float)
        table = fueter_table(arr, top)
        out = np.zeros(arr.shape)
        for nu, a in coefficients.items():
            out += qmul(table[MultiIndex(*nu)], Quat.coerce(a).array)
        return Quat.from_array(out) if scalar else out

    return f


# ---------------------------------------------------------------------------
# Fueter operators by central differences

FD_STEP = 1e-5


def gradient(f: Callable, q, h: float = FD_STEP) -> np.ndarray:
    """Central-difference partials (d/dt, d/dx1, d/dx2, d/dx3) of f at q, shape (4, 4)."""
    q = Quat.coerce(q).array
    out = np.empty((4, 4))
    for alpha in range(4):
        step = basis(alpha) * h
        fp = np.asarray(Quat.coerce(f(Quat.from_array(q + step))).array)
        fm = np.asarray(Quat.coerce(f(Quat.from_array(q - step))).array)
        out[alpha] = (fp - fm) / (2 * h)
    return out


def _fueter(f, q, h, conjugate: bool, right: bool) -> Quat:
    g = gradient(f, q, h)
    acc = g[0].copy()
    sign = 1.0 if conjugate else -1.0
    for j in (1, 2, 3):
        acc += sign * (qmul(g[j], basis(j)) if right else qmul(basis(j), g[j]))
    return Quat.from_array(acc / 2)


def dbar_l(f: Callable, q, h: float = FD_STEP) -> Quat:
    """(1/2)(df/dt + sum e_j df/dx_j); vanishes for left-regular f."""
    return _fueter(f, q, h, conjugate=True, right=False)


def d_l(f: Callable, q, h: float = FD_STEP) -> Quat:
    return _fueter(f, q, h, conjugate=False, right=False)


def dbar_r(f: Callable, q, h: float = FD_STEP) -> Quat:
    return _fueter(f, q, h, conjugate=True, right=True)


def d_r(f: Callable, q, h: float = FD_STEP) -> Quat:
    return _fueter(f, q, h, conjugate=False, right=True)


def partial_nu(f: Callable, nu, q, h: float = 1e-3) -> Quat:
    """Finite-difference d^nu f / dx^nu by nested central differences."""
    nu = MultiIndex(*nu)
    if nu.degree == 0:
        return Quat.coerce(f(Quat.coerce(q)))
    j = next(i for i in (0, 1, 2) if nu[i] > 0)
    lower = list(nu)
    lower[j] -= 1
    step = Quat.from_array(basis(j + 1) * h)
    q = Quat.coerce(q)
    hi = partial_nu(f, lower, q + step, h)
    lo = partial_nu(f, lower, q - step, h)
    return (hi - lo) / (2 * h)


def all_kernels(degree: int) -> Dict[MultiIndex, RationalKernel]:
    return {nu: kernel(nu) for nu in indices_upto(degree)}
