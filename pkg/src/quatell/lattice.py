"""Rank-4 lattices in H: period-geometry data, point enumeration, homothety,
Eisenstein series, quaternion orders and the integral matrices U_a.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterator, List, Optional, Sequence, Tuple

import numpy as np

from .algebra import (
    J,
    MultiIndex,
    Quat,
    QuatellError,
    SINGULAR_THRESHOLD,
    mat4_invert,
    qmul,
    qnorm,
)
from .regular import bound_constant, kernel, monomial_matrix

RHO = np.eye(4)  # rho = (1, e1, e2, e3) as quaternion rows


class SingularLattice(QuatellError):
    pass


class NonUnit(QuatellError):
    pass


class DegreeTooSmall(QuatellError):
    pass


class NotIntegral(QuatellError):
    pass


PAIRS = ((0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3))


@dataclass(frozen=True, eq=False)
class Lattice:
    """A full-rank lattice generated by the rows of ``matrix`` (row h = lambda_h)."""

    matrix: np.ndarray
    swapped: bool = False
    _cache: dict = field(default_factory=dict, repr=False)

    @classmethod
    def from_rows(cls, rows, threshold: float = SINGULAR_THRESHOLD) -> "Lattice":
        m = np.array(rows, dtype=float).reshape(4, 4)
        try:
            _, d = mat4_invert(m, threshold)
        except QuatellError as exc:
            raise SingularLattice(str(exc)) from None
        swapped = False
        if d < 0:
            m = m[[0, 1, 3, 2]]
            swapped = True
        m.setflags(write=False)
        return cls(m, swapped)

    @classmethod
    def from_generators(cls, gens: Sequence) -> "Lattice":
        return cls.from_rows([Quat.coerce(g).array for g in gens])

    # -- derived data -----------------------------------------------------

    @property
    def generators(self) -> np.ndarray:
        return self.matrix

    def generator(self, h: int) -> Quat:
        """lambda_h for h = 1..4."""
        return Quat.from_array(self.matrix[h - 1])

    def _inv(self):
        if "inv" not in self._cache:
            self._cache["inv"] = mat4_invert(self.matrix)
        return self._cache["inv"]

    @property
    def inverse(self) -> np.ndarray:
        return self._inv()[0]

    @property
    def det(self) -> float:
        return self._inv()[1]

    @property
    def covolume(self) -> float:
        return abs(self.det)

    @property
    def lambda_hat(self) -> np.ndarray:
        """detL * transpose(L^-1) * rho, as a (4, 4) array of quaternions."""
        return self.det * self.inverse.T @ RHO

    @property
    def cofactor_hat(self) -> np.ndarray:
        """The real matrix with entries hat(Lambda)_{h alpha} = det * (L^-1)_{alpha h}."""
        return self.det * self.inverse.T

    def pair_minor(self, i: int, j: int, a: int, b: int) -> float:
        """det of the 2x2 block of rows i, j (1-based) and columns a, b (0-based)."""
        m = self.matrix
        return float(m[i - 1, a] * m[j - 1, b] - m[i - 1, b] * m[j - 1, a])

    def q_entry(self, i: int, j: int) -> np.ndarray:
        """q_ij = e1 det_{ij,23} - e2 det_{ij,13} + e3 det_{ij,12} (i < j)."""
        return np.array(
            [0.0, self.pair_minor(i, j, 2, 3), -self.pair_minor(i, j, 1, 3), self.pair_minor(i, j, 1, 2)]
        )

    @property
    def gram_q(self) -> np.ndarray:
        if "Q" not in self._cache:
            q = {(i, j): self.q_entry(i, j) for i in range(1, 5) for j in range(i + 1, 5)}
            z = np.zeros(4)
            self._cache["Q"] = np.array(
                [
                    [z, q[3, 4], -q[2, 4], q[2, 3]],
                    [-q[3, 4], z, q[1, 4], -q[1, 3]],
                    [q[2, 4], -q[1, 4], z, q[1, 2]],
                    [-q[2, 3], q[1, 3], -q[1, 2], z],
                ]
            )
        return self._cache["Q"]

    @property
    def jq(self) -> np.ndarray:
        return np.einsum("hk,kla->hla", J, self.gram_q)

    @property
    def gram(self) -> np.ndarray:
        """Real Gram matrix Lambda Lambda^T; N(c . lambda) = c G c^T."""
        return self.matrix @ self.matrix.T

    @property
    def r_min(self) -> float:
        """Length of the shortest non-zero lattice vector."""
        if "r_min" not in self._cache:
            bound = math.sqrt(min(np.diag(self.gram)))
            best = np.inf
            for chunk in self.half_chunks(bound * (1 + 1e-9)):
                best = min(best, float(qnorm(chunk).min()))
            self._cache["r_min"] = math.sqrt(best)
        return self._cache["r_min"]

    def coords(self, q) -> np.ndarray:
        """Real coordinates c with q = c . lambda."""
        return np.asarray(q, dtype=float) @ self.inverse

    def contains(self, q, tol: float = 1e-9) -> bool:
        c = self.coords(Quat.coerce(q).array)
        return bool(np.all(np.abs(c - np.round(c)) <= tol))

    def reduce(self, q) -> Tuple[np.ndarray, np.ndarray]:
        """Split q = w + r with w in L (integer coords returned) and r near 0."""
        c = self.coords(np.asarray(q, dtype=float))
        n = np.round(c)
        return n, np.asarray(q, dtype=float) - n @ self.matrix

    # -- enumeration --------------------------------------------------------

    def _fp_data(self):
        """Fincke-Pohst form: N(c) = sum_i d_i (c_i + sum_{j>i} u_ij c_j)^2."""
        if "fp" not in self._cache:
            g = self.gram
            u = np.zeros((4, 4))
            d = np.zeros(4)
            a = g.copy()
            for i in range(4):
                d[i] = a[i, i]
                for j in range(i + 1, 4):
                    u[i, j] = a[i, j] / d[i]
                for j in range(i + 1, 4):
                    for k in range(i + 1, 4):
                        a[j, k] -= d[i] * u[i, j] * u[i, k]
            self._cache["fp"] = (d, u)
        return self._cache["fp"]

    def coefficient_chunks(self, radius: float) -> Iterator[np.ndarray]:
        """Integer coefficient vectors c != 0 with |c . lambda| <= radius, one
        array per value of the last coordinate, in a fixed order."""
        d, u = self._fp_data()
        r2 = radius * radius * (1 + 1e-12)
        top = int(math.floor(math.sqrt(r2 / d[3])))
        for c4 in range(-top, top + 1):
            partial = np.array([[c4]], dtype=np.int64)
            rem = np.array([r2 - d[3] * c4 * c4])
            for level in (2, 1, 0):
                known = partial  # columns are c_{level+1} .. c_3
                center = -(known * u[level, level + 1 :][None, :]).sum(axis=1)
                width = np.sqrt(np.maximum(rem, 0.0) / d[level])
                lo = np.ceil(center - width - 1e-12).astype(np.int64)
                hi = np.floor(center + width + 1e-12).astype(np.int64)
                counts = np.maximum(hi - lo + 1, 0)
                keep = counts > 0
                known, center, lo, counts, rem = known[keep], center[keep], lo[keep], counts[keep], rem[keep]
                rep = np.repeat(np.arange(len(counts)), counts)
                offs = np.arange(counts.sum()) - np.repeat(np.cumsum(counts) - counts, counts)
                new = lo[rep] + offs
                rem = rem[rep] - d[level] * (new - center[rep]) ** 2
                partial = np.column_stack([new, known[rep]])
                keep = rem >= -1e-9 * r2
                partial, rem = partial[keep], rem[keep]
            nonzero = np.any(partial != 0, axis=1)
            if np.any(nonzero):
                yield partial[nonzero]

    def half_chunks(self, radius: float, inner: float = 0.0) -> Iterator[np.ndarray]:
        """Points of one half of {inner < |lambda| <= radius} (lambda and -lambda
        never both), as float arrays, in a deterministic order."""
        for c in self.coefficient_chunks(radius):
            mask = _first_nonzero_positive(c)
            pts = c[mask].astype(float) @ self.matrix
            if inner > 0.0:
                pts = pts[qnorm(pts) > inner * inner * (1 + 1e-12)]
            if len(pts):
                yield pts

    def points(self, radius: float) -> np.ndarray:
        """All non-zero lattice points of norm <= radius (unsorted, symmetric)."""
        half = [p for p in self.half_chunks(radius)]
        if not half:
            return np.zeros((0, 4))
        h = np.concatenate(half)
        return np.concatenate([h, -h])

    def with_swap_undone(self) -> np.ndarray:
        """Generator rows in the order originally supplied."""
        return self.matrix[[0, 1, 3, 2]] if self.swapped else self.matrix


def _first_nonzero_positive(c: np.ndarray) -> np.ndarray:
    out = np.zeros(len(c), dtype=bool)
    decided = np.zeros(len(c), dtype=bool)
    for col in (3, 2, 1, 0):
        v = c[:, col]
        newly = ~decided & (v != 0)
        out[newly] = v[newly] > 0
        decided |= newly
    return out


def lattice_new(rows) -> Lattice:
    return Lattice.from_rows(rows)


def lambda_hat(lat: Lattice) -> np.ndarray:
    return lat.lambda_hat


def gram_q(lat: Lattice) -> np.ndarray:
    return lat.gram_q


def shells(lat: Lattice, radius: float) -> np.ndarray:
    """Non-zero lattice points with |lambda| <= radius, ordered by norm then
    lexicographically, each immediately followed by its negation."""
    if radius <= 0:
        raise ValueError("radius must be positive")
    chunks = list(lat.half_chunks(radius))
    if not chunks:
        return np.zeros((0, 4))
    half = np.concatenate(chunks)
    # orient each representative so that it is the lexicographically larger of the pair
    flip = _lex_negative(half)
    half[flip] *= -1
    norms = np.round(qnorm(half), 10)
    order = np.lexsort((-half[:, 3], -half[:, 2], -half[:, 1], -half[:, 0], norms))
    half = half[order]
    out = np.empty((2 * len(half), 4))
    out[0::2] = half
    out[1::2] = -half
    return out


def _lex_negative(p: np.ndarray) -> np.ndarray:
    out = np.zeros(len(p), dtype=bool)
    decided = np.zeros(len(p), dtype=bool)
    for col in range(4):
        v = p[:, col]
        newly = ~decided & (np.abs(v) > 1e-12)
        out[newly] = v[newly] < 0
        decided |= newly
    return out


def homothety(lat: Lattice, a, b, tol: float = 1e-12) -> Lattice:
    """The lattice a L b^{-1} for unit quaternions a, b."""
    a = Quat.coerce(a)
    b = Quat.coerce(b)
    for u in (a, b):
        if abs(u.norm() - 1.0) > tol:
            raise NonUnit(f"|N - 1| = {abs(u.norm() - 1.0):.2e}")
    rows = qmul(qmul(a.array[None, :], lat.matrix), b.inv().array[None, :])
    return Lattice.from_rows(rows)


# ---------------------------------------------------------------------------
# presets and text format


HURWITZ_ROWS = [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 1, 0], [0.5, 0.5, 0.5, 0.5]]


def diagonal_lattice(a: float, b: float, c: float) -> Lattice:
    return Lattice.from_rows(np.diag([1.0, math.sqrt(a), math.sqrt(b), math.sqrt(c)]))


def lipschitz() -> Lattice:
    return Lattice.from_rows(np.eye(4))


def hurwitz() -> Lattice:
    return Lattice.from_rows(HURWITZ_ROWS)


def cell_radius(lat: Lattice) -> float:
    """max |q| over the centred fundamental cell {sum (t_h - 1/2) lambda_h}."""
    signs = np.array(np.meshgrid(*[[-0.5, 0.5]] * 4, indexing="ij")).reshape(4, -1).T
    return float(np.sqrt(qnorm(signs @ lat.matrix).max()))


# ---------------------------------------------------------------------------
# Eisenstein series


SMOOTH_START = 0.5  # the cutoff weight is 1 below SMOOTH_START * R


def smooth_weight(s, start: float = SMOOTH_START):
    """C-infinity radial cutoff: 1 for s <= start, 0 for s >= 1."""
    s = np.asarray(s, dtype=float)
    t = np.clip((s - start) / (1.0 - start), 0.0, 1.0)
    with np.errstate(divide="ignore", over="ignore"):
        a = np.where(t < 1.0, np.exp(-1.0 / np.maximum(1.0 - t, 1e-300)), 0.0)
        b = np.where(t > 0.0, np.exp(-1.0 / np.maximum(t, 1e-300)), 0.0)
    return a / (a + b)


def tail_bound(lat: Lattice, n: int, radius: float) -> float:
    """Bound on sum_{|lambda| > radius} |G_nu(lambda)| over |nu| = n, from
    |G_nu(q)| <= C_n |q|^-(n+3) and comparison with the integral outside a ball."""
    if n < 2:
        raise DegreeTooSmall("tail bound needs n >= 2")
    delta = cell_radius(lat)
    inner = radius - delta
    if inner <= 0:
        return math.inf
    blow = (1.0 + delta / inner) ** (n + 3)
    return bound_constant(n) * 2.0 * math.pi**2 / lat.covolume * blow * inner ** (1 - n) / (n - 1)


class Eisenstein(tuple):
    """``(value, bound)`` pair; ``estimate`` is an empirical error size."""

    def __new__(cls, value: Quat, bound: float, estimate: float = math.nan):
        self = super().__new__(cls, (value, bound))
        self.estimate = estimate
        return self

    @property
    def value(self) -> Quat:
        return self[0]

    @property
    def bound(self) -> float:
        return self[1]


def _kernel_block(nus):
    """Shared monomials and stacked coefficients for kernels of one degree."""
    kers = [kernel(nu, max_degree=max(MultiIndex(*nu).degree, 12)) for nu in nus]
    monos = sorted({m for ker in kers for m, _ in ker.terms})
    index = {m: i for i, m in enumerate(monos)}
    coefs = np.zeros((len(monos), 4 * len(kers)))
    for j, ker in enumerate(kers):
        for m, c in ker.terms:
            coefs[index[m], 4 * j : 4 * j + 4] = c
    return np.array(monos, dtype=np.int64), coefs, kers[0].degree


def lattice_kernel_sums(lat: Lattice, nus, radius: float, *, method: str = "smooth",
                        inner: float = 0.0, extra_radii=()) -> dict:
    """sum over the lattice points with inner < |lambda| (<= radius) of G_nu(lambda)
    for every nu in ``nus``.

    ``method`` is "smooth" (weights smooth_weight(|lambda| / radius)) or "ball"
    (sharp truncation).  Even-|nu| sums vanish by parity and are returned as 0.
    ``extra_radii`` requests additional smooth sums (same points) returned under
    keys ``(nu, r)``.
    """
    nus = [MultiIndex(*nu) for nu in nus]
    out = {nu: np.zeros(4) for nu in nus}
    extra = {(nu, r): np.zeros(4) for nu in nus for r in extra_radii}
    by_degree: dict = {}
    for nu in nus:
        if nu.degree % 2 == 1:
            by_degree.setdefault(nu.degree, []).append(nu)
    for n, group in sorted(by_degree.items()):
        monos, coefs, deg = _kernel_block(group)
        acc = np.zeros((1 + len(extra_radii), coefs.shape[1]))
        for pts in lat.half_chunks(radius, inner):
            r = np.sqrt(qnorm(pts))
            vals = monomial_matrix(pts / r[:, None], monos) @ coefs
            scale = r**deg
            ws = [smooth_weight(r / radius) if method == "smooth" else np.ones_like(r)]
            ws += [smooth_weight(r / e) for e in extra_radii]
            acc += np.stack([(w * scale) @ vals for w in ws])
        acc *= 2.0  # odd |nu|: G_nu is even, so each pair contributes twice
        for j, nu in enumerate(group):
            out[nu] = acc[0, 4 * j : 4 * j + 4]
            for i, e in enumerate(extra_radii):
                extra[(nu, e)] = acc[1 + i, 4 * j : 4 * j + 4]
    if extra_radii:
        out.update(extra)
    return out


def eisenstein(lat: Lattice, nu, radius: float = 40.0, method: str = "smooth") -> Eisenstein:
    """E_nu(L) = sum over non-zero lattice points of G_nu(lambda).

    Methods: "smooth" (default; smooth radial cutoff, error decays faster than
    any power of R), "ball" (sharp symmetric-shell truncation) and "richardson"
    (ball sums at R and R/2 extrapolated in 1/R).  ``bound`` is a rigorous tail
    bound; ``estimate`` is the observed change against a smaller cutoff.
    """
    nu = MultiIndex(*nu)
    n = nu.degree
    if n < 2:
        raise DegreeTooSmall(f"|nu| = {n} < 2: series does not converge")
    if n % 2 == 0:
        return Eisenstein(Quat(), 0.0, 0.0)
    if method == "smooth":
        sub = 0.8 * radius
        res = lattice_kernel_sums(lat, [nu], radius, extra_radii=(sub,))
        value, other = res[nu], res[(nu, sub)]
        bound = tail_bound(lat, n, SMOOTH_START * sub)
    elif method == "ball":
        res = lattice_kernel_sums(lat, [nu], radius, method="ball")
        value = res[nu]
        other = lattice_kernel_sums(lat, [nu], radius / 2, method="ball")[nu]
        bound = tail_bound(lat, n, radius)
    elif method == "richardson":
        full = lattice_kernel_sums(lat, [nu], radius, method="ball")[nu]
        half = lattice_kernel_sums(lat, [nu], radius / 2, method="ball")[nu]
        p = 2.0 ** (n - 1)
        value = (p * full - half) / (p - 1)
        other = full
        bound = tail_bound(lat, n, radius) * (p + 1) / (p - 1)
    else:
        raise ValueError(f"unknown method {method!r}")
    return Eisenstein(Quat.from_array(value), bound, float(np.sqrt(qnorm(value - other))))


def lattice_sum(lat: Lattice, f, radius: float, inner: float = 0.0) -> np.ndarray:
    """Smooth-cutoff sum of an array function f over the non-zero lattice points."""
    total = np.zeros(4)
    for pts in lat.half_chunks(radius, inner):
        w = smooth_weight(np.sqrt(qnorm(pts)) / radius)[:, None]
        total += (w * (f(pts) + f(-pts))).sum(axis=0)
    return total


# ---------------------------------------------------------------------------
# quaternion orders, U_a and cosets


def _integral_coords(basis: np.ndarray, inv: np.ndarray, x: np.ndarray, tol: float):
    c = np.asarray(x, dtype=float) @ inv
    r = np.round(c)
    ok = np.all(np.abs(c - r) <= tol)
    return r, ok


@dataclass(frozen=True, eq=False)
class OrderContext:
    """A quaternion order (Z-basis ``basis``) and a left ideal lattice of it."""

    basis: np.ndarray
    lattice: Lattice
    name: str = "custom"

    def __post_init__(self):
        b = np.array(self.basis, dtype=float).reshape(4, 4)
        b.setflags(write=False)
        object.__setattr__(self, "basis", b)
        inv, _ = mat4_invert(b)
        for x in b:
            for y in b:
                _, ok = _integral_coords(b, inv, qmul(x, y), 1e-9)
                if not ok:
                    raise NotIntegral("basis is not closed under multiplication")
        for x in b:
            u_matrix(self, x)

    def contains(self, a, tol: float = 1e-9) -> bool:
        inv, _ = mat4_invert(self.basis)
        return bool(_integral_coords(self.basis, inv, Quat.coerce(a).array, tol)[1])

    def units(self) -> List[Quat]:
        """Elements of norm 1."""
        pts = Lattice.from_rows(self.basis).points(1.0 + 1e-9)
        return [Quat.from_array(p) for p in pts if abs(qnorm(p) - 1.0) < 1e-9]


def u_matrix(ctx: OrderContext, a, tol: float = 1e-6) -> np.ndarray:
    """Integer U_a with a lambda_h = sum_l (U_a)_{hl} lambda_l."""
    lat = ctx.lattice if isinstance(ctx, OrderContext) else ctx
    a = Quat.coerce(a)
    prod = qmul(a.array[None, :], lat.matrix)
    c = prod @ lat.inverse
    u = np.round(c)
    if np.max(np.abs(c - u)) > tol:
        raise NotIntegral(f"{a} does not stabilise the lattice (offset {np.max(np.abs(c - u)):.2e})")
    scale = 1e-9 * max(a.abs(), 1.0) * max(float(np.sqrt(qnorm(lat.matrix)).max()), 1.0)
    if np.max(np.abs(prod - u @ lat.matrix)) > scale:
        raise NotIntegral("rounded U_a fails exact re-verification")
    return u.astype(np.int64)


def coset_reps(ctx: OrderContext, a) -> List[Quat]:
    """Representatives of a^{-1} L / L inside the fundamental parallelotope of L."""
    lat = ctx.lattice if isinstance(ctx, OrderContext) else ctx
    a = Quat.coerce(a)
    if a.norm() == 0.0:
        raise QuatellError("a must be non-zero")
    u = u_matrix(ctx, a)
    d = int(round(abs(np.linalg.det(u))))
    uinv = np.linalg.inv(u.astype(float))
    grid = np.array(np.meshgrid(*[np.arange(d)] * 4, indexing="ij")).reshape(4, -1).T
    c = grid @ uinv
    c -= np.floor(c + 1e-9)
    keys = np.round(c * d).astype(np.int64) % d
    _, first = np.unique(keys, axis=0, return_index=True)
    reps = c[np.sort(first)]
    reps = reps[np.lexsort(reps.T[::-1])]
    return [Quat.from_array(v @ lat.matrix) for v in reps]


def hurwitz_order() -> OrderContext:
    return OrderContext(np.array(HURWITZ_ROWS), hurwitz(), "hurwitz")


def lipschitz_order() -> OrderContext:
    return OrderContext(np.eye(4), lipschitz(), "lipschitz")


# ---------------------------------------------------------------------------
# text format


class ParseError(QuatellError, ValueError):
    def __init__(self, message: str, position: int):
        super().__init__(f"{message} (at position {position})")
        self.position = position


def _parse_reals(text: str, offset: int, count: Optional[int]) -> List[float]:
    out = []
    pos = offset
    for piece in text[offset:].split(","):
        s = piece.strip()
        try:
            v = float(s)
        except ValueError:
            raise ParseError(f"expected a real number, got {s!r}", pos) from None
        if not math.isfinite(v):
            raise ParseError("non-finite value", pos)
        out.append(v)
        pos += len(piece) + 1
    if count is not None and len(out) != count:
        raise ParseError(f"expected {count} values, got {len(out)}", offset)
    return out


def load_lattice_spec(text: str):
    """Parse "preset:hurwitz", "preset:lipschitz", "diag:a,b,c" or 16 reals.

    Presets return an :class:`OrderContext`; other forms return a :class:`Lattice`.
    """
    s = text.strip()
    if s.startswith("preset:"):
        name = s[len("preset:") :]
        if name == "hurwitz":
            return hurwitz_order()
        if name == "lipschitz":
            return lipschitz_order()
        raise ParseError(f"unknown preset {name!r}", len("preset:"))
    if s.startswith("diag:"):
        a, b, c = _parse_reals(s, len("diag:"), 3)
        if min(a, b, c) <= 0:
            raise ParseError("diagonal entries must be positive", len("diag:"))
        return diagonal_lattice(a, b, c)
    vals = _parse_reals(s, 0, 16)
    return Lattice.from_rows(vals)


def as_lattice(obj) -> Lattice:
    return obj.lattice if isinstance(obj, OrderContext) else obj
