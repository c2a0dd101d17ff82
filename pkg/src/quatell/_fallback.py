"""Pure-numpy implementations of the lattice-sum kernels.

These mirror ``_kernels.pyx`` exactly and are used when the compiled extension
is unavailable (or when ``QUATELL_PURE_PYTHON=1``).
"""

from __future__ import annotations

import numpy as np

_BLOCK = 400_000  # max (query x lattice point) pairs per vectorised block

_SIGN = np.array([1.0, -1.0, -1.0, -1.0])


def _g(p):
    n = np.einsum("...i,...i->...", p, p)
    return p * _SIGN / (n * n)[..., None], n


def _ray_taylor(lam, q, taylor):
    """Coefficients c1 (and c3) of G(lam + eps q) in eps, for all pairs."""
    a = np.einsum("mi,mi->m", lam, lam)[None, :]
    b = 2.0 * (q @ lam.T)
    c = np.einsum("ki,ki->k", q, q)[:, None]
    r0 = 1.0 / a
    r1 = -b * r0 / a
    s0 = r0 * r0
    s1 = 2.0 * r0 * r1
    cl = (lam * _SIGN)[None, :, :]
    cq = (q * _SIGN)[:, None, :]
    c1 = cl * s1[..., None] + cq * s0[..., None]
    if taylor < 3:
        return c1, None
    r2 = -(b * r1 + c * r0) / a
    r3 = -(b * r2 + c * r1) / a
    s2 = 2.0 * r0 * r2 + r1 * r1
    s3 = 2.0 * r0 * r3 + 2.0 * r1 * r2
    c3 = cl * s3[..., None] + cq * s2[..., None]
    return c1, c3


def _dg(p, n):
    """Partials d/dx_k G(p), k = 1..3, shape (..., 3, 4)."""
    cp = p * _SIGN
    out = np.empty(p.shape[:-1] + (3, 4))
    inv2 = 1.0 / (n * n)
    inv3 = inv2 / n
    for k in range(3):
        out[..., k, :] = -4.0 * p[..., k + 1, None] * cp * inv3[..., None]
        out[..., k, k + 1] -= inv2
    return out


def pair_sum(points, queries, taylor=1, grad=False):
    """Sum over half-lattice ``points`` of
    G(q + l) + G(q - l) - 2 c1(l; q) [- 2 c3(l; q)]  (and its x-gradient).

    Returns ``(values (K, 4), gradient (K, 3, 4) or None)``.
    """
    points = np.ascontiguousarray(points, dtype=float)
    queries = np.ascontiguousarray(queries, dtype=float)
    if grad and taylor != 1:
        raise ValueError("gradient only available for taylor order 1")
    k = len(queries)
    val = np.zeros((k, 4))
    gsum = np.zeros((k, 3, 4)) if grad else None
    if len(points) == 0 or k == 0:
        return val, gsum
    step = max(1, _BLOCK // max(k, 1))
    for s in range(0, len(points), step):
        lam = points[s : s + step]
        q = queries[:, None, :]
        g1, n1 = _g(q + lam[None])
        g2, n2 = _g(q - lam[None])
        c1, c3 = _ray_taylor(lam, queries, taylor)
        term = g1 + g2 - 2.0 * c1
        if c3 is not None:
            term -= 2.0 * c3
        val += term.sum(axis=1)
        if grad:
            na = np.einsum("mi,mi->m", lam, lam)
            d = _dg(q + lam[None], n1) + _dg(q - lam[None], n2) - 2.0 * _dg(lam, na)[None]
            gsum += d.sum(axis=1)
    return val, gsum
