# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled lattice-sum kernels (same contract as ``_fallback.pair_sum``)."""

import numpy as np
cimport numpy as cnp

cnp.import_array()


cdef inline void _add_g(double* acc, double p0, double p1, double p2, double p3,
                        double scale, double* grad, double gscale) noexcept nogil:
    cdef double n = p0 * p0 + p1 * p1 + p2 * p2 + p3 * p3
    cdef double inv2 = 1.0 / (n * n)
    cdef double inv3
    cdef double c0 = p0, c1 = -p1, c2 = -p2, c3 = -p3
    acc[0] += scale * c0 * inv2
    acc[1] += scale * c1 * inv2
    acc[2] += scale * c2 * inv2
    acc[3] += scale * c3 * inv2
    if grad != NULL:
        inv3 = inv2 / n
        _add_dg(grad, p1, c0, c1, c2, c3, inv2, inv3, gscale, 0)
        _add_dg(grad, p2, c0, c1, c2, c3, inv2, inv3, gscale, 1)
        _add_dg(grad, p3, c0, c1, c2, c3, inv2, inv3, gscale, 2)


cdef inline void _add_dg(double* grad, double pk, double c0, double c1, double c2,
                         double c3, double inv2, double inv3, double s, int k) noexcept nogil:
    cdef double f = -4.0 * pk * inv3 * s
    grad[4 * k + 0] += f * c0
    grad[4 * k + 1] += f * c1
    grad[4 * k + 2] += f * c2
    grad[4 * k + 3] += f * c3
    grad[4 * k + k + 1] -= s * inv2


def pair_sum(points, queries, int taylor=1, bint grad=False):
    cdef double[:, ::1] pts = np.ascontiguousarray(points, dtype=np.float64)
    cdef double[:, ::1] qs = np.ascontiguousarray(queries, dtype=np.float64)
    if grad and taylor != 1:
        raise ValueError("gradient only available for taylor order 1")
    cdef Py_ssize_t K = qs.shape[0], M = pts.shape[0], i, m
    out = np.zeros((K, 4))
    gout = np.zeros((K, 3, 4)) if grad else None
    cdef double[:, ::1] val = out
    cdef double[:, :, ::1] gv
    cdef double acc[4]
    cdef double gacc[12]
    cdef double* gptr = NULL
    cdef double q0, q1, q2, q3, l0, l1, l2, l3
    cdef double a, b, c, r0, r1, r2, r3, s0, s1, s2, s3, t
    if grad:
        gv = gout
        gptr = gacc
    with nogil:
        for i in range(K):
            q0 = qs[i, 0]; q1 = qs[i, 1]; q2 = qs[i, 2]; q3 = qs[i, 3]
            acc[0] = 0.0; acc[1] = 0.0; acc[2] = 0.0; acc[3] = 0.0
            if grad:
                for m in range(12):
                    gacc[m] = 0.0
            c = q0 * q0 + q1 * q1 + q2 * q2 + q3 * q3
            for m in range(M):
                l0 = pts[m, 0]; l1 = pts[m, 1]; l2 = pts[m, 2]; l3 = pts[m, 3]
                _add_g(acc, q0 + l0, q1 + l1, q2 + l2, q3 + l3, 1.0, gptr, 1.0)
                _add_g(acc, q0 - l0, q1 - l1, q2 - l2, q3 - l3, 1.0, gptr, 1.0)
                a = l0 * l0 + l1 * l1 + l2 * l2 + l3 * l3
                b = 2.0 * (l0 * q0 + l1 * q1 + l2 * q2 + l3 * q3)
                r0 = 1.0 / a
                r1 = -b * r0 / a
                s0 = r0 * r0
                s1 = 2.0 * r0 * r1
                # -2 c1, with c1 = conj(l) s1 + conj(q) s0
                acc[0] -= 2.0 * (l0 * s1 + q0 * s0)
                acc[1] += 2.0 * (l1 * s1 + q1 * s0)
                acc[2] += 2.0 * (l2 * s1 + q2 * s0)
                acc[3] += 2.0 * (l3 * s1 + q3 * s0)
                if taylor >= 3:
                    r2 = -(b * r1 + c * r0) / a
                    r3 = -(b * r2 + c * r1) / a
                    s2 = 2.0 * r0 * r2 + r1 * r1
                    s3 = 2.0 * r0 * r3 + 2.0 * r1 * r2
                    acc[0] -= 2.0 * (l0 * s3 + q0 * s2)
                    acc[1] += 2.0 * (l1 * s3 + q1 * s2)
                    acc[2] += 2.0 * (l2 * s3 + q2 * s2)
                    acc[3] += 2.0 * (l3 * s3 + q3 * s2)
                if grad:
                    # - 2 dG(l)/dx_k; value part of _add_g is cancelled below
                    _add_g(acc, l0, l1, l2, l3, 0.0, gptr, -2.0)
            val[i, 0] = acc[0]; val[i, 1] = acc[1]; val[i, 2] = acc[2]; val[i, 3] = acc[3]
            if grad:
                for m in range(12):
                    gv[i, m // 4, m % 4] = gacc[m]
    return out, gout
