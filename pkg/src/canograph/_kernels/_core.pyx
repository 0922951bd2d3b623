# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled transfer-matrix kernels.

Mirrors the contract of ``canograph._kernels.fallback``; selected at
import time when available.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport ceil, log2
from libc.stdlib cimport free, malloc

BACKEND = "compiled"

cdef int TAYLOR_TERMS = 18
cdef double SINC_CUT = 1e-3


cdef void _matmul(double complex* x, double complex* y, double complex* out, int m) noexcept nogil:
    cdef int i, j, k
    cdef double complex acc
    for i in range(m):
        for j in range(m):
            acc = 0
            for k in range(m):
                acc = acc + x[i * m + k] * y[k * m + j]
            out[i * m + j] = acc


cdef void _expm(double complex* mat, double complex* out,
                double complex* t1, double complex* t2, int m) noexcept nogil:
    # Scaling-and-squaring with an 18-term Taylor polynomial in Horner form.
    cdef int i, j, k, s
    cdef double rowsum, norm1 = 0.0
    for i in range(m):
        rowsum = 0.0
        for j in range(m):
            rowsum += abs(mat[i * m + j])
        if rowsum > norm1:
            norm1 = rowsum
    s = 0
    if norm1 > 0.5:
        s = <int>ceil(log2(norm1)) + 1
        if s < 0:
            s = 0
    cdef double scale = 1.0
    for i in range(s):
        scale *= 0.5
    for i in range(m * m):
        t1[i] = mat[i] * scale
    # Horner: out = I + t1*(I + t1/2*(...))
    for i in range(m * m):
        out[i] = 0
    for i in range(m):
        out[i * m + i] = 1
    for k in range(TAYLOR_TERMS, 0, -1):
        _matmul(t1, out, t2, m)
        for i in range(m * m):
            out[i] = t2[i] / k
        for i in range(m):
            out[i * m + i] = out[i * m + i] + 1
    for k in range(s):
        _matmul(out, out, t2, m)
        for i in range(m * m):
            out[i] = t2[i]


def const_transfers(a, coef):
    """exp(coef[k] * a) for every complex coefficient; shape (k, m, m)."""
    a_arr = np.ascontiguousarray(a, dtype=complex)
    coef_arr = np.ascontiguousarray(np.atleast_1d(coef), dtype=complex).ravel()
    cdef int m = a_arr.shape[0]
    cdef Py_ssize_t n = coef_arr.shape[0]
    out = np.empty((n, m, m), dtype=complex)
    cdef double complex[:, :] av = a_arr
    cdef double complex[:] cv = coef_arr
    cdef double complex[:, :, :] ov = out
    cdef double complex* scratch = <double complex*>malloc(3 * m * m * sizeof(double complex))
    if scratch == NULL:
        raise MemoryError
    cdef double complex* mat = scratch
    cdef double complex* t1 = scratch + m * m
    cdef double complex* t2 = scratch + 2 * m * m
    cdef Py_ssize_t idx
    cdef int i, j
    try:
        with nogil:
            for idx in range(n):
                for i in range(m):
                    for j in range(m):
                        mat[i * m + j] = cv[idx] * av[i, j]
                _expm(mat, &ov[idx, 0, 0], t1, t2, m)
    finally:
        free(scratch)
    return out


cdef inline double complex _sinc_like(double complex e) noexcept nogil:
    cdef double complex es
    if abs(e) < SINC_CUT:
        es = e * e
        return 1.0 - es / 6.0 + es * es / 120.0 - es * es * es / 5040.0
    return _csin(e) / e


cdef extern from "complex.h" nogil:
    double complex csin(double complex)
    double complex ccos(double complex)
    double complex csqrt(double complex)

cdef inline double complex _csin(double complex x) noexcept nogil:
    return csin(x)


def schrodinger_transfer(double v0, steps, zs):
    """Transfer of (y', y) for -y'' + v0*y = z*y over signed steps.

    Returns shape (nz, ns, 2, 2); entries are even functions of
    sqrt(z - v0), hence entire in z.
    """
    steps_arr = np.ascontiguousarray(np.atleast_1d(steps), dtype=float).ravel()
    zs_arr = np.ascontiguousarray(np.atleast_1d(zs), dtype=complex).ravel()
    cdef Py_ssize_t nz = zs_arr.shape[0], ns = steps_arr.shape[0]
    out = np.empty((nz, ns, 2, 2), dtype=complex)
    cdef double[:] sv = steps_arr
    cdef double complex[:] zv = zs_arr
    cdef double complex[:, :, :, :] ov = out
    cdef Py_ssize_t iz, js
    cdef double complex om2, om, e, c, s1
    with nogil:
        for iz in range(nz):
            om2 = zv[iz] - v0
            om = csqrt(om2)
            for js in range(ns):
                e = om * sv[js]
                c = ccos(e)
                s1 = _sinc_like(e) * sv[js]
                ov[iz, js, 0, 0] = c
                ov[iz, js, 0, 1] = -om2 * s1
                ov[iz, js, 1, 0] = s1
                ov[iz, js, 1, 1] = c
    return out


def schrodinger_core(double v0, steps, zs):
    """M0(-s) @ Mz(s) for each (z, s); shape (nz, ns, 2, 2)."""
    steps_arr = np.ascontiguousarray(np.atleast_1d(steps), dtype=float).ravel()
    zs_arr = np.ascontiguousarray(np.atleast_1d(zs), dtype=complex).ravel()
    cdef Py_ssize_t nz = zs_arr.shape[0], ns = steps_arr.shape[0]
    out = np.empty((nz, ns, 2, 2), dtype=complex)
    cdef double[:] sv = steps_arr
    cdef double complex[:] zv = zs_arr
    cdef double complex[:, :, :, :] ov = out
    cdef Py_ssize_t iz, js
    cdef double complex om2, om, e, c, s1
    cdef double complex z0om2, z0om, e0, c0, s10
    cdef double complex a00, a01, a10, a11, b00, b01, b10, b11
    with nogil:
        for iz in range(nz):
            om2 = zv[iz] - v0
            om = csqrt(om2)
            z0om2 = -v0
            z0om = csqrt(z0om2)
            for js in range(ns):
                e = om * sv[js]
                c = ccos(e)
                s1 = _sinc_like(e) * sv[js]
                b00 = c
                b01 = -om2 * s1
                b10 = s1
                b11 = c
                e0 = z0om * (-sv[js])
                c0 = ccos(e0)
                s10 = _sinc_like(e0) * (-sv[js])
                a00 = c0
                a01 = -z0om2 * s10
                a10 = s10
                a11 = c0
                ov[iz, js, 0, 0] = a00 * b00 + a01 * b10
                ov[iz, js, 0, 1] = a00 * b01 + a01 * b11
                ov[iz, js, 1, 0] = a10 * b00 + a11 * b10
                ov[iz, js, 1, 1] = a10 * b01 + a11 * b11
    return out
