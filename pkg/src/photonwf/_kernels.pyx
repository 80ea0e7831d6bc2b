# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled hot loops: direct Fourier sums and the k-space difference stencil.

Both kernels mirror ``photonwf._fallback`` exactly; the per-output inner
sums run in a fixed order so results do not depend on the thread count.
"""
import numpy as np
cimport numpy as cnp
from cython.parallel cimport prange
from libc.math cimport sin, cos

cnp.import_array()


def fourier_sum(double[:, ::1] kvec, double[::1] omega, double complex[:, ::1] amps,
                double[:, ::1] points, double t, int nthreads=1):
    """out[p, c] = sum_j amps[j, c] * exp(i (k_j . X_p - omega_j t))."""
    cdef Py_ssize_t M = kvec.shape[0]
    cdef Py_ssize_t C = amps.shape[1]
    cdef Py_ssize_t P = points.shape[0]
    out_arr = np.zeros((P, C), dtype=np.complex128)
    cdef double[:, ::1] out = out_arr.view(np.float64)
    cdef double[:, ::1] a = np.asarray(amps).view(np.float64)
    cdef Py_ssize_t p, j, c
    cdef double x0, x1, x2, ph, cs, sn, ar, ai
    if nthreads < 1:
        nthreads = 1
    for p in prange(P, nogil=True, schedule="static", num_threads=nthreads):
        x0 = points[p, 0]
        x1 = points[p, 1]
        x2 = points[p, 2]
        for j in range(M):
            ph = kvec[j, 0] * x0 + kvec[j, 1] * x1 + kvec[j, 2] * x2 - omega[j] * t
            cs = cos(ph)
            sn = sin(ph)
            for c in range(C):
                ar = a[j, 2 * c]
                ai = a[j, 2 * c + 1]
                out[p, 2 * c] += ar * cs - ai * sn
                out[p, 2 * c + 1] += ar * sn + ai * cs
    return out_arr


def stencil_derivative(double complex[:, ::1] f, cnp.uint8_t[:, ::1] valid, double h,
                       int nthreads=1):
    """First derivative along the last axis of a (lines, n) array.

    Fourth-order central weights inside, second-order one-sided weights on
    the two outermost layers at each end. A result is valid only where
    every sample its stencil reads is valid.
    """
    cdef Py_ssize_t L = f.shape[0]
    cdef Py_ssize_t n = f.shape[1]
    d_arr = np.zeros((L, n), dtype=np.complex128)
    ok_arr = np.zeros((L, n), dtype=np.uint8)
    cdef double complex[:, ::1] d = d_arr
    cdef cnp.uint8_t[:, ::1] ok = ok_arr
    cdef Py_ssize_t l, i
    cdef double c12 = 1.0 / (12.0 * h)
    cdef double c2 = 1.0 / (2.0 * h)
    if nthreads < 1:
        nthreads = 1
    for l in prange(L, nogil=True, schedule="static", num_threads=nthreads):
        for i in range(2, n - 2):
            if valid[l, i - 2] and valid[l, i - 1] and valid[l, i] and valid[l, i + 1] and valid[l, i + 2]:
                d[l, i] = (f[l, i - 2] - 8.0 * f[l, i - 1] + 8.0 * f[l, i + 1] - f[l, i + 2]) * c12
                ok[l, i] = 1
        for i in range(2):
            if valid[l, i] and valid[l, i + 1] and valid[l, i + 2]:
                d[l, i] = (-3.0 * f[l, i] + 4.0 * f[l, i + 1] - f[l, i + 2]) * c2
                ok[l, i] = 1
            if valid[l, n - 1 - i] and valid[l, n - 2 - i] and valid[l, n - 3 - i]:
                d[l, n - 1 - i] = (3.0 * f[l, n - 1 - i] - 4.0 * f[l, n - 2 - i] + f[l, n - 3 - i]) * c2
                ok[l, n - 1 - i] = 1
    return d_arr, ok_arr
