# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled quadrature kernels: complex phase matrices and fused reductions.

Same contract as ``_kernels_py``; selected at import time by ``kernels``.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport cos, exp, sin

BACKEND = "cython"


def phase_matrix(zeta, y):
    """exp(-1j * outer(zeta, y)) as a (len(zeta), len(y)) complex matrix."""
    cdef cnp.ndarray[cnp.complex128_t, ndim=1] z = np.ascontiguousarray(zeta, dtype=np.complex128)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] yy = np.ascontiguousarray(y, dtype=np.float64)
    cdef Py_ssize_t n = z.shape[0], m = yy.shape[0]
    cdef cnp.ndarray[cnp.complex128_t, ndim=2] out = np.empty((n, m), dtype=np.complex128)
    cdef Py_ssize_t i, j
    cdef double a, b, yv, mag, ph
    for i in range(n):
        a = z[i].real
        b = z[i].imag
        for j in range(m):
            yv = yy[j]
            # exp(-i*(a+ib)*y) = exp(b*y) * (cos(a*y) - i sin(a*y))
            mag = exp(b * yv)
            ph = a * yv
            out[i, j].real = mag * cos(ph)
            out[i, j].imag = -mag * sin(ph)
    return out


def weighted_phase_apply(zeta, y, coef):
    """out[i] = sum_j coef[j] * exp(-1j*zeta[i]*y[j]) without the full matrix."""
    cdef cnp.ndarray[cnp.complex128_t, ndim=1] z = np.ascontiguousarray(zeta, dtype=np.complex128)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] yy = np.ascontiguousarray(y, dtype=np.float64)
    cdef cnp.ndarray[cnp.complex128_t, ndim=1] c = np.ascontiguousarray(coef, dtype=np.complex128)
    cdef Py_ssize_t n = z.shape[0], m = yy.shape[0]
    cdef cnp.ndarray[cnp.complex128_t, ndim=1] out = np.empty(n, dtype=np.complex128)
    cdef Py_ssize_t i, j
    cdef double a, b, yv, mag, ph, acc_re, acc_im, er, ei
    for i in range(n):
        a = z[i].real
        b = z[i].imag
        acc_re = 0.0
        acc_im = 0.0
        for j in range(m):
            yv = yy[j]
            mag = exp(b * yv)
            ph = a * yv
            er = mag * cos(ph)
            ei = -mag * sin(ph)
            acc_re += c[j].real * er - c[j].imag * ei
            acc_im += c[j].real * ei + c[j].imag * er
        out[i].real = acc_re
        out[i].imag = acc_im
    return out
