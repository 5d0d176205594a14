# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled mirror of ``_kernels_py``; same column layout, loops release the GIL."""
import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt, exp

cnp.import_array()

N_KERNEL_COLS = 9
N_BUMP_COLS = 6

cdef enum:
    N_BUMP_COLS_C = 6


cdef inline void _kern(double y1, double y2, double y3, double y4, double z1,
                       double C, double* o) noexcept nogil:
    cdef double D1 = y1 - z1
    cdef double n2 = D1 * D1 + y2 * y2 + y3 * y3 + y4 * y4
    cdef double ny2 = y1 * y1 + y2 * y2 + y3 * y3 + y4 * y4
    cdef double ny = sqrt(ny2)
    cdef double s = y3 * y3 * z1 * z1
    cdef double d4 = n2 * n2 + 4.0 * s
    cdef double d = sqrt(sqrt(d4))
    cdef double dm7 = 1.0 / (d4 * d * d * d)
    cdef double dm11 = dm7 / d4
    cdef double t1 = 4.0 * n2 * n2 + 4.0 * n2 * z1 * D1 + 8.0 * s
    cdef double t2 = 4.0 * n2 * z1 * y4 - 8.0 * y2 * y3 * z1 * z1
    cdef double t3 = 4.0 * n2 * z1 * y2 + 8.0 * y4 * y3 * z1 * z1
    cdef double t4 = 8.0 * D1 * y3 * z1 * z1
    cdef double c = -0.75 / C
    cdef double F = c * dm7 * t4 / ny
    cdef double R13, R23, R33, pre, Z2F, Z3F, ip
    o[0] = dm7 * d4 / C
    o[1] = c * dm7 * t1 / ny
    o[2] = c * dm7 * t2 / ny
    o[3] = c * dm7 * t3 / ny
    o[4] = F
    R13 = 16.0 * (n2 * n2 + d4) * n2 * z1 * D1
    R23 = 4.0 * s + 36.0 * n2 * z1 * D1
    R33 = 12.0 * n2 * z1 * D1 + 24.0 * s + 8.0 * z1 * s * D1 / ny2
    o[5] = 0.75 * dm11 / (C * ny2) * (-1.75 * R13 + d4 * R23 + d4 * R33 - 112.0 * s * s)
    pre = -6.0 * z1 * z1 / (C * ny2)
    Z2F = pre * (-1.75 * dm11 * t2 * D1 * y3 - dm7 * y4 * y3 - dm7 * D1 * y2)
    Z3F = pre * (-1.75 * dm11 * t3 * D1 * y3 - dm7 * y2 * y3 + dm7 * D1 * y4)
    ip = ny2 - y1 * z1
    o[6] = -(y3 * z1 / ny2) * F
    o[7] = 1.5 * y2 * z1 / ny2 * F + ip / (2.0 * ny) * Z3F
    o[8] = -1.5 * y4 * z1 / ny2 * F - ip / (2.0 * ny) * Z2F


def axis_kernels(Y, double z1, double C):
    cdef double[:, ::1] y = np.ascontiguousarray(Y, dtype=np.float64)
    cdef Py_ssize_t n = y.shape[0], i
    out = np.empty((n, N_KERNEL_COLS))
    cdef double[:, ::1] o = out
    with nogil:
        for i in range(n):
            _kern(y[i, 0], y[i, 1], y[i, 2], y[i, 3], z1, C, &o[i, 0])
    return out


cdef inline void _bump(double y1, double y2, double y3, double y4, double z1, double C,
                       double c1, double c2, double c3, double c4, double radius,
                       double amplitude, double* k, double* o) noexcept nogil:
    cdef double e1 = y1 - c1, e2 = y2 - c2, e3 = y3 - c3, e4 = y4 - c4
    cdef double s = (e1 * e1 + e2 * e2 + e3 * e3 + e4 * e4) / (radius * radius)
    cdef double q, u, gf, g1, g2, g3, g4, T1, T2, T3, T4, ny
    cdef int j
    if s >= 1.0:
        for j in range(N_BUMP_COLS_C):
            o[j] = 0.0
        return
    _kern(y1, y2, y3, y4, z1, C, k)
    q = 1.0 - s
    u = amplitude * exp(1.0 - 1.0 / q)
    gf = -2.0 * u / (radius * radius * q * q)
    g1 = gf * e1
    g2 = gf * e2
    g3 = gf * e3
    g4 = gf * e4
    T1 = y1 * g1 + y2 * g2 + y3 * g3 + y4 * g4
    T2 = -y4 * g1 + y3 * g2 - y2 * g3 + y1 * g4
    T3 = -y2 * g1 + y1 * g2 + y4 * g3 - y3 * g4
    T4 = -y3 * g1 - y4 * g2 + (y1 - z1) * g3 + y2 * g4
    ny = sqrt(y1 * y1 + y2 * y2 + y3 * y3 + y4 * y4)
    o[0] = k[1] * T1 + k[2] * T2 + k[3] * T3
    o[1] = k[4] * T4
    o[2] = k[5] * u * ny
    o[3] = k[6] * T1 + k[7] * T2 + k[8] * T3
    o[4] = u * ny
    o[5] = -2.0 * y3 * z1 / (ny * ny) * k[4] * u



def bump_terms(Y, double z1, double C, center, double radius, double amplitude):
    cdef double[:, ::1] y = np.ascontiguousarray(Y, dtype=np.float64)
    cdef double[::1] c = np.ascontiguousarray(center, dtype=np.float64)
    cdef Py_ssize_t n = y.shape[0], i
    cdef double k[9]
    out = np.empty((n, N_BUMP_COLS))
    cdef double[:, ::1] o = out
    with nogil:
        for i in range(n):
            _bump(y[i, 0], y[i, 1], y[i, 2], y[i, 3], z1, C, c[0], c[1], c[2], c[3],
                  radius, amplitude, k, &o[i, 0])
    return out


def bump_sums(Y, W, double z1, double C, center, double radius, double amplitude):
    cdef double[:, ::1] y = np.ascontiguousarray(Y, dtype=np.float64)
    cdef double[::1] w = np.ascontiguousarray(W, dtype=np.float64)
    cdef double[::1] c = np.ascontiguousarray(center, dtype=np.float64)
    cdef Py_ssize_t n = y.shape[0], i
    cdef int j
    cdef double k[9]
    cdef double t[6]
    cdef double acc[6]
    for j in range(N_BUMP_COLS_C):
        acc[j] = 0.0
    with nogil:
        for i in range(n):
            if w[i] == 0.0:
                continue
            _bump(y[i, 0], y[i, 1], y[i, 2], y[i, 3], z1, C, c[0], c[1], c[2], c[3],
                  radius, amplitude, k, t)
            for j in range(N_BUMP_COLS_C):
                acc[j] += w[i] * t[j]
    return np.array([acc[j] for j in range(N_BUMP_COLS_C)])
