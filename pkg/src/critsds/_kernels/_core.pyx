# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled trajectory kernels.

Same contract as pyfallback.py; arithmetic is kept operation-for-operation
identical (the build disables FP contraction) so trajectories match the
fallback bit for bit.
"""

from libc.math cimport sqrt, fabs

BACKEND_NAME = "compiled"


def affine_block(double[::1] x, double[:, ::1] a, double[:, ::1] b,
                 double[:, ::1] out):
    cdef Py_ssize_t k = a.shape[0], n = a.shape[1], i, j
    cdef double v
    with nogil:
        for j in range(k):
            for i in range(n):
                v = a[j, i] * x[i]
                v = v + b[j, i]
                x[i] = v
                out[j, i] = v


def goldie_max_block(double[::1] x, double[:, ::1] a, double[:, ::1] b,
                     double[:, ::1] c, double[:, ::1] out):
    cdef Py_ssize_t k = a.shape[0], n = a.shape[1], i, j
    cdef double v
    with nogil:
        for j in range(k):
            for i in range(n):
                v = a[j, i] * x[i]
                if b[j, i] > v:
                    v = b[j, i]
                v = v + c[j, i]
                x[i] = v
                out[j, i] = v


def goldie_sqrt_block(double[::1] x, double[:, ::1] a, double[:, ::1] b,
                      double[:, ::1] c, double[:, ::1] out):
    cdef Py_ssize_t k = a.shape[0], n = a.shape[1], i, j
    cdef double u, v
    with nogil:
        for j in range(k):
            for i in range(n):
                u = a[j, i] * x[i]
                v = u * u + b[j, i] * x[i]
                v = v + c[j, i]
                v = sqrt(v)
                x[i] = v
                out[j, i] = v


def reflected_block(double[::1] x, double[:, ::1] u, double[:, ::1] out):
    cdef Py_ssize_t k = u.shape[0], n = u.shape[1], i, j
    cdef double v
    with nogil:
        for j in range(k):
            for i in range(n):
                v = fabs(x[i] - u[j, i])
                x[i] = v
                out[j, i] = v


cdef inline double _rinv(double x) noexcept nogil:
    cdef double num
    if x == 0.0:
        return 0.5
    num = (x - 2.0) + sqrt(x * x + 4.0)
    return num / (2.0 * x)


cdef inline double _rfwd(double u) noexcept nogil:
    return (2.0 * u - 1.0) / (u * (1.0 - u))


def interval_mix_block(double[::1] x, double[:, ::1] alin, double t,
                       double[:, ::1] out):
    cdef Py_ssize_t k = alin.shape[0], n = alin.shape[1], i, j
    cdef double u1, u2, m
    with nogil:
        for j in range(k):
            for i in range(n):
                u1 = _rinv(alin[j, i] * x[i])
                u2 = _rinv(x[i])
                m = (1.0 - t) * u1 + t * u2
                m = _rfwd(m)
                x[i] = m
                out[j, i] = m


def right_walk_hit_block(double[::1] aa, double[::1] bb,
                         double[:, ::1] a, double[:, ::1] b,
                         double k1, double k2, double m1, double m2,
                         long long[::1] hit_step, unsigned char[::1] dead,
                         long long base_step):
    cdef Py_ssize_t k = a.shape[0], n = a.shape[1], i, j
    cdef bint live
    with nogil:
        for j in range(k):
            for i in range(n):
                live = (not dead[i]) and hit_step[i] < 0
                bb[i] = bb[i] + aa[i] * b[j, i]
                aa[i] = aa[i] * a[j, i]
                if live:
                    if aa[i] * k1 - bb[i] >= m1 and aa[i] * k2 + bb[i] <= m2:
                        hit_step[i] = base_step + j + 1
                if bb[i] > m2:
                    dead[i] = 1
