# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled simulation kernels.

Mirror of ``_fallback.py``: Philox4x32-10 counter-based streams, Box-Muller
normals, and AR(1) paths reduced to the sufficient statistics the estimators
need. All loops run without the GIL so a thread pool scales across blocks.
"""

import numpy as np
cimport numpy as cnp
from libc.math cimport log, sqrt, cos, sin
from libc.stdint cimport uint32_t, uint64_t

cnp.import_array()

PURPOSE_BACKWARD = 0
PURPOSE_FORWARD = 1

cdef uint64_t _M0 = 0xD2511F53
cdef uint64_t _M1 = 0xCD9E8D57
cdef uint32_t _W0 = 0x9E3779B9
cdef uint32_t _W1 = 0xBB67AE85
cdef double _TWO_PI = 6.283185307179586
cdef double _INV_2_53 = 1.0 / 9007199254740992.0


cdef inline void _philox(uint32_t* c, uint32_t k0, uint32_t k1) noexcept nogil:
    cdef uint64_t p0, p1
    cdef uint32_t x0, x1, x2, x3
    cdef int r
    for r in range(10):
        if r:
            k0 = k0 + _W0
            k1 = k1 + _W1
        p0 = _M0 * <uint64_t>c[0]
        p1 = _M1 * <uint64_t>c[2]
        x0 = <uint32_t>(p1 >> 32) ^ c[1] ^ k0
        x1 = <uint32_t>p1
        x2 = <uint32_t>(p0 >> 32) ^ c[3] ^ k1
        x3 = <uint32_t>p0
        c[0] = x0
        c[1] = x1
        c[2] = x2
        c[3] = x3


cdef inline void _normal_pair(uint64_t key, uint64_t rep, uint32_t pair,
                              uint32_t tag, double* out) noexcept nogil:
    cdef uint32_t c[4]
    cdef double u1, u2, radius, angle
    c[0] = pair
    c[1] = <uint32_t>rep
    c[2] = <uint32_t>(rep >> 32)
    c[3] = tag
    _philox(c, <uint32_t>key, <uint32_t>(key >> 32))
    u1 = (<double>(c[0] >> 5) * 67108864.0 + <double>(c[1] >> 6) + 1.0) * _INV_2_53
    u2 = (<double>(c[2] >> 5) * 67108864.0 + <double>(c[3] >> 6)) * _INV_2_53
    radius = sqrt(-2.0 * log(u1))
    angle = _TWO_PI * u2
    out[0] = radius * cos(angle)
    out[1] = radius * sin(angle)


cdef inline uint32_t _tag(int purpose, int attempt) noexcept nogil:
    return (<uint32_t>attempt << 4) | <uint32_t>purpose


def normals(uint64_t key, uint64_t replicate, Py_ssize_t count,
            int attempt=0, int purpose=PURPOSE_BACKWARD):
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out = np.empty(count)
    cdef double pair[2]
    cdef Py_ssize_t i
    cdef uint32_t tag = _tag(purpose, attempt)
    for i in range(count):
        if i % 2 == 0:
            _normal_pair(key, replicate, <uint32_t>(i // 2), tag, pair)
        out[i] = pair[i % 2]
    return out


def backward_paths(double rho, double sigma, double y_n, Py_ssize_t n,
                   uint64_t key, uint64_t start, Py_ssize_t count, int attempt=0):
    cdef cnp.ndarray[cnp.float64_t, ndim=2] out = np.empty((count, n))
    cdef double[:, ::1] v = out
    cdef double pair[2]
    cdef Py_ssize_t r, i, t
    cdef uint32_t tag = _tag(PURPOSE_BACKWARD, attempt)
    with nogil:
        for r in range(count):
            v[r, n - 1] = y_n
            for i in range(n - 1):
                if i % 2 == 0:
                    _normal_pair(key, start + r, <uint32_t>(i // 2), tag, pair)
                t = n - 2 - i
                v[r, t] = rho * v[r, t + 1] + sigma * pair[i % 2]
    return out


def forward_paths(double rho, double sigma, Py_ssize_t n,
                  uint64_t key, uint64_t start, Py_ssize_t count, int attempt=0):
    cdef cnp.ndarray[cnp.float64_t, ndim=2] out = np.empty((count, n))
    cdef double[:, ::1] v = out
    cdef double pair[2]
    cdef double scale0 = sigma / sqrt(1.0 - rho * rho)
    cdef Py_ssize_t r, t
    cdef uint32_t tag = _tag(PURPOSE_FORWARD, attempt)
    with nogil:
        for r in range(count):
            _normal_pair(key, start + r, 0, tag, pair)
            v[r, 0] = scale0 * pair[0]
            for t in range(1, n):
                if t % 2 == 0:
                    _normal_pair(key, start + r, <uint32_t>(t // 2), tag, pair)
                v[r, t] = rho * v[r, t - 1] + sigma * pair[t % 2]
    return out


def backward_stats(double rho, double sigma, double y_n, Py_ssize_t n,
                   uint64_t key, uint64_t start, Py_ssize_t count, int attempt,
                   double[::1] sxy, double[::1] smid, double[::1] y1):
    cdef double pair[2]
    cdef double prev, cur, acc_xy, acc_mid
    cdef Py_ssize_t r, i, ndraw = n - 1
    cdef uint32_t tag = _tag(PURPOSE_BACKWARD, attempt)
    with nogil:
        for r in range(count):
            prev = y_n
            acc_xy = 0.0
            acc_mid = 0.0
            # draws 0..n-2 produce Y_{n-1}..Y_1; the last one (Y_1) is not interior
            for i in range(0, ndraw, 2):
                _normal_pair(key, start + r, <uint32_t>(i // 2), tag, pair)
                cur = rho * prev + sigma * pair[0]
                acc_xy = acc_xy + prev * cur
                if i < ndraw - 1:
                    acc_mid = acc_mid + cur * cur
                    prev = cur
                    cur = rho * prev + sigma * pair[1]
                    acc_xy = acc_xy + prev * cur
                    if i + 1 < ndraw - 1:
                        acc_mid = acc_mid + cur * cur
                prev = cur
            sxy[r] = acc_xy
            smid[r] = acc_mid
            y1[r] = prev


def forward_stats(double rho, double sigma, Py_ssize_t n,
                  uint64_t key, uint64_t start, Py_ssize_t count, int attempt,
                  double[::1] sxy, double[::1] smid, double[::1] y1, double[::1] yn):
    cdef double pair[2]
    cdef double first, prev, cur, acc_xy, acc_mid
    cdef double scale0 = sigma / sqrt(1.0 - rho * rho)
    cdef Py_ssize_t r, t
    cdef uint32_t tag = _tag(PURPOSE_FORWARD, attempt)
    with nogil:
        for r in range(count):
            _normal_pair(key, start + r, 0, tag, pair)
            first = scale0 * pair[0]
            prev = first
            acc_xy = 0.0
            acc_mid = 0.0
            for t in range(1, n):
                if t % 2 == 0:
                    _normal_pair(key, start + r, <uint32_t>(t // 2), tag, pair)
                cur = rho * prev + sigma * pair[t % 2]
                acc_xy = acc_xy + prev * cur
                if t < n - 1:
                    acc_mid = acc_mid + cur * cur
                prev = cur
            sxy[r] = acc_xy
            smid[r] = acc_mid
            y1[r] = first
            yn[r] = prev
