# cython: language_level=3, boundscheck=False, wraparound=False, initializedcheck=False
"""Compiled path kernels; ``_pycore`` is the reference implementation."""

import numpy as np

ctypedef long long i64


def walk_int(i64 y0, const i64[::1] x, const i64[::1] xp, const unsigned char[::1] b):
    cdef Py_ssize_t n = x.shape[0], i
    out = np.empty(n + 1, dtype=np.int64)
    cdef i64[::1] o = out
    cdef i64 y = y0
    with nogil:
        o[0] = y
        for i in range(n):
            if y > 0 or (y == 0 and b[i]):
                y = y + x[i]
            else:
                y = y + xp[i]
            o[i + 1] = y
    return out


def walk_real(double y0, const double[::1] x, const double[::1] xp, const unsigned char[::1] b):
    cdef Py_ssize_t n = x.shape[0], i
    out = np.empty(n + 1, dtype=np.float64)
    cdef double[::1] o = out
    cdef double y = y0
    with nogil:
        o[0] = y
        for i in range(n):
            if y > 0 or (y == 0 and b[i]):
                y = y + x[i]
            else:
                y = y + xp[i]
            o[i + 1] = y
    return out


def ladder_times_int(const i64[::1] pos, const unsigned char[::1] b):
    cdef Py_ssize_t n = pos.shape[0], cur = 0, k, cnt = 1
    out = np.empty(n, dtype=np.int64)
    cdef i64[::1] o = out
    cdef i64 y
    cdef bint down
    with nogil:
        o[0] = 0
        while cur < n - 1:
            y = pos[cur]
            down = y > 0 or (y == 0 and b[cur])
            k = cur + 1
            if down:
                while k < n and pos[k] > y:
                    k += 1
            else:
                while k < n and pos[k] < y:
                    k += 1
            if k >= n:
                break
            o[cnt] = k
            cnt += 1
            cur = k
    return out[:cnt].copy()


def ladder_times_real(const double[::1] pos, const unsigned char[::1] b):
    cdef Py_ssize_t n = pos.shape[0], cur = 0, k, cnt = 1
    out = np.empty(n, dtype=np.int64)
    cdef i64[::1] o = out
    cdef double y
    cdef bint down
    with nogil:
        o[0] = 0
        while cur < n - 1:
            y = pos[cur]
            down = y > 0 or (y == 0 and b[cur])
            k = cur + 1
            if down:
                while k < n and pos[k] > y:
                    k += 1
            else:
                while k < n and pos[k] < y:
                    k += 1
            if k >= n:
                break
            o[cnt] = k
            cnt += 1
            cur = k
    return out[:cnt].copy()


def first_crossing_int(i64 y, bint side0, const i64[::1] x, const i64[::1] xp,
                       const unsigned char[::1] b, Py_ssize_t start, Py_ssize_t stop):
    cdef Py_ssize_t i = start
    cdef bint crossed = False
    with nogil:
        while i < stop:
            if y > 0 or (y == 0 and b[i]):
                y = y + x[i]
            else:
                y = y + xp[i]
            i += 1
            if (y >= 0) != side0:
                crossed = True
                break
    return i, y, crossed


def first_crossing_real(double y, bint side0, const double[::1] x, const double[::1] xp,
                        const unsigned char[::1] b, Py_ssize_t start, Py_ssize_t stop):
    cdef Py_ssize_t i = start
    cdef bint crossed = False
    with nogil:
        while i < stop:
            if y > 0 or (y == 0 and b[i]):
                y = y + x[i]
            else:
                y = y + xp[i]
            i += 1
            if (y >= 0) != side0:
                crossed = True
                break
    return i, y, crossed
