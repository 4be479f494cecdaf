"""Pure-Python path kernels, identical in output to the compiled ``_core``."""

import numpy as np


def _walk(y, x, xp, b, dtype):
    out = [y]
    append = out.append
    for xi, xpi, bi in zip(x.tolist(), xp.tolist(), b.tolist()):
        if y > 0 or (y == 0 and bi):
            y = y + xi
        else:
            y = y + xpi
        append(y)
    return np.array(out, dtype=dtype)


def walk_int(y0, x, xp, b):
    return _walk(int(y0), x, xp, b, np.int64)


def walk_real(y0, x, xp, b):
    return _walk(float(y0), x, xp, b, np.float64)


def _ladder_times(pos, b):
    p = pos.tolist()
    bits = b.tolist()
    n = len(p)
    out = [0]
    cur = 0
    while cur < n - 1:
        y = p[cur]
        down = y > 0 or (y == 0 and bits[cur])
        k = cur + 1
        if down:
            while k < n and p[k] > y:
                k += 1
        else:
            while k < n and p[k] < y:
                k += 1
        if k >= n:
            break
        out.append(k)
        cur = k
    return np.array(out, dtype=np.int64)


ladder_times_int = _ladder_times
ladder_times_real = _ladder_times


def _first_crossing(y, side0, x, xp, b, start, stop):
    i = start
    while i < stop:
        if y > 0 or (y == 0 and b[i]):
            y = y + x[i]
        else:
            y = y + xp[i]
        i += 1
        if (y >= 0) != side0:
            return i, y, True
    return i, y, False


def first_crossing_int(y, side0, x, xp, b, start, stop):
    i, y, c = _first_crossing(int(y), bool(side0), x, xp, b, start, stop)
    return i, int(y), c


def first_crossing_real(y, side0, x, xp, b, start, stop):
    i, y, c = _first_crossing(float(y), bool(side0), x, xp, b, start, stop)
    return i, float(y), c
