# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot loops. Must stay output-identical to _pykernels."""
import numpy as np
cimport numpy as cnp
from libc.math cimport floor, isfinite

cnp.import_array()


def hue_bin_counts(const double[::1] hue, const double[::1] sat,
                   double min_saturation, int nbins):
    cdef Py_ssize_t n = hue.shape[0]
    cdef Py_ssize_t i
    cdef double width = 360.0 / nbins
    cdef double h
    cdef long idx
    cdef long total = 0
    counts = np.zeros(nbins, dtype=np.int64)
    cdef cnp.int64_t[::1] c = counts
    if sat.shape[0] != n:
        raise ValueError("hue and saturation arrays differ in length")
    for i in range(n):
        h = hue[i]
        if not isfinite(h) or sat[i] < min_saturation:
            continue
        idx = <long>floor(h / width) % nbins
        if idx < 0:
            idx += nbins
        c[idx] += 1
        total += 1
    return counts, total


def segments_blocked(double ax, double ay, const double[:, ::1] points,
                     const double[:, ::1] centers, double radius):
    cdef Py_ssize_t k = points.shape[0]
    cdef Py_ssize_t m = centers.shape[0]
    cdef Py_ssize_t i, j
    cdef double dx, dy, dd, t, ex, ey, r2 = radius * radius
    out = np.zeros(k, dtype=np.bool_)
    cdef cnp.npy_bool[::1] o = out
    for i in range(k):
        dx = points[i, 0] - ax
        dy = points[i, 1] - ay
        dd = dx * dx + dy * dy
        for j in range(m):
            if dd > 0.0:
                t = ((centers[j, 0] - ax) * dx + (centers[j, 1] - ay) * dy) / dd
                if t < 0.0:
                    t = 0.0
                elif t > 1.0:
                    t = 1.0
            else:
                t = 0.0
            ex = centers[j, 0] - (ax + t * dx)
            ey = centers[j, 1] - (ay + t * dy)
            if ex * ex + ey * ey < r2:
                o[i] = 1
                break
    return out
