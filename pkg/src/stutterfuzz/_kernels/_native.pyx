# Compiled versions of the frame-energy and overlap-add kernels.
# Arithmetic mirrors pure.py up to summation order; keep both in sync.

import numpy as np

cimport numpy as cnp
from libc.math cimport fabs, floor, sqrt

cnp.import_array()

DEF NORM_FLOOR = 1e-8
DEF TIE_REL = 1e-6
DEF MIN_MATCH = 16


def frame_rms(const double[::1] x, Py_ssize_t frame_len, Py_ssize_t hop_len,
              Py_ssize_t n_frames):
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out_arr = np.empty(n_frames, dtype=np.float64)
    cdef double[::1] out = out_arr
    cdef Py_ssize_t n = x.shape[0]
    cdef Py_ssize_t k, i, start, end
    cdef double acc
    for k in range(n_frames):
        start = k * hop_len
        end = start + frame_len
        if end > n:
            end = n
        if start >= end:
            out[k] = 0.0
            continue
        acc = 0.0
        for i in range(start, end):
            acc += x[i] * x[i]
        out[k] = sqrt(acc / (end - start))
    return out_arr


cdef Py_ssize_t _best_offset(const double[::1] x, Py_ssize_t t_start,
                             Py_ssize_t t_len, Py_ssize_t lo, Py_ssize_t hi):
    # Raw cross-correlation against the natural continuation of the
    # previous frame; earliest near-maximal candidate wins. Four-lane
    # accumulation sums in a different order than the fallback, which the
    # tie window absorbs when the offset is picked.
    cdef Py_ssize_t start, i, n_cand = hi - lo + 1
    cdef double best = -1e300
    cdef double s0, s1, s2, s3, s, threshold
    cdef double[::1] scores = np.empty(n_cand, dtype=np.float64)
    for start in range(lo, hi + 1):
        s0 = s1 = s2 = s3 = 0.0
        i = 0
        while i + 4 <= t_len:
            s0 += x[t_start + i] * x[start + i]
            s1 += x[t_start + i + 1] * x[start + i + 1]
            s2 += x[t_start + i + 2] * x[start + i + 2]
            s3 += x[t_start + i + 3] * x[start + i + 3]
            i += 4
        s = (s0 + s1) + (s2 + s3)
        while i < t_len:
            s += x[t_start + i] * x[start + i]
            i += 1
        scores[start - lo] = s
        if s > best:
            best = s
    threshold = best - TIE_REL * (1.0 if fabs(best) < 1.0 else fabs(best))
    for start in range(n_cand):
        if scores[start] >= threshold:
            return lo + start
    return lo


def ola_stretch(const double[::1] x, double factor, const double[::1] win,
                Py_ssize_t hop_out, Py_ssize_t search, Py_ssize_t out_len):
    cdef Py_ssize_t n = x.shape[0]
    cdef Py_ssize_t w_len = win.shape[0]
    if out_len <= 0:
        return np.zeros(0, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] acc_arr = np.zeros(out_len + w_len, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] norm_arr = np.zeros(out_len + w_len, dtype=np.float64)
    cdef double[::1] acc = acc_arr
    cdef double[::1] norm = norm_arr
    cdef Py_ssize_t prev = -1
    cdef Py_ssize_t k = 0
    cdef Py_ssize_t spos, nominal, actual, avail, i, t_start, t_len, lo, hi
    while k * hop_out < out_len:
        spos = k * hop_out
        nominal = <Py_ssize_t>floor(spos / factor + 0.5)
        if nominal < 0:
            nominal = 0
        if nominal > n - 1:
            nominal = n - 1
        actual = nominal
        if prev >= 0 and search > 0:
            t_start = prev + hop_out
            t_len = hop_out if hop_out < n - t_start else n - t_start
            lo = nominal - search
            if lo < 0:
                lo = 0
            hi = nominal + search
            if hi > n - t_len:
                hi = n - t_len
            if t_len >= MIN_MATCH and hi >= lo:
                actual = _best_offset(x, t_start, t_len, lo, hi)
        avail = w_len if w_len < n - actual else n - actual
        for i in range(avail):
            acc[spos + i] += x[actual + i] * win[i]
            norm[spos + i] += win[i]
        prev = actual
        k += 1
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out_arr = np.empty(out_len, dtype=np.float64)
    cdef double[::1] out = out_arr
    for i in range(out_len):
        if norm[i] > NORM_FLOOR:
            out[i] = acc[i] / norm[i]
        else:
            out[i] = 0.0
    return out_arr
