# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled kernels. Same signatures and operation order as ``_pykernels``."""

import numpy as np
cimport numpy as cnp
from libc.stdlib cimport malloc, free

cnp.import_array()


cdef void _merge_sort(double *key, Py_ssize_t *perm, Py_ssize_t *tmp, Py_ssize_t n) noexcept nogil:
    # bottom-up stable merge sort of perm by key[perm[.]]
    cdef Py_ssize_t width = 1, lo, mid, hi, a, b, o
    cdef Py_ssize_t *src = perm
    cdef Py_ssize_t *dst = tmp
    cdef Py_ssize_t *swap
    while width < n:
        lo = 0
        while lo < n:
            mid = lo + width
            if mid > n:
                mid = n
            hi = lo + 2 * width
            if hi > n:
                hi = n
            a = lo
            b = mid
            o = lo
            while a < mid and b < hi:
                if key[src[b]] < key[src[a]]:
                    dst[o] = src[b]
                    b += 1
                else:
                    dst[o] = src[a]
                    a += 1
                o += 1
            while a < mid:
                dst[o] = src[a]
                a += 1
                o += 1
            while b < hi:
                dst[o] = src[b]
                b += 1
                o += 1
            lo = hi
        swap = src
        src = dst
        dst = swap
        width *= 2
    if src != perm:
        for o in range(n):
            perm[o] = src[o]


def best_split(const double[:, ::1] X, const double[::1] yc, const cnp.int64_t[::1] idx,
               const cnp.int64_t[::1] features, Py_ssize_t min_leaf):
    cdef Py_ssize_t n = idx.shape[0]
    cdef Py_ssize_t nf = features.shape[0]
    cdef Py_ssize_t best_f = -1
    cdef double best_t = 0.0, best_gain = 0.0
    if n < 2 * min_leaf:
        return best_f, best_t, best_gain
    cdef double *vals = <double *> malloc(n * sizeof(double))
    cdef Py_ssize_t *perm = <Py_ssize_t *> malloc(n * sizeof(Py_ssize_t))
    cdef Py_ssize_t *tmp = <Py_ssize_t *> malloc(n * sizeof(Py_ssize_t))
    cdef double *csum = <double *> malloc(n * sizeof(double))
    if vals == NULL or perm == NULL or tmp == NULL or csum == NULL:
        free(vals); free(perm); free(tmp); free(csum)
        raise MemoryError()
    cdef Py_ssize_t fi, f, i
    cdef double total, left, right, gain, nl, nr, t, dn = <double> n
    try:
        with nogil:
            for fi in range(nf):
                f = features[fi]
                for i in range(n):
                    vals[i] = X[idx[i], f]
                    perm[i] = i
                _merge_sort(vals, perm, tmp, n)
                total = 0.0
                for i in range(n):
                    total = total + yc[perm[i]]
                    csum[i] = total
                for i in range(n - 1):
                    nl = <double> (i + 1)
                    nr = dn - nl
                    if nl < min_leaf or nr < min_leaf:
                        continue
                    if vals[perm[i]] == vals[perm[i + 1]]:
                        continue
                    left = csum[i]
                    right = total - left
                    gain = left * left / nl + right * right / nr - total * total / dn
                    if gain > best_gain:
                        best_gain = gain
                        best_f = f
                        t = (vals[perm[i]] + vals[perm[i + 1]]) / 2.0
                        if t == vals[perm[i + 1]]:
                            t = vals[perm[i]]
                        best_t = t
    finally:
        free(vals); free(perm); free(tmp); free(csum)
    return best_f, best_t, best_gain


def predict_tree(const cnp.int64_t[::1] feature, const double[::1] threshold,
                 const cnp.int64_t[::1] left, const cnp.int64_t[::1] right,
                 const double[::1] value, const double[:, ::1] X):
    cdef Py_ssize_t r, node, rows = X.shape[0]
    out = np.empty(rows, dtype=np.float64)
    cdef double[::1] o = out
    with nogil:
        for r in range(rows):
            node = 0
            while feature[node] >= 0:
                if X[r, feature[node]] <= threshold[node]:
                    node = left[node]
                else:
                    node = right[node]
            o[r] = value[node]
    return out


def forecast_recursive(const double[::1] alpha, const double[:, :, ::1] beta,
                       const double[:, ::1] history, Py_ssize_t h):
    cdef Py_ssize_t p = beta.shape[0], k = beta.shape[1], hist = history.shape[0]
    cdef Py_ssize_t step, t, i, lag, j
    cdef double acc
    window_arr = np.empty((hist + h, k), dtype=np.float64)
    cdef double[:, ::1] window = window_arr
    window[:hist, :] = history
    with nogil:
        for step in range(h):
            t = hist + step
            for i in range(k):
                acc = alpha[i]
                for lag in range(p):
                    for j in range(k):
                        acc = acc + beta[lag, i, j] * window[t - 1 - lag, j]
                window[t, i] = acc
    return window_arr[hist:].copy()
