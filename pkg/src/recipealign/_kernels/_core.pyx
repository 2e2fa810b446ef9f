# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled implementations of the hot kernels.

Semantics match recipealign._kernels._pure; see that module for the
documented contracts. Ordering rules (NMS tie-breaks, run merging) must stay
identical so the two backends are interchangeable.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport exp, fabs, log1p

cnp.import_array()


def score_runs(scores, double threshold, long gap_merge, long min_len):
    cdef cnp.ndarray[cnp.float64_t, ndim=1] sc = np.ascontiguousarray(scores, dtype=np.float64)
    cdef long n = sc.shape[0]
    cdef long i = 0, run_start
    cdef list runs = []
    while i < n:
        if sc[i] >= threshold:
            run_start = i
            while i < n and sc[i] >= threshold:
                i += 1
            runs.append((run_start, i))
        else:
            i += 1
    cdef list merged = []
    cdef long s, e
    cdef long cur_s = -1, cur_e = -1
    for s, e in runs:
        if cur_s < 0:
            cur_s, cur_e = s, e
        elif gap_merge > 0 and s - cur_e <= gap_merge:
            cur_e = e
        else:
            merged.append((cur_s, cur_e))
            cur_s, cur_e = s, e
    if cur_s >= 0:
        merged.append((cur_s, cur_e))
    cdef list kept = [(s, e) for s, e in merged if e - s >= min_len]
    if not kept:
        return np.empty((0, 2), dtype=np.int64)
    return np.asarray(kept, dtype=np.int64)


def nms_keep(starts, ends, confs, double iou_threshold):
    cdef cnp.ndarray[cnp.float64_t, ndim=1] st = np.asarray(starts, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] en = np.asarray(ends, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] cf = np.asarray(confs, dtype=np.float64)
    cdef long n = st.shape[0]
    cdef cnp.ndarray[cnp.int64_t, ndim=1] order = np.lexsort((np.arange(n), -cf)).astype(np.int64)
    cdef cnp.ndarray[cnp.int64_t, ndim=1] kept = np.empty(n, dtype=np.int64)
    cdef long n_kept = 0
    cdef long oi, i, j, k
    cdef double inter, union
    cdef bint ok
    for oi in range(n):
        i = order[oi]
        ok = True
        for j in range(n_kept):
            k = kept[j]
            inter = min(en[i], en[k]) - max(st[i], st[k])
            if inter > 0.0:
                union = (en[i] - st[i]) + (en[k] - st[k]) - inter
                if inter / union >= iou_threshold:
                    ok = False
                    break
        if ok:
            kept[n_kept] = i
            n_kept += 1
    return kept[:n_kept].copy()


def gaussian_weights(long length, double sigma_fraction):
    cdef cnp.ndarray[cnp.float64_t, ndim=1] w = np.empty(length, dtype=np.float64)
    if length == 1:
        w[0] = 1.0
        return w
    cdef double centre = (length - 1) / 2.0
    cdef double sigma = sigma_fraction * length
    cdef double total = 0.0
    cdef long j
    for j in range(length):
        w[j] = exp(-((j - centre) * (j - centre)) / (2.0 * sigma * sigma))
        total += w[j]
    for j in range(length):
        w[j] /= total
    return w


def temporal_scores(starts, ends, long num_frames, step_ratios, double sigma_fraction):
    cdef cnp.ndarray[cnp.int64_t, ndim=1] st = np.asarray(starts, dtype=np.int64)
    cdef cnp.ndarray[cnp.int64_t, ndim=1] en = np.asarray(ends, dtype=np.int64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] ratios = np.asarray(step_ratios, dtype=np.float64)
    cdef long n_seg = st.shape[0]
    cdef long n_step = ratios.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=2] out = np.zeros((n_seg, n_step), dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] w
    cdef long i, j, f, s, e
    cdef double sim, acc, pos
    for i in range(n_seg):
        s = st[i]
        e = en[i]
        w = gaussian_weights(e - s, sigma_fraction)
        for j in range(n_step):
            acc = 0.0
            for f in range(s, e):
                pos = <double>f / <double>num_frames
                sim = 1.0 - fabs(pos - ratios[j])
                if sim < 0.0:
                    sim = 0.0
                elif sim > 1.0:
                    sim = 1.0
                acc += w[f - s] * sim
            out[i, j] = acc
    return out


def logistic_fit(features, labels, double learning_rate, long epochs):
    cdef cnp.ndarray[cnp.float64_t, ndim=2] X = np.ascontiguousarray(features, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] y = np.ascontiguousarray(labels, dtype=np.float64)
    cdef long n = X.shape[0]
    cdef long d = X.shape[1]
    cdef cnp.ndarray[cnp.float64_t, ndim=1] w = np.zeros(d, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] z = np.empty(n, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] g = np.empty(n, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] losses = np.empty(epochs + 1, dtype=np.float64)
    cdef double b = 0.0
    cdef double loss, zi, p, gm, acc
    cdef long k, i, j
    for k in range(epochs + 1):
        loss = 0.0
        for i in range(n):
            zi = b
            for j in range(d):
                zi += X[i, j] * w[j]
            z[i] = zi
            loss += (zi if zi > 0.0 else 0.0) - y[i] * zi + log1p(exp(-fabs(zi)))
        losses[k] = loss / n
        if k == epochs:
            break
        for i in range(n):
            zi = z[i]
            if zi >= 0.0:
                p = 1.0 / (1.0 + exp(-zi))
            else:
                p = exp(zi) / (1.0 + exp(zi))
            g[i] = p - y[i]
        for j in range(d):
            acc = 0.0
            for i in range(n):
                acc += X[i, j] * g[i]
            w[j] -= learning_rate * acc / n
        gm = 0.0
        for i in range(n):
            gm += g[i]
        b -= learning_rate * gm / n
    return w, b, losses
