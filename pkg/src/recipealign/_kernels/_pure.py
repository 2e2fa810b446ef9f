"""Numpy fallback implementations of the hot kernels.

Signatures and semantics are identical to the compiled module
``recipealign._kernels._core``; the dispatcher in ``__init__`` picks one at
import time. Keep the two in lockstep.
"""

import numpy as np


def score_runs(scores, threshold, gap_merge, min_len):
    """Runs of frames with score >= threshold, as an (n, 2) int64 array.

    Post-processing order: threshold, merge gaps <= gap_merge, drop runs
    shorter than min_len. Intervals are half-open frame ranges.
    """
    scores = np.ascontiguousarray(scores, dtype=np.float64)
    mask = scores >= threshold
    padded = np.concatenate(([False], mask, [False]))
    edges = np.flatnonzero(padded[1:] != padded[:-1])
    starts = edges[0::2]
    ends = edges[1::2]
    if gap_merge > 0 and starts.size > 1:
        merged = [[int(starts[0]), int(ends[0])]]
        for s, e in zip(starts[1:], ends[1:]):
            if s - merged[-1][1] <= gap_merge:
                merged[-1][1] = int(e)
            else:
                merged.append([int(s), int(e)])
        runs = np.asarray(merged, dtype=np.int64)
    else:
        runs = np.stack([starts, ends], axis=1).astype(np.int64)
    if runs.size == 0:
        return np.empty((0, 2), dtype=np.int64)
    keep = (runs[:, 1] - runs[:, 0]) >= min_len
    return np.ascontiguousarray(runs[keep])


def nms_keep(starts, ends, confs, iou_threshold):
    """Greedy interval NMS; returns kept indices in keep order (int64).

    Candidates are visited by descending confidence, ties broken by input
    order; a candidate survives iff its IOU with every kept interval is
    strictly below iou_threshold.
    """
    starts = np.asarray(starts, dtype=np.float64)
    ends = np.asarray(ends, dtype=np.float64)
    confs = np.asarray(confs, dtype=np.float64)
    n = starts.shape[0]
    order = np.lexsort((np.arange(n), -confs))
    kept: list[int] = []
    for i in order:
        ok = True
        for k in kept:
            inter = min(ends[i], ends[k]) - max(starts[i], starts[k])
            if inter > 0.0:
                union = (ends[i] - starts[i]) + (ends[k] - starts[k]) - inter
                if inter / union >= iou_threshold:
                    ok = False
                    break
        if ok:
            kept.append(int(i))
    return np.asarray(kept, dtype=np.int64)


def gaussian_weights(length, sigma_fraction):
    """Discrete Gaussian over `length` frames, centred, normalized to sum 1.

    sigma = sigma_fraction * length; a length-1 window is [1.0].
    """
    if length == 1:
        return np.ones(1)
    centre = (length - 1) / 2.0
    sigma = sigma_fraction * length
    j = np.arange(length, dtype=np.float64)
    w = np.exp(-((j - centre) ** 2) / (2.0 * sigma * sigma))
    return w / w.sum()


def temporal_scores(starts, ends, num_frames, step_ratios, sigma_fraction):
    """Gaussian-weighted temporal similarity for every (segment, step) pair.

    For segment i and step ratio r_j the entry is
    sum_f w_i(f) * clip(1 - |f / num_frames - r_j|, 0, 1), with w_i the
    normalized Gaussian over the segment's frames.
    """
    starts = np.asarray(starts, dtype=np.int64)
    ends = np.asarray(ends, dtype=np.int64)
    step_ratios = np.asarray(step_ratios, dtype=np.float64)
    out = np.zeros((starts.shape[0], step_ratios.shape[0]))
    for i in range(starts.shape[0]):
        s, e = int(starts[i]), int(ends[i])
        w = gaussian_weights(e - s, sigma_fraction)
        pos = np.arange(s, e, dtype=np.float64) / num_frames
        for j, r in enumerate(step_ratios):
            sim = np.clip(1.0 - np.abs(pos - r), 0.0, 1.0)
            out[i, j] = np.dot(w, sim)
    return out


def _sigmoid(z):
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def logistic_fit(features, labels, learning_rate, epochs):
    """Full-batch gradient descent on mean logistic loss, zero init.

    Returns (weights, bias, losses) where losses has epochs + 1 entries:
    the loss before each update and the final loss.
    """
    X = np.ascontiguousarray(features, dtype=np.float64)
    y = np.ascontiguousarray(labels, dtype=np.float64)
    n, d = X.shape
    w = np.zeros(d)
    b = 0.0
    losses = np.empty(epochs + 1)
    for k in range(epochs + 1):
        z = X @ w + b
        # mean of softplus(z) - y*z, computed stably
        losses[k] = float(np.mean(np.maximum(z, 0.0) - y * z + np.log1p(np.exp(-np.abs(z)))))
        if k == epochs:
            break
        g = _sigmoid(z) - y
        w = w - learning_rate * (X.T @ g) / n
        b = b - learning_rate * float(g.mean())
    return w, b, losses
