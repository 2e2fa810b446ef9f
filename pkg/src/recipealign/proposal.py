"""Action-segment proposals from per-frame scores, plus interval NMS and a
trainable logistic frame scorer.

Score post-processing follows threshold -> merge gaps -> drop short runs, so
every emitted segment respects the minimum length. External proposal sets
(JSON ``[[start, end, confidence]]``) go through greedy interval NMS instead.
"""

import json
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import SchemaError, ValidationError
from .trace import ActionSegment


@dataclass(frozen=True)
class ProposalConfig:
    score_threshold: float = 0.5
    min_segment_frames: int = 10
    gap_merge_frames: int = 0

    def __post_init__(self):
        if not (0.0 <= self.score_threshold <= 1.0):
            raise ValidationError(
                f"{self.score_threshold} outside [0, 1]", field="score_threshold"
            )
        if self.min_segment_frames < 1:
            raise ValidationError(
                f"{self.min_segment_frames} < 1", field="min_segment_frames"
            )
        if self.gap_merge_frames < 0:
            raise ValidationError(f"{self.gap_merge_frames} < 0", field="gap_merge_frames")


def segments_from_scores(scores, cfg: ProposalConfig = ProposalConfig()) -> list[ActionSegment]:
    """Maximal runs of frames scoring >= threshold, gap-merged and pruned.

    Each segment's confidence is the mean score over its frames.
    """
    scores = np.asarray(scores, dtype=np.float64)
    if scores.size == 0:
        raise ValueError("scores must be nonempty")
    runs = _kernels.score_runs(
        scores, cfg.score_threshold, cfg.gap_merge_frames, cfg.min_segment_frames
    )
    return [
        ActionSegment(int(s), int(e), confidence=float(np.mean(scores[s:e]))) for s, e in runs
    ]


def nms_intervals(
    proposals: list[tuple[float, float, float]], iou_threshold: float
) -> list[tuple[float, float, float]]:
    """Greedy NMS by descending confidence; kept list is sorted by start."""
    if not (0.0 < iou_threshold <= 1.0):
        raise ValueError(f"iou_threshold {iou_threshold} outside (0, 1]")
    if not proposals:
        return []
    for start, end, _ in proposals:
        if not start < end:
            raise ValueError(f"invalid interval [{start}, {end})")
    arr = np.asarray(proposals, dtype=np.float64)
    keep = _kernels.nms_keep(arr[:, 0], arr[:, 1], arr[:, 2], iou_threshold)
    kept = [tuple(proposals[i]) for i in keep]
    kept.sort(key=lambda p: (p[0], p[1]))
    return kept


@dataclass(frozen=True)
class LinearFrameScorer:
    """Logistic regression over per-frame feature vectors."""

    weights: np.ndarray
    bias: float
    learning_rate: float
    epochs: int

    @property
    def dimension(self) -> int:
        return int(self.weights.shape[0])


def logistic_loss_and_grad(weights, bias, features, labels):
    """Mean logistic loss and its gradient; shared by training and tests."""
    X = np.asarray(features, dtype=np.float64)
    y = np.asarray(labels, dtype=np.float64)
    z = X @ np.asarray(weights, dtype=np.float64) + bias
    loss = float(np.mean(np.maximum(z, 0.0) - y * z + np.log1p(np.exp(-np.abs(z)))))
    p = np.empty_like(z)
    pos = z >= 0
    p[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    p[~pos] = ez / (1.0 + ez)
    g = p - y
    return loss, (X.T @ g) / len(y), float(g.mean())


def _check_features(features) -> np.ndarray:
    X = np.asarray(features, dtype=np.float64)
    if X.ndim != 2 or X.shape[1] < 1:
        raise ValueError(f"features must be a 2-D matrix, got shape {X.shape}")
    if not np.all(np.isfinite(X)):
        raise ValidationError("non-finite feature value", field="features")
    return X


def train_scorer(features, labels, learning_rate: float = 0.1, epochs: int = 100) -> LinearFrameScorer:
    """Full-batch gradient descent from zero init on mean logistic loss."""
    X = _check_features(features)
    y = np.asarray(labels, dtype=np.float64)
    if y.ndim != 1 or y.shape[0] != X.shape[0]:
        raise ValueError(f"labels length {y.shape} does not match {X.shape[0]} feature rows")
    if not np.all((y == 0.0) | (y == 1.0)):
        raise ValueError("labels must be 0 or 1")
    if learning_rate <= 0 or epochs < 1:
        raise ValueError("learning_rate must be positive and epochs >= 1")
    w, b, _ = _kernels.logistic_fit(X, y, learning_rate, epochs)
    return LinearFrameScorer(weights=w, bias=float(b), learning_rate=learning_rate, epochs=epochs)


def training_losses(features, labels, learning_rate: float = 0.1, epochs: int = 100) -> np.ndarray:
    """Loss trajectory (epochs + 1 values) of train_scorer's descent."""
    X = _check_features(features)
    y = np.asarray(labels, dtype=np.float64)
    _, _, losses = _kernels.logistic_fit(X, y, learning_rate, epochs)
    return losses


def score_frames(scorer: LinearFrameScorer, features) -> np.ndarray:
    """logistic(w . x + b) per frame; values strictly inside (0, 1)."""
    X = _check_features(features)
    if X.shape[1] != scorer.dimension:
        raise ValueError(
            f"feature dimension {X.shape[1]} does not match scorer dimension {scorer.dimension}"
        )
    z = X @ scorer.weights + scorer.bias
    p = np.empty_like(z)
    pos = z >= 0
    p[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    p[~pos] = ez / (1.0 + ez)
    return p


def load_features(path) -> np.ndarray:
    """Frame-feature matrix from .npy (dense binary) or CSV text."""
    path = str(path)
    if path.endswith(".npy"):
        X = np.load(path)
    else:
        X = np.loadtxt(path, delimiter=",", ndmin=2)
    return np.asarray(X, dtype=np.float64)


def save_proposals(proposals, path) -> None:
    """Write ``[[start, end, confidence]]`` JSON."""
    with open(path, "w", encoding="utf-8") as fh:
        json.dump([[s, e, c] for s, e, c in proposals], fh)
        fh.write("\n")


def load_proposals(path) -> list[tuple[float, float, float]]:
    path = str(path)
    with open(path, encoding="utf-8") as fh:
        try:
            raw = json.load(fh)
        except json.JSONDecodeError as exc:
            raise SchemaError(f"malformed JSON: {exc.msg}", path=path, line=exc.lineno) from exc
    if not isinstance(raw, list):
        raise SchemaError("top level is not a list", path=path)
    out = []
    for i, entry in enumerate(raw):
        if not isinstance(entry, (list, tuple)) or len(entry) != 3:
            raise SchemaError(f"entry {i} is not [start, end, confidence]", path=path)
        out.append((float(entry[0]), float(entry[1]), float(entry[2])))
    return out


def segments_to_proposals(segments: list[ActionSegment]) -> list[tuple[float, float, float]]:
    return [
        (float(seg.start), float(seg.end), seg.confidence if seg.confidence is not None else 1.0)
        for seg in segments
    ]


def proposals_to_segments(proposals) -> list[ActionSegment]:
    return [ActionSegment(int(s), int(e), confidence=float(c)) for s, e, c in proposals]
