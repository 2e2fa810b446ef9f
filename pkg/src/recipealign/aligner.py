"""Segment-to-step assignment by weighted similarity scoring.

The score of a (frame, step) pair is a weighted average of three terms:

  * object term: best embedding similarity between the step's manipulated
    objects and the segment's detected objects, with secondary objects
    down-weighted before taking the max;
  * action term: best similarity between the step's action verbs and the
    detected objects;
  * temporal term: 1 - |frame position ratio - step index ratio|.

Segment scores are a Gaussian-weighted average over the segment's frames, so
central frames contribute more. Segments are assigned greedily in temporal
order to their best-scoring step whose ordering prerequisites are already
satisfied; if the best admissible score falls below the threshold the
segment is discarded (its frames stay BACKGROUND).
"""

import json
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .embeddings import EmbeddingStore, similarity, word_distance
from .errors import SchemaError, ValidationError
from .evidence import ObjectEvidence, evidence_of
from .recipe import ParsedRecipe, ParsedStep
from .trace import BACKGROUND, ActionSegment, VideoTrace

MODES = ("full", "temporal_only", "semantic_only")


@dataclass(frozen=True)
class AlignConfig:
    w_obj: float = 0.5
    w_act: float = 0.2
    w_temp: float = 0.3
    secondary_object_weight: float = 0.5
    score_threshold: float = 0.2
    gaussian_sigma_fraction: float = 0.25
    mode: str = "full"

    def __post_init__(self):
        if min(self.w_obj, self.w_act, self.w_temp) < 0:
            raise ValidationError("term weights must be non-negative", field="weights")
        if abs(self.w_obj + self.w_act + self.w_temp - 1.0) > 1e-9:
            raise ValidationError(
                f"weights sum to {self.w_obj + self.w_act + self.w_temp}, expected 1", field="weights"
            )
        if not (0.0 <= self.secondary_object_weight <= 1.0):
            raise ValidationError(
                f"{self.secondary_object_weight} outside [0, 1]", field="secondary_object_weight"
            )
        if not (0.0 <= self.score_threshold <= 1.0):
            raise ValidationError(f"{self.score_threshold} outside [0, 1]", field="score_threshold")
        if self.gaussian_sigma_fraction <= 0:
            raise ValidationError(
                f"{self.gaussian_sigma_fraction} not positive", field="gaussian_sigma_fraction"
            )
        if self.mode not in MODES:
            raise ValidationError(f"unknown mode {self.mode!r}", field="mode")

    def effective_weights(self) -> tuple[float, float, float]:
        """Term weights after applying the ablation mode."""
        if self.mode == "temporal_only":
            return 0.0, 0.0, 1.0
        if self.mode == "semantic_only":
            sem = self.w_obj + self.w_act
            if sem <= 0:
                raise ValidationError(
                    "semantic_only requires w_obj + w_act > 0", field="weights"
                )
            return self.w_obj / sem, self.w_act / sem, 0.0
        return self.w_obj, self.w_act, self.w_temp


@dataclass
class Alignment:
    video_id: str
    frame_labels: list[int]  # per frame: step index or BACKGROUND
    segment_scores: np.ndarray  # (num_segments, num_steps)
    discarded: set[int]  # segment indices that fell below the threshold


def gaussian_weights(length: int, sigma_fraction: float) -> np.ndarray:
    """Normalized centred Gaussian over a segment's frames (sums to 1)."""
    if length < 1:
        raise ValueError(f"length must be >= 1, got {length}")
    return _kernels.gaussian_weights(length, sigma_fraction)


def _semantic_terms(
    step: ParsedStep, labels, store: EmbeddingStore, cfg: AlignConfig
) -> tuple[float, float]:
    """(object term, action term): max-of-pairs similarities against labels."""
    s_obj = 0.0
    weighted_objects = [(o, 1.0) for o in step.primary_objects]
    weighted_objects += [(o, cfg.secondary_object_weight) for o in step.secondary_objects]
    for obj, weight in weighted_objects:
        for det in labels:
            s = weight * similarity(word_distance(store, obj, det))
            if s > s_obj:
                s_obj = s
    s_act = 0.0
    for act in step.actions:
        for det in labels:
            s = similarity(word_distance(store, act, det))
            if s > s_act:
                s_act = s
    return s_obj, s_act


def temporal_similarity(frame: int, total_frames: int, step_index: int, num_steps: int) -> float:
    """1 - |frame/total - step/steps|, clamped to [0, 1]."""
    value = 1.0 - abs(frame / total_frames - step_index / num_steps)
    return min(1.0, max(0.0, value))


def frame_step_score(
    frame: int,
    total_frames: int,
    step: ParsedStep,
    num_steps: int,
    evidence: ObjectEvidence,
    store: EmbeddingStore,
    cfg: AlignConfig,
) -> float:
    """Weighted average of the object, action and temporal terms."""
    if not (0 <= frame < total_frames):
        raise ValueError(f"frame {frame} outside [0, {total_frames})")
    if not (1 <= step.index <= num_steps):
        raise ValueError(f"step index {step.index} outside 1..{num_steps}")
    w_obj, w_act, w_temp = cfg.effective_weights()
    s_obj, s_act = _semantic_terms(step, evidence.top_k, store, cfg)
    s_temp = temporal_similarity(frame, total_frames, step.index, num_steps)
    return w_obj * s_obj + w_act * s_act + w_temp * s_temp


def segment_step_score(
    segment: ActionSegment,
    total_frames: int,
    step: ParsedStep,
    num_steps: int,
    evidence: ObjectEvidence,
    store: EmbeddingStore,
    cfg: AlignConfig,
) -> float:
    """Gaussian-weighted average of frame scores over the segment.

    The semantic terms are constant across a segment's frames, so this
    factors into semantic + w_temp * (weighted temporal average); the same
    kernel drives the batch scorer in align() for bit-identical results.
    """
    w_obj, w_act, w_temp = cfg.effective_weights()
    s_obj, s_act = _semantic_terms(step, evidence.top_k, store, cfg)
    temporal = _kernels.temporal_scores(
        np.asarray([segment.start], dtype=np.int64),
        np.asarray([segment.end], dtype=np.int64),
        total_frames,
        np.asarray([step.index / num_steps]),
        cfg.gaussian_sigma_fraction,
    )[0, 0]
    return w_obj * s_obj + w_act * s_act + w_temp * float(temporal)


def score_matrix(
    segments: list[ActionSegment],
    recipe: ParsedRecipe,
    total_frames: int,
    store: EmbeddingStore,
    cfg: AlignConfig,
) -> np.ndarray:
    """(num_segments, num_steps) segment scores."""
    num_steps = recipe.num_steps
    w_obj, w_act, w_temp = cfg.effective_weights()
    sem = np.zeros((len(segments), num_steps))
    for i, seg in enumerate(segments):
        labels = evidence_of(seg).top_k
        for j, step in enumerate(recipe.steps):
            s_obj, s_act = _semantic_terms(step, labels, store, cfg)
            sem[i, j] = w_obj * s_obj + w_act * s_act
    if not segments:
        return sem
    temporal = _kernels.temporal_scores(
        np.asarray([seg.start for seg in segments], dtype=np.int64),
        np.asarray([seg.end for seg in segments], dtype=np.int64),
        total_frames,
        np.asarray([step.index / num_steps for step in recipe.steps]),
        cfg.gaussian_sigma_fraction,
    )
    return sem + w_temp * temporal


def align(
    segments: list[ActionSegment],
    recipe: ParsedRecipe,
    trace: VideoTrace,
    store: EmbeddingStore,
    cfg: AlignConfig = AlignConfig(),
) -> Alignment:
    """Assign each segment to at most one recipe step.

    Segments are visited in temporal order. A candidate step whose
    prerequisites have not been assigned to an earlier segment is skipped in
    favour of the next-best step; if the best admissible score is below the
    threshold the segment is discarded. Every frame of an assigned segment
    receives the step index; all other frames stay BACKGROUND.
    """
    prev_end = 0
    for seg in segments:
        if seg.start < prev_end:
            raise ValueError("segments must be sorted by start and pairwise disjoint")
        if seg.end > trace.num_frames:
            raise ValueError(
                f"segment [{seg.start}, {seg.end}) outside trace of {trace.num_frames} frames"
            )
        prev_end = seg.end

    scores = score_matrix(segments, recipe, trace.num_frames, store, cfg)
    frame_labels = [BACKGROUND] * trace.num_frames
    discarded: set[int] = set()
    assigned_steps: set[int] = set()

    for i, seg in enumerate(segments):
        order = sorted(range(recipe.num_steps), key=lambda j: (-scores[i, j], j))
        chosen = None
        for j in order:
            if recipe.steps[j].prerequisites - assigned_steps:
                continue  # unmet ordering constraint; try the next-best step
            chosen = j
            break
        if chosen is None or scores[i, chosen] < cfg.score_threshold:
            discarded.add(i)
            continue
        step = recipe.steps[chosen]
        assigned_steps.add(step.index)
        for f in range(seg.start, seg.end):
            frame_labels[f] = step.index

    return Alignment(
        video_id=trace.video_id,
        frame_labels=frame_labels,
        segment_scores=scores,
        discarded=discarded,
    )


def save_alignment(alignment: Alignment, path) -> None:
    doc = {
        "video_id": alignment.video_id,
        "frame_labels": alignment.frame_labels,
        "segment_scores": [list(map(float, row)) for row in alignment.segment_scores],
        "discarded": sorted(alignment.discarded),
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh)
        fh.write("\n")


def load_alignment(path) -> Alignment:
    path = str(path)
    with open(path, encoding="utf-8") as fh:
        try:
            raw = json.load(fh)
        except json.JSONDecodeError as exc:
            raise SchemaError(f"malformed JSON: {exc.msg}", path=path, line=exc.lineno) from exc
    for key in ("video_id", "frame_labels", "segment_scores", "discarded"):
        if key not in raw:
            raise SchemaError(f"missing field '{key}'", path=path)
    return Alignment(
        video_id=raw["video_id"],
        frame_labels=[int(x) for x in raw["frame_labels"]],
        segment_scores=np.asarray(raw["segment_scores"], dtype=np.float64).reshape(
            len(raw["segment_scores"]), -1
        ),
        discarded=set(int(x) for x in raw["discarded"]),
    )
