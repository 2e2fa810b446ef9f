"""Aggregate per-frame object detections into per-segment evidence."""

import dataclasses
from dataclasses import dataclass

from .trace import ActionSegment, VideoTrace

DEFAULT_TOP_K = 3


@dataclass(frozen=True)
class ObjectEvidence:
    segment: ActionSegment
    histogram: dict[str, int]
    top_k: tuple[str, ...]


def _ranked_labels(histogram: dict[str, int]) -> list[str]:
    # descending count, ties by label
    return [label for label, _ in sorted(histogram.items(), key=lambda kv: (-kv[1], kv[0]))]


def build_histogram(
    trace: VideoTrace, segment: ActionSegment, frame_stride: int = 1, k: int = DEFAULT_TOP_K
) -> ObjectEvidence:
    """Count the argmax detection of every sampled frame inside the segment.

    Frames are sampled at start, start+stride, ...; a frame contributes the
    label of its highest-confidence detection (confidence ties broken by
    lexicographically smallest label), or nothing if it has no detections.
    """
    if frame_stride < 1:
        raise ValueError(f"frame_stride must be >= 1, got {frame_stride}")
    if segment.start < 0 or segment.end > trace.num_frames:
        raise ValueError(
            f"segment [{segment.start}, {segment.end}) outside trace of {trace.num_frames} frames"
        )
    histogram: dict[str, int] = {}
    for f in range(segment.start, segment.end, frame_stride):
        frame = trace.detections[f]
        if not frame:
            continue
        label = min(frame, key=lambda det: (-det[1], det[0]))[0]
        histogram[label] = histogram.get(label, 0) + 1
    return ObjectEvidence(
        segment=segment, histogram=histogram, top_k=tuple(_ranked_labels(histogram)[:k])
    )


def top_objects(evidence: ObjectEvidence, k: int = DEFAULT_TOP_K) -> tuple[str, ...]:
    """The k most frequent labels (fewer if the histogram is smaller)."""
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    return tuple(_ranked_labels(evidence.histogram)[:k])


def annotate_segments(
    trace: VideoTrace,
    segments: list[ActionSegment],
    frame_stride: int = 1,
    k: int = DEFAULT_TOP_K,
) -> list[ActionSegment]:
    """Return segments with histogram and top_objects fields populated."""
    out = []
    for seg in segments:
        ev = build_histogram(trace, seg, frame_stride=frame_stride, k=k)
        out.append(dataclasses.replace(seg, histogram=ev.histogram, top_objects=ev.top_k))
    return out


def evidence_of(segment: ActionSegment) -> ObjectEvidence:
    """View an annotated segment as ObjectEvidence (empty if unannotated)."""
    if segment.histogram is None or segment.top_objects is None:
        return ObjectEvidence(segment=segment, histogram={}, top_k=())
    return ObjectEvidence(segment=segment, histogram=segment.histogram, top_k=segment.top_objects)
