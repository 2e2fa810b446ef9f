"""Evaluation protocols: proposal IOU recall at multiple thresholds and
frame-level alignment precision averaged over videos.

Proposal quality is measured as recall of ground-truth segments under greedy
one-to-one matching by descending IOU; a truth segment counts as recovered
at level alpha when its matched proposal reaches IOU >= alpha. The matching
itself is threshold-free, so recall is exactly non-increasing in alpha.

Frame precision counts frames whose predicted step label equals the ground
truth label. The denominator is configurable: "all" includes BACKGROUND
frames, "labeled" restricts to frames inside annotated non-background
segments. Videos with no usable ground truth are excluded from averages.
"""

import hashlib
from dataclasses import dataclass, field, replace as dc_replace

from .aligner import AlignConfig, Alignment, align
from .errors import ValidationError
from .evidence import annotate_segments
from .proposal import ProposalConfig, segments_from_scores
from .trace import BACKGROUND, ActionSegment, GroundTruth, VideoTrace

ALPHAS = (0.3, 0.4, 0.5)


def interval_iou(a: tuple[float, float], b: tuple[float, float]) -> float:
    """Intersection over union of two half-open intervals."""
    if not (a[0] < a[1]) or not (b[0] < b[1]):
        raise ValueError(f"invalid interval: {a} vs {b}")
    inter = min(a[1], b[1]) - max(a[0], b[0])
    if inter <= 0:
        return 0.0
    union = (a[1] - a[0]) + (b[1] - b[0]) - inter
    return inter / union


def _check_disjoint_sorted(intervals, name: str) -> None:
    prev_end = None
    for start, end in intervals:
        if not (start < end):
            raise ValueError(f"{name}: invalid interval [{start}, {end})")
        if prev_end is not None and start < prev_end:
            raise ValueError(f"{name}: intervals overlap or are unsorted")
        prev_end = end


def match_segments(
    predicted: list[tuple[float, float]], truth: list[tuple[float, float]]
) -> list[tuple[int, int, float]]:
    """Greedy one-to-one matching by descending IOU.

    Returns (truth_index, predicted_index, iou) triples for matched pairs
    with positive overlap, ordered by the greedy pass.
    """
    _check_disjoint_sorted(predicted, "predicted")
    _check_disjoint_sorted(truth, "truth")
    pairs = []
    for t, tv in enumerate(truth):
        for p, pv in enumerate(predicted):
            iou = interval_iou(pv, tv)
            if iou > 0:
                pairs.append((iou, t, p))
    pairs.sort(key=lambda x: (-x[0], x[1], x[2]))
    used_t: set[int] = set()
    used_p: set[int] = set()
    matches = []
    for iou, t, p in pairs:
        if t in used_t or p in used_p:
            continue
        used_t.add(t)
        used_p.add(p)
        matches.append((t, p, iou))
    return matches


def proposal_recall_at(
    predicted: list[tuple[float, float]], truth: list[tuple[float, float]], alpha: float
) -> float | None:
    """Fraction of truth segments matched at IOU >= alpha; None if no truth."""
    if not truth:
        return None
    matches = match_segments(predicted, truth)
    hit = sum(1 for _, _, iou in matches if iou >= alpha)
    return hit / len(truth)


def matched_ious(predicted, truth) -> list[float]:
    """IOU of every matched truth segment (0.0 for unmatched), by truth order."""
    matches = match_segments(predicted, truth)
    by_truth = {t: iou for t, _, iou in matches}
    return [by_truth.get(t, 0.0) for t in range(len(truth))]


def truth_frame_labels(truth: GroundTruth, num_frames: int) -> list[int]:
    """Per-frame step labels implied by ground truth (BACKGROUND elsewhere)."""
    labels = [BACKGROUND] * num_frames
    for seg in truth.segments:
        if seg.end > num_frames:
            raise ValueError(f"ground truth segment end {seg.end} beyond {num_frames} frames")
        for f in range(seg.start, seg.end):
            labels[f] = seg.step_index
    return labels


def frame_precision(
    alignment: Alignment, truth: GroundTruth, denominator: str = "all"
) -> float | None:
    """Fraction of frames whose predicted label equals the truth label.

    denominator="all" counts every frame; "labeled" counts only frames whose
    truth label is a real step (returns None when there are none).
    """
    if denominator not in ("all", "labeled"):
        raise ValueError(f"unknown denominator {denominator!r}")
    truth_labels = truth_frame_labels(truth, len(alignment.frame_labels))
    pred = alignment.frame_labels
    if denominator == "labeled":
        indices = [f for f, t in enumerate(truth_labels) if t != BACKGROUND]
        if not indices:
            return None
        return sum(1 for f in indices if pred[f] == truth_labels[f]) / len(indices)
    return sum(1 for p, t in zip(pred, truth_labels) if p == t) / len(truth_labels)


@dataclass
class EvalReport:
    iou_at: dict[float, float] = field(default_factory=dict)
    matched_iou_values: list[float] = field(default_factory=list)
    frame_precision_per_video: dict[str, float] = field(default_factory=dict)
    mean_frame_precision: float | None = None
    precision_denominator: str = "all"

    def to_dict(self) -> dict:
        return {
            "iou_at": {repr(a): v for a, v in self.iou_at.items()},
            "matched_iou_values": self.matched_iou_values,
            "frame_precision_per_video": self.frame_precision_per_video,
            "mean_frame_precision": self.mean_frame_precision,
            "precision_denominator": self.precision_denominator,
        }


def evaluate_videos(
    items: list[tuple[VideoTrace, Alignment, list[ActionSegment] | None]],
    denominator: str = "all",
    alphas=ALPHAS,
) -> EvalReport:
    """Aggregate metrics over (trace, alignment, optional proposals) triples.

    IOU recall pools matched truth segments across videos; precision is
    averaged per video. Videos without ground truth are skipped.
    """
    report = EvalReport(precision_denominator=denominator)
    total_truth = 0
    hits = {a: 0 for a in alphas}
    for trace, alignment, segments in items:
        if trace.ground_truth is None:
            continue
        if len(alignment.frame_labels) != trace.num_frames:
            raise ValueError(
                f"{trace.video_id}: alignment covers {len(alignment.frame_labels)} frames, "
                f"trace has {trace.num_frames}"
            )
        precision = frame_precision(alignment, trace.ground_truth, denominator)
        if precision is not None:
            report.frame_precision_per_video[trace.video_id] = precision
        if segments is not None:
            truth_iv = [(s.start, s.end) for s in trace.ground_truth.segments]
            pred_iv = [(s.start, s.end) for s in segments]
            if truth_iv:
                ious = matched_ious(pred_iv, truth_iv)
                report.matched_iou_values.extend(ious)
                total_truth += len(truth_iv)
                for a in alphas:
                    hits[a] += sum(1 for iou in ious if iou >= a)
    if total_truth:
        report.iou_at = {a: hits[a] / total_truth for a in alphas}
    if report.frame_precision_per_video:
        values = report.frame_precision_per_video.values()
        report.mean_frame_precision = sum(values) / len(values)
    return report


def run_ablation(
    corpus: list[tuple[VideoTrace, "ParsedRecipe", "EmbeddingStore"]],
    cfg: AlignConfig = AlignConfig(),
    proposal_cfg: ProposalConfig = ProposalConfig(),
    frame_stride: int = 1,
    top_k: int = 3,
    denominator: str = "all",
) -> dict[str, float]:
    """Mean frame precision for each similarity mode on the same corpus."""
    results = {}
    for mode in ("full", "temporal_only", "semantic_only"):
        mode_cfg = dc_replace(cfg, mode=mode)
        items = []
        for trace, recipe, store in corpus:
            segments = segments_from_scores(trace.action_scores, proposal_cfg)
            segments = annotate_segments(trace, segments, frame_stride=frame_stride, k=top_k)
            alignment = align(segments, recipe, trace, store, mode_cfg)
            items.append((trace, alignment, None))
        report = evaluate_videos(items, denominator=denominator)
        if report.mean_frame_precision is None:
            raise ValidationError("corpus has no ground truth to evaluate", field="corpus")
        results[mode] = report.mean_frame_precision
    return results


def render_table(report: EvalReport) -> str:
    """Plain-text table; numbers use shortest-repr so parse_table round-trips."""
    lines = ["metric  value"]
    for alpha in sorted(report.iou_at):
        lines.append(f"iou@{alpha!r}  {report.iou_at[alpha]!r}")
    if report.mean_frame_precision is not None:
        lines.append(f"frame_precision_mean  {report.mean_frame_precision!r}")
    for video_id in sorted(report.frame_precision_per_video):
        lines.append(
            f"frame_precision[{video_id}]  {report.frame_precision_per_video[video_id]!r}"
        )
    return "\n".join(lines) + "\n"


def parse_table(text: str) -> dict[str, float]:
    """Inverse of render_table (metric name -> value)."""
    out: dict[str, float] = {}
    for line in text.splitlines()[1:]:
        if not line.strip():
            continue
        name, value = line.rsplit(None, 1)
        out[name] = float(value)
    return out


def fold_assignments(video_ids, num_folds: int = 5) -> dict[str, int]:
    """Deterministic cross-validation fold per video (md5 of the id)."""
    if num_folds < 1:
        raise ValueError("num_folds must be >= 1")
    return {
        vid: int(hashlib.md5(vid.encode("utf-8")).hexdigest(), 16) % num_folds
        for vid in video_ids
    }
