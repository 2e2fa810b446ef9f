"""Domain types for video traces, action segments and ground truth.

A trace file is UTF-8 JSON:

    {
      "video_id": str,
      "fps": float,
      "num_frames": int,
      "action_scores": [float],            # length num_frames, values in [0, 1]
      "detections": [[[label, conf]]],     # per frame: list of (label, confidence)
      "ground_truth": [[start, end, step_index, main_object]]   # optional
    }

Frame intervals are half-open [start, end). Step index 0 encodes BACKGROUND
(a segment that corresponds to no recipe step); real steps are 1-based.
Floats survive a save/load round trip exactly (shortest-repr serialization).
All types are treated as immutable after construction.
"""

import json
from dataclasses import dataclass, field

from .errors import SchemaError, ValidationError

BACKGROUND = 0


@dataclass(frozen=True)
class ActionSegment:
    """Half-open frame interval predicted to contain an action.

    histogram/top_objects are filled by the evidence module; confidence by
    the proposal stage. All three may be absent.
    """

    start: int
    end: int
    confidence: float | None = None
    histogram: dict[str, int] | None = None
    top_objects: tuple[str, ...] | None = None

    def __post_init__(self):
        if not (0 <= self.start < self.end):
            raise ValidationError(f"invalid interval [{self.start}, {self.end})", field="segment")
        if self.confidence is not None and not (0.0 <= self.confidence <= 1.0):
            raise ValidationError(f"confidence {self.confidence} outside [0, 1]", field="confidence")

    @property
    def length(self) -> int:
        return self.end - self.start


@dataclass(frozen=True)
class GroundTruthSegment:
    start: int
    end: int
    step_index: int  # 1-based; BACKGROUND (0) = no recipe step
    main_object: str


@dataclass(frozen=True)
class GroundTruth:
    segments: tuple[GroundTruthSegment, ...]

    def __post_init__(self):
        prev_end = None
        for seg in self.segments:
            if seg.start >= seg.end:
                raise ValidationError(
                    f"invalid interval [{seg.start}, {seg.end})", field="ground_truth"
                )
            if seg.step_index < 0:
                raise ValidationError(
                    f"step_index {seg.step_index} negative", field="ground_truth"
                )
            if prev_end is not None and seg.start < prev_end:
                raise ValidationError(
                    "segments overlap or are unsorted", field="ground_truth"
                )
            prev_end = seg.end


@dataclass
class VideoTrace:
    """Per-frame perception outputs for one video."""

    video_id: str
    fps: float
    num_frames: int
    action_scores: list[float]
    detections: list[list[tuple[str, float]]]
    ground_truth: GroundTruth | None = field(default=None)

    def __post_init__(self):
        self.validate()

    def validate(self) -> None:
        if not self.video_id:
            raise ValidationError("empty video_id", field="video_id")
        if not (self.fps > 0):
            raise ValidationError(f"fps {self.fps} not positive", field="fps")
        if self.num_frames <= 0:
            raise ValidationError(f"num_frames {self.num_frames} not positive", field="num_frames")
        if len(self.action_scores) != self.num_frames:
            raise ValidationError(
                f"length {len(self.action_scores)} != num_frames {self.num_frames}",
                field="action_scores",
            )
        for i, s in enumerate(self.action_scores):
            if not (0.0 <= s <= 1.0):
                raise ValidationError(f"score {s} at frame {i} outside [0, 1]", field="action_scores")
        if len(self.detections) != self.num_frames:
            raise ValidationError(
                f"length {len(self.detections)} != num_frames {self.num_frames}",
                field="detections",
            )
        for i, frame in enumerate(self.detections):
            for label, conf in frame:
                if not label:
                    raise ValidationError(f"empty label at frame {i}", field="detections")
                if not (0.0 <= conf <= 1.0):
                    raise ValidationError(
                        f"confidence {conf} at frame {i} outside [0, 1]", field="detections"
                    )
        if self.ground_truth is not None:
            for seg in self.ground_truth.segments:
                if seg.end > self.num_frames:
                    raise ValidationError(
                        f"segment end {seg.end} beyond num_frames {self.num_frames}",
                        field="ground_truth",
                    )


def _require(obj: dict, key: str, path: str):
    if key not in obj:
        raise SchemaError(f"missing field '{key}'", path=path)
    return obj[key]


def load_trace(path) -> VideoTrace:
    """Read and validate a trace JSON file."""
    path = str(path)
    with open(path, encoding="utf-8") as fh:
        try:
            raw = json.load(fh)
        except json.JSONDecodeError as exc:
            raise SchemaError(f"malformed JSON: {exc.msg}", path=path, line=exc.lineno) from exc
    if not isinstance(raw, dict):
        raise SchemaError("top level is not an object", path=path)

    video_id = _require(raw, "video_id", path)
    fps = _require(raw, "fps", path)
    num_frames = _require(raw, "num_frames", path)
    scores = _require(raw, "action_scores", path)
    detections = _require(raw, "detections", path)
    if not isinstance(video_id, str):
        raise SchemaError("field 'video_id' is not a string", path=path)
    if not isinstance(fps, (int, float)) or isinstance(fps, bool):
        raise SchemaError("field 'fps' is not a number", path=path)
    if not isinstance(num_frames, int) or isinstance(num_frames, bool):
        raise SchemaError("field 'num_frames' is not an integer", path=path)
    if not isinstance(scores, list):
        raise SchemaError("field 'action_scores' is not a list", path=path)
    if not isinstance(detections, list):
        raise SchemaError("field 'detections' is not a list", path=path)

    det: list[list[tuple[str, float]]] = []
    for i, frame in enumerate(detections):
        if not isinstance(frame, list):
            raise SchemaError(f"detections[{i}] is not a list", path=path)
        row = []
        for entry in frame:
            if not isinstance(entry, (list, tuple)) or len(entry) != 2:
                raise SchemaError(f"detections[{i}] entry is not a [label, conf] pair", path=path)
            row.append((entry[0], float(entry[1])))
        det.append(row)

    gt = None
    if raw.get("ground_truth") is not None:
        segs = []
        for i, entry in enumerate(raw["ground_truth"]):
            if not isinstance(entry, (list, tuple)) or len(entry) != 4:
                raise SchemaError(
                    f"ground_truth[{i}] is not [start, end, step_index, main_object]", path=path
                )
            segs.append(
                GroundTruthSegment(int(entry[0]), int(entry[1]), int(entry[2]), str(entry[3]))
            )
        gt = GroundTruth(tuple(segs))

    return VideoTrace(
        video_id=video_id,
        fps=float(fps),
        num_frames=num_frames,
        action_scores=[float(s) for s in scores],
        detections=det,
        ground_truth=gt,
    )


def save_trace(trace: VideoTrace, path) -> None:
    """Write a trace so that load_trace reproduces it exactly."""
    doc = {
        "video_id": trace.video_id,
        "fps": trace.fps,
        "num_frames": trace.num_frames,
        "action_scores": trace.action_scores,
        "detections": [[[label, conf] for label, conf in frame] for frame in trace.detections],
    }
    if trace.ground_truth is not None:
        doc["ground_truth"] = [
            [seg.start, seg.end, seg.step_index, seg.main_object]
            for seg in trace.ground_truth.segments
        ]
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh)
        fh.write("\n")
