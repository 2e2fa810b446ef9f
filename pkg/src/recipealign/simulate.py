"""Synthetic corpus generator with known ground truth and controllable noise.

Each video executes an N-step template recipe ("Take the obj003.") in order,
with every step performed over ``segments_per_step`` action segments
separated by idle gaps. Knobs inject the phenomena seen in real kitchen
footage: label noise on per-frame detections, adjacent steps swapped out of
order, and distractor segments that correspond to no recipe step.

Synthetic embeddings put every token on its own scaled basis vector, so
identical labels sit at distance 0 and distinct labels at a fixed distance
>= 1. Generation is deterministic given the seed; the corpus is emitted
through the public file formats only (trace JSON, CoNLL-U, embedding text).
"""

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .embeddings import EmbeddingStore, save_embeddings
from .errors import ConfigError
from .recipe import ParsedRecipe, extract_pairs, parse_conllu, resolve_coreference
from .trace import GroundTruth, GroundTruthSegment, VideoTrace, save_trace

VERBS = ("take", "stir", "pour", "chop", "wash", "open", "shake", "press")

# distinct basis vectors are BASIS_SCALE * sqrt(2) apart; far enough that a
# matching detected object dominates the similarity of any non-match
BASIS_SCALE = 3.0


@dataclass(frozen=True)
class SimConfig:
    seed: int = 0
    num_steps: int = 6
    segments_per_step: int = 2
    object_vocab_size: int = 12
    detection_noise: float = 0.0
    out_of_order_rate: float = 0.0
    distractor_segment_rate: float = 0.0
    frames_per_segment: tuple[int, int] = (12, 30)
    gap_frames: tuple[int, int] = (5, 15)
    max_frames: int | None = None

    def __post_init__(self):
        for name in ("detection_noise", "out_of_order_rate", "distractor_segment_rate"):
            value = getattr(self, name)
            if not (0.0 <= value <= 1.0):
                raise ConfigError(f"{name} {value} outside [0, 1]")
        if self.num_steps < 1 or self.segments_per_step < 1:
            raise ConfigError("num_steps and segments_per_step must be >= 1")
        if self.object_vocab_size < self.num_steps:
            raise ConfigError(
                f"object_vocab_size {self.object_vocab_size} < num_steps {self.num_steps}"
            )
        if self.distractor_segment_rate > 0 and self.object_vocab_size <= self.num_steps:
            raise ConfigError("distractor segments need vocabulary beyond the recipe objects")
        lo, hi = self.frames_per_segment
        if not (1 <= lo <= hi):
            raise ConfigError(f"bad frames_per_segment range ({lo}, {hi})")
        glo, ghi = self.gap_frames
        if not (1 <= glo <= ghi):
            raise ConfigError(f"bad gap_frames range ({glo}, {ghi})")


@dataclass
class SimulatedVideo:
    trace: VideoTrace
    recipe: ParsedRecipe
    store: EmbeddingStore


def _vocab(cfg: SimConfig) -> list[str]:
    return [f"obj{i:03d}" for i in range(cfg.object_vocab_size)]


def _recipe_objects(cfg: SimConfig) -> list[str]:
    rng = np.random.default_rng([cfg.seed, 0])
    vocab = _vocab(cfg)
    picks = rng.choice(cfg.object_vocab_size, size=cfg.num_steps, replace=False)
    return [vocab[int(i)] for i in picks]


def recipe_conllu(cfg: SimConfig) -> str:
    """Template recipe as CoNLL-U text, one sentence per step."""
    lines = []
    for i, obj in enumerate(_recipe_objects(cfg), start=1):
        verb = VERBS[(i - 1) % len(VERBS)]
        sentence = f"{verb.capitalize()} the {obj}."
        lines.append(f"# text = {sentence}")
        lines.append(f"1\t{verb.capitalize()}\t{verb}\tVERB\t_\t_\t0\troot\t_\t_")
        lines.append("2\tthe\tthe\tDET\t_\t_\t3\tdet\t_\t_")
        lines.append(f"3\t{obj}\t{obj}\tNOUN\t_\t_\t1\tobj\t_\t_")
        lines.append("4\t.\t.\tPUNCT\t_\t_\t1\tpunct\t_\t_")
        lines.append("")
    return "\n".join(lines)


def build_recipe(cfg: SimConfig) -> ParsedRecipe:
    steps = parse_conllu(recipe_conllu(cfg), path="<simulated recipe>")
    return resolve_coreference([extract_pairs(s) for s in steps], steps)


def build_embeddings(cfg: SimConfig) -> EmbeddingStore:
    vocab = _vocab(cfg)
    verbs = list(VERBS[: min(cfg.num_steps, len(VERBS))])
    dim = len(vocab) + len(verbs)
    table = {}
    for i, token in enumerate(vocab + verbs):
        vec = np.zeros(dim)
        vec[i] = BASIS_SCALE
        table[token] = vec
    return EmbeddingStore(table)


def _layout(cfg: SimConfig, rng: np.random.Generator) -> list[tuple[int, str]]:
    """(step_index, object) per segment; step 0 marks a distractor."""
    objects = _recipe_objects(cfg)
    occurrences = [
        (step, objects[step - 1])
        for step in range(1, cfg.num_steps + 1)
        for _ in range(cfg.segments_per_step)
    ]
    for k in range(len(occurrences) - 1):
        if rng.random() < cfg.out_of_order_rate:
            occurrences[k], occurrences[k + 1] = occurrences[k + 1], occurrences[k]
    if cfg.distractor_segment_rate > 0:
        vocab = _vocab(cfg)
        outside = [w for w in vocab if w not in objects]
        with_distractors = []
        for occ in occurrences:
            with_distractors.append(occ)
            if rng.random() < cfg.distractor_segment_rate:
                label = outside[int(rng.integers(len(outside)))]
                with_distractors.append((0, label))
        occurrences = with_distractors
    return occurrences


def generate(cfg: SimConfig, video_index: int = 0) -> SimulatedVideo:
    """One synthetic video plus the (shared) recipe and embedding store."""
    rng = np.random.default_rng([cfg.seed, 1, video_index])
    vocab = _vocab(cfg)
    occurrences = _layout(cfg, rng)

    lo, hi = cfg.frames_per_segment
    glo, ghi = cfg.gap_frames
    placed = []
    cursor = 0
    for step, obj in occurrences:
        cursor += int(rng.integers(glo, ghi + 1))
        length = int(rng.integers(lo, hi + 1))
        placed.append((cursor, cursor + length, step, obj))
        cursor += length
    num_frames = cursor + int(rng.integers(glo, ghi + 1))
    if cfg.max_frames is not None and num_frames > cfg.max_frames:
        raise ConfigError(
            f"layout needs {num_frames} frames but max_frames is {cfg.max_frames}"
        )

    scores = [0.0] * num_frames
    detections: list[list[tuple[str, float]]] = [[] for _ in range(num_frames)]
    for start, end, _, obj in placed:
        for f in range(start, end):
            scores[f] = 1.0
            label = obj
            if rng.random() < cfg.detection_noise:
                label = vocab[int(rng.integers(len(vocab)))]
            detections[f] = [(label, 1.0)]

    trace = VideoTrace(
        video_id=f"sim{video_index:03d}",
        fps=30.0,
        num_frames=num_frames,
        action_scores=scores,
        detections=detections,
        ground_truth=GroundTruth(
            tuple(GroundTruthSegment(s, e, step, obj) for s, e, step, obj in placed)
        ),
    )
    return SimulatedVideo(trace=trace, recipe=build_recipe(cfg), store=build_embeddings(cfg))


def generate_corpus(cfg: SimConfig, num_videos: int):
    """(recipe, store, traces) for a corpus sharing one recipe."""
    if num_videos < 1:
        raise ConfigError("num_videos must be >= 1")
    recipe = build_recipe(cfg)
    store = build_embeddings(cfg)
    traces = [generate(cfg, i).trace for i in range(num_videos)]
    return recipe, store, traces


def write_corpus(cfg: SimConfig, num_videos: int, out_dir) -> Path:
    """Emit recipe.conllu, embeddings.txt, traces/*.json and manifest.json.

    Returns the manifest path; the manifest feeds the align command directly.
    """
    out = Path(out_dir)
    (out / "traces").mkdir(parents=True, exist_ok=True)
    (out / "recipe.conllu").write_text(recipe_conllu(cfg), encoding="utf-8")
    save_embeddings(build_embeddings(cfg), out / "embeddings.txt")
    trace_paths = []
    for i in range(num_videos):
        video = generate(cfg, i)
        rel = f"traces/{video.trace.video_id}.json"
        save_trace(video.trace, out / rel)
        trace_paths.append(rel)
    manifest = {
        "recipe": "recipe.conllu",
        "embeddings": "embeddings.txt",
        "traces": trace_paths,
    }
    manifest_path = out / "manifest.json"
    with open(manifest_path, "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2)
        fh.write("\n")
    return manifest_path
