"""Command-line pipeline: simulate -> propose -> align -> eval.

Every command is deterministic given its inputs and flags. Exit codes:
0 success, 1 I/O failure (missing/unreadable files), 2 validation or
configuration error.
"""

import argparse
import csv
import json
import sys
from dataclasses import dataclass
from pathlib import Path

from . import aligner, embeddings, evaluate, evidence, proposal, recipe, simulate, trace
from .errors import RecipeAlignError

DESCRIPTION = "Align sparse recipe steps to egocentric video traces."


@dataclass
class RunManifest:
    """Input bundle for multi-video runs; all paths checked at load time."""

    traces: list[Path]
    recipe: Path
    embeddings: Path
    config: dict

    @staticmethod
    def load(path) -> "RunManifest":
        path = Path(path)
        with open(path, encoding="utf-8") as fh:
            raw = json.load(fh)
        base = path.parent
        traces = [base / t for t in raw.get("traces", [])]
        manifest = RunManifest(
            traces=traces,
            recipe=base / raw["recipe"],
            embeddings=base / raw["embeddings"],
            config=raw.get("config", {}),
        )
        for p in [manifest.recipe, manifest.embeddings, *manifest.traces]:
            if not p.exists():
                raise FileNotFoundError(f"manifest references missing file: {p}")
        return manifest


def _trace_paths(spec: str) -> list[Path]:
    path = Path(spec)
    if path.is_dir():
        found = sorted(path.glob("*.json"))
        if not found:
            raise FileNotFoundError(f"no trace files in {path}")
        return found
    if not path.exists():
        raise FileNotFoundError(f"trace not found: {path}")
    return [path]


def _parse_weights(text: str) -> tuple[float, float, float]:
    parts = text.split(",")
    if len(parts) != 3:
        raise ValueError(f"--weights expects w_obj,w_act,w_temp, got {text!r}")
    return float(parts[0]), float(parts[1]), float(parts[2])


def cmd_simulate(args) -> int:
    cfg = simulate.SimConfig(
        seed=args.seed,
        num_steps=args.steps,
        segments_per_step=args.segments_per_step,
        object_vocab_size=args.vocab_size,
        detection_noise=args.detection_noise,
        out_of_order_rate=args.out_of_order,
        distractor_segment_rate=args.distractor_rate,
        frames_per_segment=tuple(args.frames_per_segment),
        gap_frames=tuple(args.gap_frames),
        max_frames=args.max_frames,
    )
    manifest_path = simulate.write_corpus(cfg, args.videos, args.out)
    print(f"wrote {args.videos} videos to {args.out} (manifest: {manifest_path})")
    return 0


def cmd_propose(args) -> int:
    cfg = proposal.ProposalConfig(
        score_threshold=args.score_threshold,
        min_segment_frames=args.min_segment_frames,
        gap_merge_frames=args.gap_merge,
    )
    paths = _trace_paths(args.trace)
    single_file = len(paths) == 1 and not Path(args.trace).is_dir()
    out = Path(args.out)
    if not single_file:
        out.mkdir(parents=True, exist_ok=True)
    for p in paths:
        tr = trace.load_trace(p)
        segments = proposal.segments_from_scores(tr.action_scores, cfg)
        target = out if single_file else out / f"{tr.video_id}.segments.json"
        proposal.save_proposals(proposal.segments_to_proposals(segments), target)
        print(f"{tr.video_id}: {len(segments)} segments -> {target}")
    return 0


def _segments_for(video_id: str, spec: str | None) -> list | None:
    if spec is None:
        return None
    path = Path(spec)
    if path.is_dir():
        path = path / f"{video_id}.segments.json"
    if not path.exists():
        raise FileNotFoundError(f"no proposals for {video_id}: {path}")
    return proposal.proposals_to_segments(proposal.load_proposals(path))


def _align_config(args, base: dict | None = None) -> aligner.AlignConfig:
    cfg = dict(base or {})
    if args.weights is not None:
        cfg["w_obj"], cfg["w_act"], cfg["w_temp"] = _parse_weights(args.weights)
    if args.mode is not None:
        cfg["mode"] = args.mode
    if args.score_threshold is not None:
        cfg["score_threshold"] = args.score_threshold
    if args.sigma_fraction is not None:
        cfg["gaussian_sigma_fraction"] = args.sigma_fraction
    return aligner.AlignConfig(**cfg)


def cmd_align(args) -> int:
    if args.manifest:
        manifest = RunManifest.load(args.manifest)
        trace_files = manifest.traces
        recipe_path = manifest.recipe
        embeddings_path = manifest.embeddings
        base_cfg = manifest.config.get("align", {})
    else:
        if not (args.trace and args.recipe and args.embeddings):
            print("align needs --manifest or all of --trace/--recipe/--embeddings", file=sys.stderr)
            return 2
        trace_files = _trace_paths(args.trace)
        recipe_path = Path(args.recipe)
        embeddings_path = Path(args.embeddings)
        base_cfg = {}
    if not recipe_path.exists():
        raise FileNotFoundError(f"recipe not found: {recipe_path}")
    if not embeddings_path.exists():
        raise FileNotFoundError(f"embeddings not found: {embeddings_path}")

    parsed = recipe.parse_recipe(recipe_path, sidecar=args.coref)
    store = embeddings.load_embeddings(embeddings_path)
    cfg = _align_config(args, base_cfg)
    prop_cfg = proposal.ProposalConfig(min_segment_frames=args.min_segment_frames)

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    report_lines = []
    timeline_rows = []
    loaded = sorted((trace.load_trace(p) for p in trace_files), key=lambda t: t.video_id)
    for tr in loaded:
        segments = _segments_for(tr.video_id, args.segments)
        if segments is None:
            segments = proposal.segments_from_scores(tr.action_scores, prop_cfg)
        segments = evidence.annotate_segments(tr, segments, frame_stride=args.stride, k=args.top_k)
        result = aligner.align(segments, parsed, tr, store, cfg)
        aligner.save_alignment(result, out / f"{tr.video_id}.alignment.json")
        report_lines.extend(_step_report(tr.video_id, segments, result, parsed))
        for i, seg in enumerate(segments):
            step = 0 if i in result.discarded else result.frame_labels[seg.start]
            timeline_rows.append([tr.video_id, seg.start, seg.end, step])
        print(f"{tr.video_id}: {len(segments)} segments, {len(result.discarded)} discarded")

    (out / "report.txt").write_text("\n".join(report_lines) + "\n", encoding="utf-8")
    with open(out / "timelines.csv", "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["video_id", "start", "end", "step"])
        writer.writerows(timeline_rows)
    return 0


def _step_report(video_id, segments, result, parsed) -> list[str]:
    lines = [f"video {video_id}"]
    by_step: dict[int, list[str]] = {}
    for i, seg in enumerate(segments):
        if i in result.discarded:
            continue
        step = result.frame_labels[seg.start]
        score = max(result.segment_scores[i])
        by_step.setdefault(step, []).append(f"[{seg.start},{seg.end}) score={score:.4f}")
    for step in parsed.steps:
        spans = ", ".join(by_step.get(step.index, [])) or "(none)"
        what = " ".join(step.actions) + " " + "/".join(step.primary_objects)
        lines.append(f"  step {step.index} ({what.strip()}): {spans}")
    if result.discarded:
        spans = ", ".join(
            f"[{segments[i].start},{segments[i].end})" for i in sorted(result.discarded)
        )
        lines.append(f"  discarded: {spans}")
    return lines


def cmd_eval(args) -> int:
    items = []
    for p in _trace_paths(args.trace):
        tr = trace.load_trace(p)
        apath = Path(args.alignments)
        if apath.is_dir():
            apath = apath / f"{tr.video_id}.alignment.json"
        if not apath.exists():
            raise FileNotFoundError(f"no alignment for {tr.video_id}: {apath}")
        alignment = aligner.load_alignment(apath)
        segments = _segments_for(tr.video_id, args.segments)
        items.append((tr, alignment, segments))
    items.sort(key=lambda item: item[0].video_id)
    report = evaluate.evaluate_videos(items, denominator=args.precision_denominator)
    table = evaluate.render_table(report)
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        with open(out / "report.json", "w", encoding="utf-8") as fh:
            json.dump(report.to_dict(), fh, indent=2)
            fh.write("\n")
        (out / "report.txt").write_text(table, encoding="utf-8")
    print(table, end="")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="recipealign", description=DESCRIPTION)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="generate a synthetic corpus with ground truth")
    p.add_argument("--out", required=True)
    p.add_argument("--videos", type=int, default=10)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--steps", type=int, default=6)
    p.add_argument("--segments-per-step", type=int, default=2)
    p.add_argument("--vocab-size", type=int, default=12)
    p.add_argument("--detection-noise", type=float, default=0.0)
    p.add_argument("--out-of-order", type=float, default=0.0)
    p.add_argument("--distractor-rate", type=float, default=0.0)
    p.add_argument("--frames-per-segment", type=int, nargs=2, default=[12, 30])
    p.add_argument("--gap-frames", type=int, nargs=2, default=[5, 15])
    p.add_argument("--max-frames", type=int, default=None)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("propose", help="turn per-frame scores into action segments")
    p.add_argument("--trace", required=True, help="trace JSON file or directory")
    p.add_argument("--out", required=True, help="output file (single trace) or directory")
    p.add_argument("--score-threshold", type=float, default=0.5)
    p.add_argument("--min-segment-frames", type=int, default=10)
    p.add_argument("--gap-merge", type=int, default=0)
    p.set_defaults(func=cmd_propose)

    p = sub.add_parser("align", help="align action segments to recipe steps")
    p.add_argument("--manifest", help="JSON manifest with traces/recipe/embeddings")
    p.add_argument("--trace", help="trace JSON file or directory")
    p.add_argument("--recipe", help="recipe CoNLL-U file")
    p.add_argument("--embeddings", help="word-vector text file")
    p.add_argument("--coref", help="coreference override sidecar JSON")
    p.add_argument("--segments", help="proposals JSON file or directory (default: internal)")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--mode", choices=aligner.MODES, default=None)
    p.add_argument("--weights", help="w_obj,w_act,w_temp (comma separated)")
    p.add_argument("--score-threshold", type=float, default=None, help="alignment threshold")
    p.add_argument("--sigma-fraction", type=float, default=None)
    p.add_argument("--top-k", type=int, default=3)
    p.add_argument("--stride", type=int, default=1)
    p.add_argument("--min-segment-frames", type=int, default=10)
    p.set_defaults(func=cmd_align)

    p = sub.add_parser("eval", help="score alignments against ground truth")
    p.add_argument("--trace", required=True, help="trace JSON file or directory")
    p.add_argument("--alignments", required=True, help="alignment JSON file or directory")
    p.add_argument("--segments", help="proposals file or directory for IOU metrics")
    p.add_argument("--precision-denominator", choices=("all", "labeled"), default="all")
    p.add_argument("--out", help="directory for report.json / report.txt")
    p.set_defaults(func=cmd_eval)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except RecipeAlignError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
