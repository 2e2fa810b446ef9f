"""recipealign: align sparse recipe steps to egocentric video traces."""

from ._kernels import IMPLEMENTATION as KERNEL_IMPLEMENTATION
from .aligner import AlignConfig, Alignment, align
from .embeddings import EmbeddingStore, load_embeddings
from .errors import ConfigError, RecipeAlignError, SchemaError, ValidationError
from .evidence import ObjectEvidence, annotate_segments, build_histogram, top_objects
from .proposal import LinearFrameScorer, ProposalConfig, nms_intervals, segments_from_scores
from .recipe import ParsedRecipe, ParsedStep, RecipeStep, load_conllu, parse_recipe
from .simulate import SimConfig, generate
from .trace import BACKGROUND, ActionSegment, GroundTruth, VideoTrace, load_trace, save_trace

__version__ = "0.1.0"

__all__ = [
    "AlignConfig",
    "Alignment",
    "ActionSegment",
    "BACKGROUND",
    "ConfigError",
    "EmbeddingStore",
    "GroundTruth",
    "KERNEL_IMPLEMENTATION",
    "LinearFrameScorer",
    "ObjectEvidence",
    "ParsedRecipe",
    "ParsedStep",
    "ProposalConfig",
    "RecipeAlignError",
    "RecipeStep",
    "SchemaError",
    "SimConfig",
    "ValidationError",
    "VideoTrace",
    "align",
    "annotate_segments",
    "build_histogram",
    "generate",
    "load_conllu",
    "load_embeddings",
    "load_trace",
    "nms_intervals",
    "parse_recipe",
    "save_trace",
    "segments_from_scores",
    "top_objects",
]
