"""Kernel dispatch: compiled extension when available, numpy fallback otherwise.

Set RECIPEALIGN_PURE_PYTHON=1 to force the fallback (useful for debugging and
for the benchmark comparison).
"""

import os

from . import _pure

if os.environ.get("RECIPEALIGN_PURE_PYTHON"):
    _impl = _pure
    IMPLEMENTATION = "pure"
else:
    try:
        from . import _core as _impl  # type: ignore[no-redef]

        IMPLEMENTATION = "compiled"
    except ImportError:
        _impl = _pure
        IMPLEMENTATION = "pure"

score_runs = _impl.score_runs
nms_keep = _impl.nms_keep
gaussian_weights = _impl.gaussian_weights
temporal_scores = _impl.temporal_scores
logistic_fit = _impl.logistic_fit

__all__ = [
    "IMPLEMENTATION",
    "score_runs",
    "nms_keep",
    "gaussian_weights",
    "temporal_scores",
    "logistic_fit",
]
