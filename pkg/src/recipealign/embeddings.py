"""Word-vector store with phrase composition and distance-based similarity.

Vector files are plain text: an optional "<count> <dim>" header followed by
one token per line, "token v1 v2 ... vd". Tokens are lowercased on load.
"""

import logging

import numpy as np

from .errors import SchemaError

logger = logging.getLogger(__name__)


class EmbeddingStore:
    """Immutable token -> vector table of uniform dimension."""

    def __init__(self, vectors: dict[str, np.ndarray]):
        if not vectors:
            raise SchemaError("embedding table is empty")
        dims = {v.shape[0] for v in vectors.values()}
        if len(dims) != 1:
            raise SchemaError(f"inconsistent vector dimensions: {sorted(dims)}")
        self.dimension = dims.pop()
        self._table = {token.lower(): np.asarray(vec, dtype=np.float64) for token, vec in vectors.items()}

    def __contains__(self, token: str) -> bool:
        return token.lower() in self._table

    def __len__(self) -> int:
        return len(self._table)

    def vector(self, token: str) -> np.ndarray | None:
        return self._table.get(token.lower())


def load_embeddings(path) -> EmbeddingStore:
    """Parse a text vector file; duplicate tokens keep the last row."""
    path = str(path)
    vectors: dict[str, np.ndarray] = {}
    expected_dim = None
    with open(path, encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    start = 0
    if lines:
        head = lines[0].split()
        if len(head) == 2:
            try:
                int(head[0]), int(head[1])
                start = 1
            except ValueError:
                start = 0
    for lineno, line in enumerate(lines[start:], start=start + 1):
        if not line.strip():
            continue
        parts = line.split()
        if len(parts) < 2:
            raise SchemaError("row has no vector components", path=path, line=lineno)
        token = parts[0].lower()
        try:
            vec = np.array([float(x) for x in parts[1:]], dtype=np.float64)
        except ValueError as exc:
            raise SchemaError(f"non-numeric component: {exc}", path=path, line=lineno) from exc
        if expected_dim is None:
            expected_dim = vec.shape[0]
        elif vec.shape[0] != expected_dim:
            raise SchemaError(
                f"dimension {vec.shape[0]} != {expected_dim}", path=path, line=lineno
            )
        if token in vectors:
            logger.warning("duplicate token %r at line %d; keeping last", token, lineno)
        vectors[token] = vec
    return EmbeddingStore(vectors)


def save_embeddings(store: EmbeddingStore, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"{len(store)} {store.dimension}\n")
        for token, vec in store._table.items():
            fh.write(token + " " + " ".join(repr(float(x)) for x in vec) + "\n")


def phrase_vector(store: EmbeddingStore, phrase: str) -> np.ndarray | None:
    """Mean of in-vocabulary token vectors; None if every token is OOV.

    Phrases split on spaces and underscores, so multi-word labels such as
    "cutting_board" and "cutting board" compose identically.
    """
    if not phrase:
        raise ValueError("empty phrase")
    tokens = phrase.lower().replace("_", " ").split()
    found = [store.vector(t) for t in tokens]
    found = [v for v in found if v is not None]
    if not found:
        return None
    return np.mean(found, axis=0)


def word_distance(store: EmbeddingStore, a: str, b: str) -> float | None:
    """Euclidean distance between phrase vectors; None if either is OOV."""
    va = phrase_vector(store, a)
    vb = phrase_vector(store, b)
    if va is None or vb is None:
        return None
    return float(np.linalg.norm(va - vb))


def similarity(distance: float | None) -> float:
    """Map a distance to (0, 1] via 1 / (1 + d); absent evidence scores 0."""
    if distance is None:
        return 0.0
    if distance < 0:
        raise ValueError(f"negative distance {distance}")
    return 1.0 / (1.0 + distance)
