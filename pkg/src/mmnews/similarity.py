"""Pairwise cosine similarity, zero-overlap perturbation, and score fusion.

Similarity is computed separately per language partition.  The diagonal is
excluded by construction (set to 0 and never ranked) so matrices stay
symmetric.  When a query shares no entities with any reference article its
entity similarities are all exactly zero; those entries are replaced with
deterministic draws from (0, 1e-6) so ranking stays well-defined without
disturbing any real score.
"""
from __future__ import annotations

import hashlib
import warnings
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .features import FeatureMatrix

# Upper bound for injected values; far below any attainable nonzero cosine of
# binary vectors for vocabularies up to ~1e6 entries.
PERTURBATION_SCALE = 1e-6

# How the all-features score is assembled: mean of the five raw matrices, or
# mean of the two modality means.
FUSION_MEAN_OF_FIVE = "mean-of-five"
FUSION_MEAN_OF_GROUPS = "mean-of-groups"
FUSION_MODES = (FUSION_MEAN_OF_FIVE, FUSION_MEAN_OF_GROUPS)

_SYMMETRY_TOL = 1e-9
_MAX_SEED = 2**64


class SimilarityError(ValueError):
    """Similarity computation received inconsistent inputs."""


@dataclass(frozen=True)
class SimilarityMatrix:
    """Square pairwise-score matrix over one language partition.

    ``features`` names the feature subset the scores were derived from
    (a singleton for raw features, larger sets after fusion).
    """

    features: frozenset[str]
    language: str
    ids: tuple[str, ...]
    scores: np.ndarray

    def __post_init__(self):
        scores = np.asarray(self.scores, dtype=np.float64)
        object.__setattr__(self, "scores", scores)
        object.__setattr__(self, "features", frozenset(self.features))
        n = len(self.ids)
        if scores.shape != (n, n):
            raise SimilarityError(f"scores shape {scores.shape} != ({n}, {n})")
        if not np.all(np.isfinite(scores)):
            raise SimilarityError("non-finite similarity score")
        if n and np.abs(scores - scores.T).max() > _SYMMETRY_TOL:
            raise SimilarityError("similarity matrix is not symmetric")

    def index_of(self, article_id: str) -> int:
        try:
            return self.ids.index(article_id)
        except ValueError:
            raise SimilarityError(f"unknown article id {article_id!r}") from None


def cosine(u, v) -> float:
    """Cosine similarity of two equal-dimension vectors; 0 if either is all-zero.

    Each vector is pre-scaled by its largest magnitude so extreme but finite
    inputs cannot overflow the norm computation.
    """
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    if u.shape != v.shape or u.ndim != 1:
        raise SimilarityError(f"dimension mismatch: {u.shape} vs {v.shape}")
    if not (np.all(np.isfinite(u)) and np.all(np.isfinite(v))):
        raise SimilarityError("non-finite input vector")
    mu = np.abs(u).max() if u.size else 0.0
    mv = np.abs(v).max() if v.size else 0.0
    if mu == 0.0 or mv == 0.0:
        return 0.0
    u = u / mu
    v = v / mv
    nu = np.linalg.norm(u)
    nv = np.linalg.norm(v)
    if nu == 0.0 or nv == 0.0:
        return 0.0
    return float(np.clip(np.dot(u, v) / (nu * nv), -1.0, 1.0))


def _unit_rows(rows: np.ndarray) -> np.ndarray:
    """Rows scaled to unit length; all-zero rows stay zero."""
    scale = np.abs(rows).max(axis=1, keepdims=True)
    scaled = rows / np.where(scale == 0.0, 1.0, scale)
    norms = np.linalg.norm(scaled, axis=1, keepdims=True)
    return scaled / np.where(norms == 0.0, 1.0, norms)


def similarity_matrix(m: FeatureMatrix) -> SimilarityMatrix:
    """All-pairs cosine scores for one feature; diagonal fixed at 0."""
    unit = _unit_rows(m.rows)
    scores = unit @ unit.T
    np.clip(scores, -1.0, 1.0, out=scores)
    scores = (scores + scores.T) / 2.0
    np.fill_diagonal(scores, 0.0)
    return SimilarityMatrix(
        features=frozenset({m.feature}), language=m.language, ids=m.row_ids, scores=scores
    )


def _draw(seed: int, id_a: str, id_b: str) -> float:
    """Deterministic uniform draw from (0, PERTURBATION_SCALE) keyed by the id pair."""
    if id_b < id_a:
        id_a, id_b = id_b, id_a
    h = hashlib.blake2b(digest_size=8)
    h.update(seed.to_bytes(8, "big"))
    h.update(id_a.encode("utf-8"))
    h.update(b"\x00")
    h.update(id_b.encode("utf-8"))
    k = int.from_bytes(h.digest(), "big")
    return (k + 0.5) / 2.0**64 * PERTURBATION_SCALE


def perturb_zero_rows(m: SimilarityMatrix, seed: int) -> SimilarityMatrix:
    """Replace exactly-zero off-diagonal scores with tiny deterministic randoms.

    Draws are keyed by (seed, unordered id pair), so the output is symmetric,
    bit-identical across reruns, and independent of evaluation order.  Nonzero
    scores are never touched.
    """
    if not 0 <= seed < _MAX_SEED:
        raise SimilarityError(f"seed must be an unsigned 64-bit integer, got {seed}")
    scores = m.scores.copy()
    n = len(m.ids)
    zi, zj = np.nonzero(scores == 0.0)
    injected_max = 0.0
    for i, j in zip(zi, zj):
        if i >= j:
            continue
        value = _draw(seed, m.ids[i], m.ids[j])
        scores[i, j] = value
        scores[j, i] = value
        if value > injected_max:
            injected_max = value
    if injected_max:
        off_diag = ~np.eye(n, dtype=bool)
        originals = m.scores[off_diag]
        nonzero = originals[originals != 0.0]
        if nonzero.size and np.abs(nonzero).min() <= injected_max:
            warnings.warn(
                "perturbation injected a value >= the smallest nonzero score; "
                "relative ranking of real scores may be affected",
                RuntimeWarning,
            )
    return SimilarityMatrix(features=m.features, language=m.language, ids=m.ids, scores=scores)


def fuse(matrices: Sequence[SimilarityMatrix]) -> SimilarityMatrix:
    """Entrywise mean of similarity matrices over identical id orders.

    The per-entry values are sorted before summation, so the result does not
    depend on the order the matrices are passed in.
    """
    if not matrices:
        raise SimilarityError("fuse requires at least one matrix")
    first = matrices[0]
    for m in matrices[1:]:
        if m.language != first.language:
            raise SimilarityError(f"language mismatch: {m.language!r} vs {first.language!r}")
        if m.ids != first.ids:
            raise SimilarityError("id-order mismatch between similarity matrices")
    stack = np.stack([m.scores for m in matrices])
    stack.sort(axis=0)
    scores = stack.sum(axis=0) / len(matrices)
    features = frozenset().union(*(m.features for m in matrices))
    return SimilarityMatrix(features=features, language=first.language, ids=first.ids, scores=scores)
