"""Probabilistic moral-sentiment classifiers over seed word vectors.

Four model kinds share one interface. Each is fit from per-class seed
vectors and turns a query vector into a posterior over the classes:

* centroid     - distance to the class mean, softmax over -distance
* naive_bayes  - per-dimension Gaussian with diagonal covariance
* knn          - majority vote among the k nearest seed vectors
* kde          - class-size-normalized sum of isotropic Gaussian kernels

Density work is done in log space (300-dimensional products underflow)
and normalized exactly, so posteriors always sum to one.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np
from scipy.special import logsumexp

from .embeddings import EmbeddingSpace, QueryVector
from .errors import DataError
from .lexicon import SeedLexicon, seed_vectors

logger = logging.getLogger(__name__)

CENTROID = "centroid"
NAIVE_BAYES = "naive_bayes"
KNN = "knn"
KDE = "kde"
MODEL_KINDS = (CENTROID, NAIVE_BAYES, KNN, KDE)

BANDWIDTH_GRID = tuple(round(0.1 * i, 1) for i in range(1, 11))

_LOG_2PI = float(np.log(2.0 * np.pi))
_CLAMP = 1e-6


@dataclass(frozen=True)
class ModelSpec:
    """Model kind plus its (at most one) parameter.

    ``k`` applies to knn only; ``h`` to kde only. ``h=None`` asks fit()
    to pick the bandwidth maximizing leave-one-out accuracy on the seeds
    over the grid 0.1 .. 1.0.
    """

    kind: str
    k: int = 5
    h: float | None = None
    variance_floor: float = 1e-8

    def __post_init__(self):
        if self.kind not in MODEL_KINDS:
            raise ValueError(f"unknown model kind {self.kind!r}; expected one of {MODEL_KINDS}")
        if self.k < 1:
            raise ValueError(f"k must be >= 1, got {self.k}")
        if self.h is not None and not self.h > 0:
            raise ValueError(f"bandwidth h must be positive, got {self.h}")
        if not self.variance_floor > 0:
            raise ValueError(f"variance_floor must be positive, got {self.variance_floor}")


@dataclass(frozen=True)
class PosteriorDistribution:
    """Normalized class probabilities for one query."""

    probs: Mapping[str, float]

    def __getitem__(self, label: str) -> float:
        return self.probs[label]


@dataclass(frozen=True)
class Classifier:
    """A fitted model over one tier's class vector sets. Immutable."""

    spec: ModelSpec
    classes: tuple[str, ...]
    dim: int
    tier: str | None = None
    # Sufficient statistics; which fields are set depends on spec.kind.
    means: np.ndarray | None = field(default=None, repr=False)       # (C, d)
    variances: np.ndarray | None = field(default=None, repr=False)   # (C, d)
    seed_matrix: np.ndarray | None = field(default=None, repr=False)  # (S, d)
    seed_labels: np.ndarray | None = field(default=None, repr=False)  # (S,) class idx


def _as_matrix(label: str, vectors) -> np.ndarray:
    mat = np.asarray(vectors, dtype=np.float64)
    if mat.ndim == 1:
        mat = mat.reshape(1, -1)
    if mat.ndim != 2 or mat.shape[0] == 0:
        raise DataError(f"class {label!r} has no seed vectors")
    if not np.all(np.isfinite(mat)):
        raise DataError(f"class {label!r} contains non-finite seed vectors")
    return mat


def _sq_dists(queries: np.ndarray, points: np.ndarray) -> np.ndarray:
    """Pairwise squared Euclidean distances, (n_queries, n_points)."""
    q_sq = np.sum(queries * queries, axis=1)[:, None]
    p_sq = np.sum(points * points, axis=1)[None, :]
    out = q_sq + p_sq - 2.0 * (queries @ points.T)
    return np.maximum(out, 0.0)


def fit(spec: ModelSpec, class_vectors: Mapping[str, Sequence],
        tier: str | None = None) -> Classifier:
    """Fit a classifier from per-class seed vectors.

    Class order (and hence tie-breaking order) follows the mapping's
    iteration order. Requires at least two non-empty classes of matching
    dimensionality.
    """
    if len(class_vectors) < 2:
        raise DataError(f"need at least 2 classes, got {len(class_vectors)}")
    labels = tuple(class_vectors)
    matrices = [_as_matrix(label, class_vectors[label]) for label in labels]
    dims = {m.shape[1] for m in matrices}
    if len(dims) != 1:
        raise DataError(f"classes disagree on vector dimensionality: {sorted(dims)}")
    dim = dims.pop()
    total = sum(m.shape[0] for m in matrices)

    if spec.kind == CENTROID:
        means = np.vstack([m.mean(axis=0) for m in matrices])
        return Classifier(spec=spec, classes=labels, dim=dim, tier=tier, means=means)

    if spec.kind == NAIVE_BAYES:
        means = np.vstack([m.mean(axis=0) for m in matrices])
        variances = np.vstack([np.maximum(m.var(axis=0), spec.variance_floor)
                               for m in matrices])
        return Classifier(spec=spec, classes=labels, dim=dim, tier=tier,
                          means=means, variances=variances)

    seed_matrix = np.vstack(matrices)
    seed_labels = np.concatenate(
        [np.full(m.shape[0], i, dtype=np.intp) for i, m in enumerate(matrices)])

    if spec.kind == KNN:
        if spec.k > total:
            raise DataError(f"k={spec.k} exceeds the {total} available seed vectors")
        return Classifier(spec=spec, classes=labels, dim=dim, tier=tier,
                          seed_matrix=seed_matrix, seed_labels=seed_labels)

    # KDE
    if spec.h is None:
        h = select_bandwidth(class_vectors)
        spec = ModelSpec(kind=KDE, k=spec.k, h=h, variance_floor=spec.variance_floor)
        logger.info("selected KDE bandwidth h=%g by leave-one-out accuracy", h)
    return Classifier(spec=spec, classes=labels, dim=dim, tier=tier,
                      seed_matrix=seed_matrix, seed_labels=seed_labels)


def fit_tier(spec: ModelSpec, lexicon: SeedLexicon, space: EmbeddingSpace,
             tier: str) -> Classifier:
    """Fit a model on one tier's seed vectors from one decade's space."""
    return fit(spec, seed_vectors(lexicon, space, tier), tier=tier)


def _query_matrix(model: Classifier, queries) -> np.ndarray:
    if isinstance(queries, QueryVector):
        queries = queries.values
    q = np.asarray(queries, dtype=np.float64)
    single = q.ndim == 1
    if single:
        q = q.reshape(1, -1)
    if q.shape[1] != model.dim:
        raise DataError(f"query has dimension {q.shape[1]}, model expects {model.dim}")
    if not np.all(np.isfinite(q)):
        raise DataError("query vector contains non-finite entries")
    return q


def _kde_log_likelihoods(model: Classifier, q: np.ndarray) -> np.ndarray:
    h = model.spec.h
    sq = _sq_dists(q, model.seed_matrix)
    log_norm = -0.5 * model.dim * (_LOG_2PI + np.log(h))
    out = np.empty((q.shape[0], len(model.classes)))
    for c in range(len(model.classes)):
        cols = model.seed_labels == c
        out[:, c] = (logsumexp(-sq[:, cols] / (2.0 * h), axis=1)
                     - np.log(np.count_nonzero(cols)) + log_norm)
    return out


def _knn_counts(model: Classifier, q: np.ndarray) -> np.ndarray:
    """Per-class neighbor counts; distance ties at rank k admit all tied seeds."""
    sq = _sq_dists(q, model.seed_matrix)
    k = model.spec.k
    counts = np.empty((q.shape[0], len(model.classes)))
    kth = np.partition(sq, k - 1, axis=1)[:, k - 1]
    for i in range(q.shape[0]):
        admitted = sq[i] <= kth[i]
        counts[i] = np.bincount(model.seed_labels[admitted],
                                minlength=len(model.classes))
    return counts


def posterior_batch(model: Classifier, queries) -> np.ndarray:
    """Posterior probabilities for a batch of queries, shape (n, n_classes).

    Columns follow ``model.classes``. Rows are normalized exactly.
    """
    q = _query_matrix(model, queries)
    if model.spec.kind == CENTROID:
        dists = np.sqrt(_sq_dists(q, model.means))
        logits = -dists
    elif model.spec.kind == NAIVE_BAYES:
        logits = np.empty((q.shape[0], len(model.classes)))
        for c in range(len(model.classes)):
            var = model.variances[c]
            dev = q - model.means[c]
            logits[:, c] = -0.5 * np.sum(_LOG_2PI + np.log(var) + dev * dev / var, axis=1)
    elif model.spec.kind == KDE:
        logits = _kde_log_likelihoods(model, q)
    else:  # KNN: scores are counts, not log densities
        counts = _knn_counts(model, q)
        return counts / counts.sum(axis=1, keepdims=True)
    logits -= logits.max(axis=1, keepdims=True)
    probs = np.exp(logits)
    probs /= probs.sum(axis=1, keepdims=True)
    return probs


def posterior(model: Classifier, query) -> PosteriorDistribution:
    """Posterior over the model's classes for one query vector."""
    row = posterior_batch(model, query)
    if row.shape[0] != 1:
        raise DataError("posterior() takes a single query; use posterior_batch()")
    return PosteriorDistribution(
        probs={label: float(p) for label, p in zip(model.classes, row[0])})


def classify_batch(model: Classifier, queries) -> list[str]:
    """Argmax class labels; ties go to the earlier class in model.classes."""
    probs = posterior_batch(model, queries)
    return [model.classes[i] for i in np.argmax(probs, axis=1)]


def classify(model: Classifier, query) -> str:
    return classify_batch(model, query)[0]


def log_odds(p: PosteriorDistribution, numerator: str, denominator: str) -> float:
    """Natural log of the ratio of two class probabilities.

    Probabilities are clamped to [1e-6, 1 - 1e-6] so degenerate
    posteriors still produce finite, plot-ready values.
    """
    num = p.probs[numerator]
    den = p.probs[denominator]
    num = min(max(num, _CLAMP), 1.0 - _CLAMP)
    den = min(max(den, _CLAMP), 1.0 - _CLAMP)
    return float(np.log(num / den))


def select_bandwidth(class_vectors: Mapping[str, Sequence],
                     grid: Sequence[float] = BANDWIDTH_GRID) -> float:
    """Pick the KDE bandwidth with the best leave-one-out seed accuracy.

    Seeds whose class would be emptied by their removal are skipped.
    Accuracy ties resolve to the smaller bandwidth. Kernel distances are
    computed once and reused across the grid.
    """
    labels = tuple(class_vectors)
    matrices = [_as_matrix(label, class_vectors[label]) for label in labels]
    seed_matrix = np.vstack(matrices)
    seed_labels = np.concatenate(
        [np.full(m.shape[0], i, dtype=np.intp) for i, m in enumerate(matrices)])
    class_sizes = np.bincount(seed_labels, minlength=len(labels))
    evaluable = class_sizes[seed_labels] > 1
    if not np.any(evaluable):
        raise DataError("cannot auto-select bandwidth: every class is a singleton; "
                        "pass an explicit h")
    sq = _sq_dists(seed_matrix, seed_matrix)
    np.fill_diagonal(sq, np.inf)  # leave-one-out: exclude self

    best_h, best_acc = None, -1.0
    for h in grid:
        kern = -sq / (2.0 * h)
        hits = 0
        for i in np.flatnonzero(evaluable):
            logits = np.full(len(labels), -np.inf)
            for c in range(len(labels)):
                cols = seed_labels == c
                size = class_sizes[c] - (1 if c == seed_labels[i] else 0)
                logits[c] = logsumexp(kern[i, cols]) - np.log(size)
            if int(np.argmax(logits)) == seed_labels[i]:
                hits += 1
        acc = hits / int(np.count_nonzero(evaluable))
        if acc > best_acc:
            best_h, best_acc = h, acc
    return float(best_h)
