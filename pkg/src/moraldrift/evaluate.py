"""Model evaluations: leave-one-out seed classification and agreement
with human ratings (valence norms and survey judgments)."""
from __future__ import annotations

import csv
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .classifiers import (Classifier, ModelSpec, classify, fit, posterior,
                          posterior_batch, select_bandwidth)
from .embeddings import DiachronicEmbeddings, EmbeddingSpace, average_vector
from .errors import DataError, ParseError
from .lexicon import NormEntry, SeedLexicon, seed_vectors, tier_classes
from .stats import CorrelationReport, pearson

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class AccuracyReport:
    """Leave-one-out accuracy on one tier, one decade."""

    tier: str
    model: ModelSpec
    decade: int
    accuracy: float
    confusion: dict[str, dict[str, int]]  # true class -> predicted -> count
    n: int

    def to_dict(self) -> dict:
        return {
            "tier": self.tier,
            "model": self.model.kind,
            "decade": self.decade,
            "accuracy": self.accuracy,
            "n": self.n,
            "confusion": self.confusion,
        }


@dataclass(frozen=True)
class HistoricalAccuracy:
    """Per-decade accuracies with their mean and population stdev."""

    tier: str
    model: ModelSpec
    reports: tuple[AccuracyReport, ...]
    mean_accuracy: float
    stdev_accuracy: float

    def to_dict(self) -> dict:
        return {
            "tier": self.tier,
            "model": self.model.kind,
            "mean_accuracy": self.mean_accuracy,
            "stdev_accuracy": self.stdev_accuracy,
            "per_decade": [r.to_dict() for r in self.reports],
        }


def chance_level(tier: str) -> float:
    """Accuracy of uniform random guessing on a tier."""
    return 1.0 / len(tier_classes(tier))


def _resolve_spec(spec: ModelSpec, class_vectors) -> ModelSpec:
    # Pin an auto-selected bandwidth once so every LOO fold uses the same h.
    if spec.kind == "kde" and spec.h is None:
        h = select_bandwidth(class_vectors)
        return ModelSpec(kind=spec.kind, k=spec.k, h=h,
                         variance_floor=spec.variance_floor)
    return spec


def loo_accuracy(spec: ModelSpec, lexicon: SeedLexicon, space: EmbeddingSpace,
                 tier: str) -> AccuracyReport:
    """Classify each seed with the model refit on all other seeds.

    Seeds without embeddings are excluded from both training and
    evaluation. Every class must retain at least one seed under any
    single removal, i.e. hold two or more embedded seeds.
    """
    class_vectors = seed_vectors(lexicon, space, tier)
    for label, matrix in class_vectors.items():
        if matrix.shape[0] < 2:
            raise DataError(
                f"class {label!r} has {matrix.shape[0]} embedded seed(s) in decade "
                f"{space.decade}; leave-one-out would empty it")
    spec = _resolve_spec(spec, class_vectors)

    labels = list(class_vectors)
    confusion = {t: {p: 0 for p in labels} for t in labels}
    n = 0
    for label in labels:
        matrix = class_vectors[label]
        for i in range(matrix.shape[0]):
            fold = dict(class_vectors)
            fold[label] = np.delete(matrix, i, axis=0)
            model = fit(spec, fold, tier=tier)
            predicted = classify(model, matrix[i])
            confusion[label][predicted] += 1
            n += 1
    correct = sum(confusion[c][c] for c in labels)
    return AccuracyReport(tier=tier, model=spec, decade=space.decade,
                          accuracy=correct / n, confusion=confusion, n=n)


def loo_accuracy_historical(spec: ModelSpec, lexicon: SeedLexicon,
                            diachronic: DiachronicEmbeddings,
                            tier: str) -> HistoricalAccuracy:
    """Leave-one-out accuracy per decade, summarized by mean and
    population standard deviation across decades."""
    reports = tuple(loo_accuracy(spec, lexicon, space, tier)
                    for space in diachronic)
    accs = np.array([r.accuracy for r in reports])
    return HistoricalAccuracy(tier=tier, model=spec, reports=reports,
                              mean_accuracy=float(accs.mean()),
                              stdev_accuracy=float(accs.std(ddof=0)))


def valence_correlation(polarity_model: Classifier, space: EmbeddingSpace,
                        norms: Sequence[NormEntry]) -> CorrelationReport:
    """Correlate human valence ratings with predicted positive-polarity
    probability over all rated words that have embeddings."""
    rated = [(e.word, e.valence) for e in norms if e.word in space]
    if len(rated) < 3:
        raise DataError(f"only {len(rated)} rated words have embeddings; need >= 3")
    words = [w for w, _ in rated]
    valences = np.array([v for _, v in rated])
    matrix, _, _ = space.rows(words)
    probs = posterior_batch(polarity_model, matrix)
    positive = probs[:, polarity_model.classes.index("positive")]
    return pearson(valences, positive)


def load_survey(path: str | Path) -> list[tuple[list[str], float, float]]:
    """Parse a survey CSV (topic,frac_not_moral,frac_acceptable).

    Topics may contain several space-separated tokens; proportions must
    lie in [0, 1].
    """
    path = Path(path)
    rows: list[tuple[list[str], float, float]] = []
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(line for line in fh if not line.startswith("#"))
        header = next(reader, None)
        if header is None or [h.strip().lower() for h in header] != \
                ["topic", "frac_not_moral", "frac_acceptable"]:
            raise ParseError(f"{path}: expected header 'topic,frac_not_moral,frac_acceptable'")
        for lineno, row in enumerate(reader, start=2):
            if not row or not any(cell.strip() for cell in row):
                continue
            if len(row) != 3:
                raise ParseError(f"{path}:{lineno}: expected 3 columns, got {len(row)}")
            tokens = row[0].strip().lower().split()
            if not tokens:
                raise ParseError(f"{path}:{lineno}: empty topic")
            try:
                not_moral, acceptable = float(row[1]), float(row[2])
            except ValueError:
                raise ParseError(f"{path}:{lineno}: non-numeric proportion") from None
            for v in (not_moral, acceptable):
                if not 0.0 <= v <= 1.0:
                    raise ParseError(f"{path}:{lineno}: proportion {v} outside [0, 1]")
            rows.append((tokens, not_moral, acceptable))
    return rows


def survey_correlation(relevance_model: Classifier, polarity_model: Classifier,
                       space: EmbeddingSpace,
                       survey: Sequence[tuple[Sequence[str], float, float]]
                       ) -> tuple[CorrelationReport, CorrelationReport]:
    """Correlate survey judgments with model predictions per topic.

    The first report pairs the ''not a moral issue'' proportion with the
    predicted irrelevance probability; the second pairs the
    ''acceptable'' proportion with the predicted positive-polarity
    probability. Multi-word topics are queried by their averaged
    embedding; unresolvable topics are skipped with a warning.
    """
    irr, pos, not_moral, acceptable = [], [], [], []
    for tokens, frac_not_moral, frac_acceptable in survey:
        try:
            q = average_vector(space, list(tokens))
        except DataError:
            logger.warning("decade %d: topic %r has no resolvable tokens; skipped",
                           space.decade, " ".join(tokens))
            continue
        irr.append(posterior(relevance_model, q)["irrelevant"])
        pos.append(posterior(polarity_model, q)["positive"])
        not_moral.append(frac_not_moral)
        acceptable.append(frac_acceptable)
    if len(irr) < 3:
        raise DataError(f"only {len(irr)} topics resolvable to vectors; need >= 3")
    return pearson(not_moral, irr), pearson(acceptable, pos)
