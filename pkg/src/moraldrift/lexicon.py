"""Seed lexicon construction for the three classification tiers.

Moral seed words come from a word,category CSV (ten categories, five
foundations with a virtue and a vice pole each). Morally irrelevant
seeds are drawn from a valence-norms table: the words rated closest to
the neutral midpoint that are not themselves moral seeds.
"""
from __future__ import annotations

import csv
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from .embeddings import EmbeddingSpace
from .errors import CoverageError, DataError, ParseError

logger = logging.getLogger(__name__)

RELEVANCE = "relevance"
POLARITY = "polarity"
CATEGORY = "category"
TIERS = (RELEVANCE, POLARITY, CATEGORY)

RELEVANCE_CLASSES = ("irrelevant", "relevant")
POLARITY_CLASSES = ("positive", "negative")
# Index i holds the label for category number i+1; odd numbers are
# virtue (positive) poles, even numbers vice (negative) poles.
CATEGORY_CLASSES = (
    "care+", "harm-", "fairness+", "cheating-", "loyalty+",
    "betrayal-", "authority+", "subversion-", "sanctity+", "degradation-",
)

VALENCE_MIDPOINT = 5.0
VALENCE_RANGE = (1.0, 9.0)
CONCRETENESS_RANGE = (1.0, 5.0)


def category_label(category: int) -> str:
    if not 1 <= category <= 10:
        raise ValueError(f"category number out of range: {category}")
    return CATEGORY_CLASSES[category - 1]


def tier_classes(tier: str) -> tuple[str, ...]:
    """Canonical class labels, in tie-breaking order, for a tier."""
    if tier == RELEVANCE:
        return RELEVANCE_CLASSES
    if tier == POLARITY:
        return POLARITY_CLASSES
    if tier == CATEGORY:
        return CATEGORY_CLASSES
    raise ValueError(f"unknown tier {tier!r}; expected one of {TIERS}")


@dataclass(frozen=True)
class SeedEntry:
    word: str
    category: int  # 1..10


@dataclass(frozen=True)
class NormEntry:
    word: str
    valence: float
    concreteness: float | None = None


@dataclass(frozen=True)
class SeedLexicon:
    """The moral environment organized into the three tier views."""

    relevant: frozenset[str]
    irrelevant: frozenset[str]
    positive: frozenset[str]
    negative: frozenset[str]
    categories: Mapping[int, frozenset[str]]

    def classes_for(self, tier: str) -> dict[str, frozenset[str]]:
        """Class label -> seed word set, in canonical class order."""
        if tier == RELEVANCE:
            return {"irrelevant": self.irrelevant, "relevant": self.relevant}
        if tier == POLARITY:
            return {"positive": self.positive, "negative": self.negative}
        if tier == CATEGORY:
            return {category_label(c): self.categories[c] for c in range(1, 11)}
        raise ValueError(f"unknown tier {tier!r}; expected one of {TIERS}")


def _read_csv(path: Path, expected_headers: Sequence[Sequence[str]]):
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(line for line in fh if not line.startswith("#"))
        header = next(reader, None)
        if header is None:
            raise ParseError(f"{path}: empty file")
        normalized = [h.strip().lower() for h in header]
        if normalized not in [list(h) for h in expected_headers]:
            want = " or ".join(",".join(h) for h in expected_headers)
            raise ParseError(f"{path}: expected header '{want}', got {','.join(header)!r}")
        rows = [(lineno, row) for lineno, row in enumerate(reader, start=2)
                if row and any(cell.strip() for cell in row)]
    return normalized, rows


def load_mfd(path: str | Path) -> list[SeedEntry]:
    """Parse the moral seed CSV (header word,category; categories 1-10).

    Words are lowercased. Multi-token entries cannot be matched against
    single-token embedding vocabularies and are skipped with a warning.
    """
    path = Path(path)
    _, rows = _read_csv(path, [["word", "category"]])
    entries: list[SeedEntry] = []
    skipped = 0
    for lineno, row in rows:
        if len(row) != 2:
            raise ParseError(f"{path}:{lineno}: expected 2 columns, got {len(row)}")
        word = row[0].strip().lower()
        if not word:
            raise ParseError(f"{path}:{lineno}: empty word")
        try:
            category = int(row[1])
        except ValueError:
            raise ParseError(f"{path}:{lineno}: non-integer category {row[1]!r}") from None
        if not 1 <= category <= 10:
            raise ParseError(f"{path}:{lineno}: category {category} outside 1..10")
        if " " in word:
            skipped += 1
            continue
        entries.append(SeedEntry(word=word, category=category))
    if skipped:
        logger.warning("%s: skipped %d multi-word seed entries", path, skipped)
    return entries


def load_norms(path: str | Path) -> list[NormEntry]:
    """Parse the ratings CSV (word,valence[,concreteness]); rejects duplicates."""
    path = Path(path)
    header, rows = _read_csv(
        path, [["word", "valence"], ["word", "valence", "concreteness"]])
    has_concreteness = len(header) == 3
    entries: list[NormEntry] = []
    seen: set[str] = set()
    for lineno, row in rows:
        if len(row) != len(header):
            raise ParseError(f"{path}:{lineno}: expected {len(header)} columns, got {len(row)}")
        word = row[0].strip().lower()
        if not word:
            raise ParseError(f"{path}:{lineno}: empty word")
        if word in seen:
            raise ParseError(f"{path}:{lineno}: duplicate word {word!r}")
        seen.add(word)
        try:
            valence = float(row[1])
        except ValueError:
            raise ParseError(f"{path}:{lineno}: non-numeric valence {row[1]!r}") from None
        if not VALENCE_RANGE[0] <= valence <= VALENCE_RANGE[1]:
            raise ParseError(f"{path}:{lineno}: valence {valence} outside "
                             f"[{VALENCE_RANGE[0]}, {VALENCE_RANGE[1]}]")
        concreteness = None
        if has_concreteness and row[2].strip():
            try:
                concreteness = float(row[2])
            except ValueError:
                raise ParseError(
                    f"{path}:{lineno}: non-numeric concreteness {row[2]!r}") from None
            if not CONCRETENESS_RANGE[0] <= concreteness <= CONCRETENESS_RANGE[1]:
                raise ParseError(f"{path}:{lineno}: concreteness {concreteness} outside "
                                 f"[{CONCRETENESS_RANGE[0]}, {CONCRETENESS_RANGE[1]}]")
        entries.append(NormEntry(word=word, valence=valence, concreteness=concreteness))
    return entries


def relevant_words(entries: Iterable[SeedEntry]) -> list[str]:
    """Distinct seed words in first-occurrence order."""
    seen: set[str] = set()
    out: list[str] = []
    for e in entries:
        if e.word not in seen:
            seen.add(e.word)
            out.append(e.word)
    return out


def build_irrelevant_seeds(norms: Sequence[NormEntry], mfd_words: Iterable[str],
                           count: int | None = None,
                           vocabulary: Iterable[str] | None = None) -> set[str]:
    """Select the ``count`` most valence-neutral non-seed words.

    Neutrality is distance from the scale midpoint 5.0; ties break
    lexicographically. ``count`` defaults to the seed-word count so the
    relevant and irrelevant sets end up the same size. ``vocabulary``,
    when given, restricts candidates to words with embeddings.
    """
    mfd = set(mfd_words)
    if count is None:
        count = len(mfd)
    vocab = set(vocabulary) if vocabulary is not None else None
    candidates = [e for e in norms
                  if e.word not in mfd and (vocab is None or e.word in vocab)]
    if count > len(candidates):
        raise DataError(
            f"requested {count} irrelevant seeds but only {len(candidates)} "
            f"non-seed candidate words are available")
    ranked = sorted(candidates, key=lambda e: (abs(e.valence - VALENCE_MIDPOINT), e.word))
    return {e.word for e in ranked[:count]}


def build_tiers(mfd: Sequence[SeedEntry], irrelevant: Iterable[str]) -> SeedLexicon:
    """Assemble the three tier views from seed entries and neutral words.

    A word listed under several categories keeps its first one, so every
    seed belongs to exactly one category and one polarity pole.
    """
    by_word: dict[str, int] = {}
    n_dup = 0
    for e in mfd:
        if e.word in by_word:
            n_dup += 1
            continue
        by_word[e.word] = e.category
    if n_dup:
        logger.warning("ignored %d repeated seed words (first category kept)", n_dup)

    categories: dict[int, set[str]] = {c: set() for c in range(1, 11)}
    for word, category in by_word.items():
        categories[category].add(word)
    relevant = frozenset(by_word)
    positive = frozenset(w for c in (1, 3, 5, 7, 9) for w in categories[c])
    negative = frozenset(w for c in (2, 4, 6, 8, 10) for w in categories[c])
    irrelevant = frozenset(w.lower() for w in irrelevant)

    overlap = irrelevant & relevant
    if overlap:
        raise DataError(
            f"irrelevant seeds overlap moral seeds: {sorted(overlap)[:5]}")
    if len(irrelevant) != len(relevant):
        raise DataError(
            f"expected equally many irrelevant ({len(irrelevant)}) and "
            f"relevant ({len(relevant)}) seeds")
    return SeedLexicon(
        relevant=relevant,
        irrelevant=irrelevant,
        positive=positive,
        negative=negative,
        categories={c: frozenset(ws) for c, ws in categories.items()},
    )


def seed_vectors(lexicon: SeedLexicon, space: EmbeddingSpace,
                 tier: str) -> dict[str, np.ndarray]:
    """Per-class seed vector matrices for one tier in one decade's space.

    Seeds without embeddings are dropped; a class left empty raises a
    coverage error naming the class and decade.
    """
    out: dict[str, np.ndarray] = {}
    for label, words in lexicon.classes_for(tier).items():
        matrix, found, missing = space.rows(sorted(words))
        if not found:
            raise CoverageError(
                f"class {label!r} has no seed embeddings in decade {space.decade}")
        if missing:
            logger.debug("decade %d, class %s: %d/%d seeds have embeddings",
                         space.decade, label, len(found), len(words))
        out[label] = matrix
    return out
