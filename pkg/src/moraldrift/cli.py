"""Command-line interface.

One subcommand per analysis: align, classify, timecourse, matrix,
evaluate, valence-corr, survey-corr, retrieve, regress, permute,
project. Commands compose via files (e.g. `matrix` writes the
prediction matrix that `retrieve`, `regress`, and `permute` read).

Options may come from a flat key=value config file (--config); explicit
flags override it. Outputs are byte-reproducible: fixed seeds, fixed
orderings, floats at 17 significant digits, and every output embeds the
tool version and a hash of the resolved configuration.

Exit codes: 0 success, 1 usage error, 2 data or validation error.
"""
from __future__ import annotations

import argparse
import hashlib
import json
import logging
import sys
from pathlib import Path
from typing import Sequence

import numpy as np

from . import __version__
from .classifiers import ModelSpec, fit_tier, posterior
from .diachronic import (DIRECTIONS, PredictionMatrix, load_wordlist,
                         matrix_from_json, matrix_to_json_dict,
                         prediction_matrix, retrieve_changing, time_course)
from .embeddings import (DiachronicEmbeddings, align_diachronic,
                         load_diachronic, lookup, save_embedding_space)
from .errors import CoverageError, DataError, MoraldriftError, ParseError
from .evaluate import (load_survey, loo_accuracy, loo_accuracy_historical,
                       survey_correlation, valence_correlation)
from .lexicon import (TIERS, SeedLexicon, build_irrelevant_seeds, build_tiers,
                      category_label, load_mfd, load_norms, relevant_words)
from .stats import (fisher_projection, partial_correlation,
                    permutation_control, psycholinguistic_regression,
                    slope_test)

logger = logging.getLogger(__name__)

TOOL_NAME = "moraldrift"
FLOAT_FMT = "%.17g"

_MODEL_CHOICES = {"centroid": "centroid", "naive-bayes": "naive_bayes",
                  "naive_bayes": "naive_bayes", "knn": "knn", "kde": "kde"}
_BOOL_STRINGS = {"true": True, "1": True, "yes": True, "on": True,
                 "false": False, "0": False, "no": False, "off": False}


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    """ArgumentParser that reports usage problems via exception so the
    dispatcher can exit with code 1 (argparse's default is 2)."""

    def error(self, message):
        raise _UsageError(message)


# ---------------------------------------------------------------------------
# Option resolution: CLI flags override config-file values
# ---------------------------------------------------------------------------

def _load_config_file(path: Path) -> dict[str, str]:
    config: dict[str, str] = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ParseError(f"{path}:{lineno}: expected key=value, got {line!r}")
            key, _, value = line.partition("=")
            config[key.strip().lower().replace("-", "_")] = value.strip()
    return config


class Settings:
    """Resolved run configuration for one command invocation."""

    def __init__(self, command: str, args: argparse.Namespace):
        self.command = command
        self._args = vars(args)
        self._config: dict[str, str] = {}
        self.resolved: dict[str, str] = {}
        if self._args.get("config"):
            path = Path(self._args["config"])
            if not path.exists():
                raise DataError(f"config file not found: {path}")
            self._config = _load_config_file(path)

    def _raw(self, name, default):
        value = self._args.get(name)
        if value is None and name in self._config:
            value = self._config[name]
        if value is None:
            value = default
        return value

    def get(self, name, default=None, required=False, choices=None):
        value = self._raw(name, default)
        if value is None:
            if required:
                raise DataError(f"missing required option --{name.replace('_', '-')}")
            self.resolved[name] = ""
            return None
        value = str(value)
        if choices is not None and value not in choices:
            raise DataError(f"--{name.replace('_', '-')}: invalid value {value!r}; "
                            f"choose from {sorted(choices)}")
        self.resolved[name] = value
        return value

    def get_int(self, name, default=None, required=False):
        value = self._raw(name, default)
        if value is None:
            if required:
                raise DataError(f"missing required option --{name.replace('_', '-')}")
            self.resolved[name] = ""
            return None
        try:
            value = int(value)
        except (TypeError, ValueError):
            raise DataError(f"--{name.replace('_', '-')}: expected an integer, "
                            f"got {value!r}") from None
        self.resolved[name] = str(value)
        return value

    def get_float(self, name, default=None):
        value = self._raw(name, default)
        if value is None:
            self.resolved[name] = ""
            return None
        try:
            value = float(value)
        except (TypeError, ValueError):
            raise DataError(f"--{name.replace('_', '-')}: expected a number, "
                            f"got {value!r}") from None
        self.resolved[name] = repr(value)
        return value

    def get_bool(self, name, default=False):
        value = self._raw(name, default)
        if isinstance(value, str):
            try:
                value = _BOOL_STRINGS[value.lower()]
            except KeyError:
                raise DataError(f"--{name.replace('_', '-')}: expected a boolean, "
                                f"got {value!r}") from None
        value = bool(value)
        self.resolved[name] = "true" if value else "false"
        return value

    def get_path(self, name, required=False, must_exist=True) -> Path | None:
        value = self.get(name, required=required)
        if value is None:
            return None
        path = Path(value)
        if must_exist and not path.exists():
            raise DataError(f"--{name.replace('_', '-')}: path does not exist: {path}")
        return path

    def out_dir(self) -> Path:
        path = Path(self.get("out_dir", default="."))
        path.mkdir(parents=True, exist_ok=True)
        return path

    def config_hash(self) -> str:
        lines = [f"command={self.command}"]
        lines += [f"{k}={v}" for k, v in sorted(self.resolved.items())]
        digest = hashlib.sha256("\n".join(lines).encode("utf-8")).hexdigest()
        return digest[:12]

    def meta(self) -> dict:
        return {"tool": TOOL_NAME, "version": __version__,
                "command": self.command, "config_hash": self.config_hash()}


# ---------------------------------------------------------------------------
# Shared loading and serialization helpers
# ---------------------------------------------------------------------------

def _model_spec(s: Settings) -> ModelSpec:
    kind = s.get("model", default="centroid", choices=set(_MODEL_CHOICES))
    k = s.get_int("k", default=5)
    h = s.get_float("bandwidth", default=None)
    floor = s.get_float("variance_floor", default=1e-8)
    return ModelSpec(kind=_MODEL_CHOICES[kind], k=k, h=h, variance_floor=floor)


def _load_spaces(s: Settings) -> DiachronicEmbeddings:
    manifest = s.get_path("manifest", required=True)
    normalize = s.get_bool("normalize_embeddings", default=False)
    return load_diachronic(manifest, normalize=normalize)


def _build_lexicon(s: Settings, diachronic: DiachronicEmbeddings) -> SeedLexicon:
    mfd_path = s.get_path("mfd", required=True)
    norms_path = s.get_path("norms", required=True)
    entries = load_mfd(mfd_path)
    norms = load_norms(norms_path)
    words = relevant_words(entries)
    vocabulary = None
    if s.get_bool("neutral_in_vocab", default=False):
        vocabulary = set(diachronic.spaces[0].words)
        for space in diachronic.spaces[1:]:
            vocabulary &= set(space.words)
    irrelevant = build_irrelevant_seeds(norms, words, vocabulary=vocabulary)
    return build_tiers(entries, irrelevant)


def _pick_decade(s: Settings, diachronic: DiachronicEmbeddings) -> int:
    decade = s.get_int("decade", default=diachronic.decades[-1])
    if decade not in diachronic.decades:
        raise DataError(f"decade {decade} not in manifest (have {list(diachronic.decades)})")
    return decade


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return FLOAT_FMT % value
    return str(value)


def _write_json(path: Path, meta: dict, body: dict) -> None:
    payload = {"_meta": meta, **body}
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(payload, fh, indent=2)
        fh.write("\n")


def _write_csv(path: Path, meta: dict, header: Sequence[str],
               rows: Sequence[Sequence]) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("# " + " ".join(f"{k}={v}" for k, v in meta.items()) + "\n")
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def _score_list(values: np.ndarray) -> list:
    return [(float(v) if np.isfinite(v) else None) for v in values]


# ---------------------------------------------------------------------------
# Subcommand handlers
# ---------------------------------------------------------------------------

def _cmd_align(s: Settings) -> int:
    direction = s.get("alignment_direction", default="backward",
                      choices={"forward", "backward"})
    diachronic = _load_spaces(s)
    out = s.out_dir()
    aligned = align_diachronic(diachronic, direction=direction)
    meta = s.meta()
    manifest_rows = []
    for space in aligned:
        name = f"aligned_{space.decade}.txt"
        save_embedding_space(space, out / name, format="text-word2vec")
        manifest_rows.append((space.decade, name, "text-word2vec"))
    _write_csv(out / "aligned_manifest.csv", meta,
               ["decade", "path", "format"], manifest_rows)
    _write_json(out / "align.json", meta, {
        "direction": direction,
        "decades": list(aligned.decades),
        "dim": aligned.dim,
    })
    return 0


def _cmd_classify(s: Settings) -> int:
    word = s.get("word", required=True).lower()
    tier = s.get("tier", required=True, choices=set(TIERS))
    spec = _model_spec(s)
    diachronic = _load_spaces(s)
    decade = _pick_decade(s, diachronic)
    lexicon = _build_lexicon(s, diachronic)
    space = diachronic.space(decade)
    model = fit_tier(spec, lexicon, space, tier)
    q = lookup(space, word)
    if q is None:
        raise CoverageError(f"word {word!r} has no embedding in decade {decade}")
    post = posterior(model, q)
    payload = {"_meta": s.meta(), "word": word, "tier": tier, "decade": decade,
               "posterior": {label: post[label] for label in model.classes}}
    print(json.dumps(payload, indent=2))
    return 0


def _cmd_timecourse(s: Settings) -> int:
    word = s.get("word", required=True).lower()
    tier = s.get("tier", required=True, choices=set(TIERS))
    spec = _model_spec(s)
    diachronic = _load_spaces(s)
    lexicon = _build_lexicon(s, diachronic)
    out = s.out_dir()
    meta = s.meta()
    tc = time_course(diachronic, lexicon, spec, word, tier)
    body: dict = {"word": word, "tier": tier, "decades": list(tc.decades),
                  "missing": [bool(b) for b in tc.missing]}
    if tier == "category":
        body["class_labels"] = list(tc.class_labels)
        body["scores"] = [(_score_list(row) if not m else None)
                          for row, m in zip(tc.scores, tc.missing)]
        rows = [(d, label, (float(tc.scores[i, j]) if not tc.missing[i] else None))
                for i, d in enumerate(tc.decades)
                for j, label in enumerate(tc.class_labels)]
        _write_csv(out / f"timecourse_{word}_{tier}.csv", meta,
                   ["decade", "label", "probability"], rows)
    else:
        body["scores"] = _score_list(tc.scores)
        clamped = np.clip(tc.scores, 1e-6, 1.0 - 1e-6)
        odds = np.log(clamped / (1.0 - clamped))
        body["log_odds"] = _score_list(odds)
        rows = [(d, body["scores"][i], body["log_odds"][i])
                for i, d in enumerate(tc.decades)]
        _write_csv(out / f"timecourse_{word}_{tier}.csv", meta,
                   ["decade", "score", "log_odds"], rows)
    _write_json(out / f"timecourse_{word}_{tier}.json", meta, body)
    return 0


def _cmd_matrix(s: Settings) -> int:
    kind = s.get("kind", required=True, choices={"relevance", "polarity"})
    wordlist_path = s.get_path("wordlist", required=True)
    spec = _model_spec(s)
    diachronic = _load_spaces(s)
    lexicon = _build_lexicon(s, diachronic)
    out = s.out_dir()
    words = [w for w, _ in load_wordlist(wordlist_path)]
    matrix = prediction_matrix(diachronic, lexicon, spec, words, kind)
    meta = s.meta()
    _write_json(out / f"matrix_{kind}.json", meta, matrix_to_json_dict(matrix))
    rows = [(w, d, (float(matrix.values[i, j]) if np.isfinite(matrix.values[i, j]) else None))
            for i, w in enumerate(matrix.words)
            for j, d in enumerate(matrix.decades)]
    _write_csv(out / f"matrix_{kind}.csv", meta, ["word", "decade", "score"], rows)
    return 0


def _cmd_evaluate(s: Settings) -> int:
    tier = s.get("tier", required=True, choices=set(TIERS))
    spec = _model_spec(s)
    historical = s.get_bool("historical", default=False)
    diachronic = _load_spaces(s)
    lexicon = _build_lexicon(s, diachronic)
    out = s.out_dir()
    meta = s.meta()
    if historical:
        report = loo_accuracy_historical(spec, lexicon, diachronic, tier)
        stem = f"evaluate_{tier}_{spec.kind}_historical"
        rows = [(r.tier, r.model.kind, r.decade, r.accuracy, r.n)
                for r in report.reports]
    else:
        decade = _pick_decade(s, diachronic)
        report = loo_accuracy(spec, lexicon, diachronic.space(decade), tier)
        stem = f"evaluate_{tier}_{spec.kind}"
        rows = [(report.tier, report.model.kind, report.decade,
                 report.accuracy, report.n)]
    _write_json(out / f"{stem}.json", meta, report.to_dict())
    _write_csv(out / f"{stem}.csv", meta,
               ["tier", "model", "decade", "accuracy", "n"], rows)
    return 0


def _cmd_valence_corr(s: Settings) -> int:
    spec = _model_spec(s)
    diachronic = _load_spaces(s)
    decade = _pick_decade(s, diachronic)
    lexicon = _build_lexicon(s, diachronic)
    norms = load_norms(s.get_path("norms", required=True))
    space = diachronic.space(decade)
    model = fit_tier(spec, lexicon, space, "polarity")
    report = valence_correlation(model, space, norms)
    meta = s.meta()
    out = s.out_dir()
    _write_json(out / "valence_corr.json", meta,
                {"decade": decade, **report.to_dict()})
    _write_csv(out / "valence_corr.csv", meta, ["decade", "r", "p", "n"],
               [(decade, report.r, report.p, report.n)])
    return 0


def _cmd_survey_corr(s: Settings) -> int:
    survey_path = s.get_path("survey", required=True)
    spec = _model_spec(s)
    diachronic = _load_spaces(s)
    decade = _pick_decade(s, diachronic)
    lexicon = _build_lexicon(s, diachronic)
    space = diachronic.space(decade)
    survey = load_survey(survey_path)
    relevance_model = fit_tier(spec, lexicon, space, "relevance")
    polarity_model = fit_tier(spec, lexicon, space, "polarity")
    irrelevance, acceptability = survey_correlation(
        relevance_model, polarity_model, space, survey)
    meta = s.meta()
    out = s.out_dir()
    _write_json(out / "survey_corr.json", meta, {
        "decade": decade,
        "irrelevance": irrelevance.to_dict(),
        "acceptability": acceptability.to_dict(),
    })
    _write_csv(out / "survey_corr.csv", meta, ["measure", "r", "p", "n"],
               [("irrelevance", irrelevance.r, irrelevance.p, irrelevance.n),
                ("acceptability", acceptability.r, acceptability.p,
                 acceptability.n)])
    return 0


def _cmd_retrieve(s: Settings) -> int:
    direction = s.get("direction", required=True, choices=set(DIRECTIONS))
    top_n = s.get_int("top", default=10)
    family = s.get("bonferroni_family", default="filtered",
                   choices={"filtered", "all-words"})
    matrix = matrix_from_json(s.get_path("matrix", required=True))
    rel_path = s.get_path("relevance_matrix")
    relevance_matrix = matrix_from_json(rel_path) if rel_path is not None else None
    spec = _model_spec(s)
    diachronic = _load_spaces(s)
    lexicon = _build_lexicon(s, diachronic)
    records = retrieve_changing(matrix, lexicon, diachronic, spec, direction,
                                top_n=top_n, relevance_matrix=relevance_matrix,
                                bonferroni_family=family)
    rows = [(r.word, r.slope, r.p_raw, r.p_bonferroni, r.mean_relevance,
             r.switching_decade, r.early_category, r.modern_category)
            for r in records]
    _write_csv(s.out_dir() / f"retrieve_{direction}.csv", s.meta(),
               ["word", "slope", "p_raw", "p_bonferroni", "mean_relevance",
                "switching_decade", "early_category", "modern_category"],
               rows)
    return 0


def _load_regression_inputs(s: Settings):
    matrix = matrix_from_json(s.get_path("matrix", required=True))
    if matrix.kind != "relevance":
        raise DataError(f"change regression needs a relevance matrix, got {matrix.kind!r}")
    norms = load_norms(s.get_path("norms", required=True))
    frequencies = load_wordlist(s.get_path("wordlist", required=True))
    return matrix, norms, frequencies


def _cmd_regress(s: Settings) -> int:
    matrix, norms, frequencies = _load_regression_inputs(s)
    fit, words = psycholinguistic_regression(matrix, norms, frequencies)
    concreteness = {e.word: e.concreteness for e in norms}
    freq_map = dict(frequencies)
    slopes = _selected_slopes(matrix, words)
    partial = partial_correlation(
        slopes,
        [concreteness[w] for w in words],
        {"frequency": [float(np.log(freq_map[w])) for w in words],
         "length": [float(len(w)) for w in words]},
    )
    meta = s.meta()
    out = s.out_dir()
    _write_json(out / "regress.json", meta, {
        "fit": fit.to_dict(),
        "partial_concreteness": partial.to_dict(),
        "words": words,
    })
    _write_csv(out / "regress.csv", meta,
               ["factor", "coefficient", "std_error", "t_stat", "p_value"],
               [(name, fit.coefficients[name], fit.std_errors[name],
                 fit.t_stats[name], fit.p_values[name])
                for name in fit.coefficients])
    return 0


def _selected_slopes(matrix: PredictionMatrix, words: Sequence[str]) -> list[float]:
    slopes = []
    for w in words:
        row = matrix.values[matrix.words.index(w)]
        present = np.isfinite(row)
        t_idx = np.arange(1, len(matrix.decades) + 1, dtype=np.float64)
        slopes.append(slope_test(row[present], t_idx[present])[0])
    return slopes


def _cmd_permute(s: Settings) -> int:
    matrix, norms, frequencies = _load_regression_inputs(s)
    n_shuffles = s.get_int("shuffles", default=1000)
    seed = s.get_int("seed", default=0)
    report = permutation_control(matrix, norms, frequencies,
                                 n_shuffles=n_shuffles, seed=seed)
    meta = s.meta()
    out = s.out_dir()
    _write_json(out / "permute.json", meta, report.to_dict())
    _write_csv(out / "permute.csv", meta,
               ["factor", "diachronic_coefficient", "control_mean",
                "control_stdev", "empirical_p"],
               [(name, fc.diachronic_coefficient, fc.control_mean,
                 fc.control_stdev, fc.empirical_p)
                for name, fc in report.factors.items()])
    return 0


def _cmd_project(s: Settings) -> int:
    words = [w.strip().lower() for w in s.get("words", required=True).split(",")
             if w.strip()]
    if not words:
        raise DataError("--words must name at least one query word")
    all_decades = s.get_bool("all_decades", default=False)
    diachronic = _load_spaces(s)
    seed_decade = _pick_decade(s, diachronic)
    lexicon = _build_lexicon(s, diachronic)
    space = diachronic.space(seed_decade)

    def found_rows(word_set):
        matrix, found, _ = space.rows(sorted(word_set))
        return matrix, found

    classes = {}
    for label, word_set in (("positive", lexicon.positive),
                            ("negative", lexicon.negative),
                            ("irrelevant", lexicon.irrelevant)):
        matrix, found = found_rows(word_set)
        if len(found) < 2:
            raise CoverageError(f"class {label!r} has {len(found)} seed embeddings "
                                f"in decade {seed_decade}; need >= 2")
        classes[label] = matrix

    anchors = {}
    for cid, word_set in sorted(lexicon.categories.items()):
        matrix, found = found_rows(word_set)
        if found:
            anchors[category_label(cid)] = matrix

    query_rows = []
    query_keys = []
    decades = diachronic.decades if all_decades else (seed_decade,)
    for word in words:
        for decade in decades:
            vec = diachronic.space(decade).vector(word)
            if vec is None:
                logger.warning("word %r missing from decade %d; skipped", word, decade)
                continue
            query_rows.append(vec)
            query_keys.append((word, decade))
    if not query_rows:
        raise CoverageError("none of the query words have embeddings in the "
                            "requested decades")
    result = fisher_projection(classes, query_rows, anchors=anchors)

    rows = []
    for label, xy in result.class_coords.items():
        rows.append(("class", label, None, float(xy[0]), float(xy[1])))
    for label, xy in result.anchor_coords.items():
        rows.append(("anchor", label, None, float(xy[0]), float(xy[1])))
    for (word, decade), xy in zip(query_keys, result.query_coords):
        rows.append(("query", word, decade, float(xy[0]), float(xy[1])))
    _write_csv(s.out_dir() / "project.csv", s.meta(),
               ["kind", "label", "decade", "x", "y"], rows)
    return 0


_HANDLERS = {
    "align": _cmd_align,
    "classify": _cmd_classify,
    "timecourse": _cmd_timecourse,
    "matrix": _cmd_matrix,
    "evaluate": _cmd_evaluate,
    "valence-corr": _cmd_valence_corr,
    "survey-corr": _cmd_survey_corr,
    "retrieve": _cmd_retrieve,
    "regress": _cmd_regress,
    "permute": _cmd_permute,
    "project": _cmd_project,
}


# ---------------------------------------------------------------------------
# Parser construction
# ---------------------------------------------------------------------------

def _add_common(p: _Parser, *, mfd: bool = False, norms: bool = False,
                model: bool = False, decade: bool = False) -> None:
    p.add_argument("--config", help="flat key=value config file; flags override it")
    p.add_argument("--manifest", help="CSV manifest of decade embedding files")
    p.add_argument("--out-dir", dest="out_dir", help="output directory (default: .)")
    p.add_argument("--normalize-embeddings", dest="normalize_embeddings",
                   action="store_const", const=True, default=None,
                   help="L2-normalize every vector at load")
    if mfd:
        p.add_argument("--mfd", help="seed word CSV (word,category)")
        p.add_argument("--neutral-in-vocab", dest="neutral_in_vocab",
                       action="store_const", const=True, default=None,
                       help="restrict neutral-seed candidates to words present "
                            "in every decade's vocabulary")
    if norms:
        p.add_argument("--norms", help="ratings CSV (word,valence[,concreteness])")
    if model:
        p.add_argument("--model", choices=sorted(set(_MODEL_CHOICES) - {"naive_bayes"}),
                       help="classifier kind (default: centroid)")
        p.add_argument("--k", type=int, help="neighbor count for knn (default: 5)")
        p.add_argument("--bandwidth", type=float,
                       help="kde bandwidth h (default: tuned by leave-one-out)")
        p.add_argument("--variance-floor", dest="variance_floor", type=float,
                       help="minimum per-dimension variance for naive-bayes")
    if decade:
        p.add_argument("--decade", type=int,
                       help="decade to query (default: latest in manifest)")


def build_parser() -> _Parser:
    parser = _Parser(prog=TOOL_NAME,
                     description="Moral sentiment inference and change analysis "
                                 "over diachronic word embeddings.")
    parser.add_argument("--version", action="version",
                        version=f"{TOOL_NAME} {__version__}")
    parser.add_argument("--verbose", action="store_true",
                        help="log progress details to stderr")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND")

    p = sub.add_parser("align", help="rotationally align all decades into a common space")
    _add_common(p)
    p.add_argument("--alignment-direction", dest="alignment_direction",
                   choices=["forward", "backward"],
                   help="chaining anchor: forward=earliest decade, "
                        "backward=latest (default)")

    p = sub.add_parser("classify", help="posterior for one word (JSON on stdout)")
    _add_common(p, mfd=True, norms=True, model=True, decade=True)
    p.add_argument("--word", help="query word")
    p.add_argument("--tier", choices=list(TIERS), help="classification tier")

    p = sub.add_parser("timecourse", help="per-decade scores for one word")
    _add_common(p, mfd=True, norms=True, model=True)
    p.add_argument("--word", help="query word")
    p.add_argument("--tier", choices=list(TIERS), help="classification tier")

    p = sub.add_parser("matrix", help="word-by-decade prediction matrix for a word list")
    _add_common(p, mfd=True, norms=True, model=True)
    p.add_argument("--wordlist", help="word,frequency CSV")
    p.add_argument("--kind", choices=["relevance", "polarity"],
                   help="which binary score to compute")

    p = sub.add_parser("evaluate", help="leave-one-out seed classification accuracy")
    _add_common(p, mfd=True, norms=True, model=True, decade=True)
    p.add_argument("--tier", choices=list(TIERS), help="classification tier")
    p.add_argument("--historical", action="store_const", const=True, default=None,
                   help="evaluate every decade and summarize mean/stdev")

    p = sub.add_parser("valence-corr",
                       help="correlate positive-polarity predictions with valence ratings")
    _add_common(p, mfd=True, norms=True, model=True, decade=True)

    p = sub.add_parser("survey-corr",
                       help="correlate predictions with survey moral judgments")
    _add_common(p, mfd=True, norms=True, model=True, decade=True)
    p.add_argument("--survey", help="topic,frac_not_moral,frac_acceptable CSV")

    p = sub.add_parser("retrieve", help="top words by moral sentiment change")
    _add_common(p, mfd=True, norms=True, model=True)
    p.add_argument("--matrix", help="prediction-matrix JSON from the matrix command")
    p.add_argument("--relevance-matrix", dest="relevance_matrix",
                   help="companion relevance matrix JSON (polarity directions)")
    p.add_argument("--direction", choices=list(DIRECTIONS), help="change direction")
    p.add_argument("--top", type=int, help="number of records (default: 10)")
    p.add_argument("--bonferroni-family", dest="bonferroni_family",
                   choices=["filtered", "all-words"],
                   help="correction multiplier family (default: filtered)")

    p = sub.add_parser("regress",
                       help="regress relevance-change slopes on psycholinguistic factors")
    _add_common(p)
    p.add_argument("--matrix", help="relevance prediction-matrix JSON")
    p.add_argument("--norms", help="ratings CSV with concreteness column")
    p.add_argument("--wordlist", help="word,frequency CSV")

    p = sub.add_parser("permute", help="decade-shuffled control for the change regression")
    _add_common(p)
    p.add_argument("--matrix", help="relevance prediction-matrix JSON")
    p.add_argument("--norms", help="ratings CSV with concreteness column")
    p.add_argument("--wordlist", help="word,frequency CSV")
    p.add_argument("--shuffles", type=int, help="number of shuffles (default: 1000)")
    p.add_argument("--seed", type=int, help="random seed (default: 0)")

    p = sub.add_parser("project", help="2D discriminant map of query words")
    _add_common(p, mfd=True, norms=True, decade=True)
    p.add_argument("--words", help="comma-separated query words")
    p.add_argument("--all-decades", dest="all_decades",
                   action="store_const", const=True, default=None,
                   help="project each word's vector from every decade")

    return parser


def dispatch(argv: Sequence[str]) -> int:
    """Run one subcommand; returns the process exit code."""
    parser = build_parser()
    try:
        args = parser.parse_args(list(argv))
    except _UsageError as exc:
        print(f"{TOOL_NAME}: error: {exc}", file=sys.stderr)
        return 1
    except SystemExit as exc:  # --help/--version print and exit 0
        return int(exc.code or 0)
    if not getattr(args, "command", None):
        parser.print_usage(sys.stderr)
        return 1
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        stream=sys.stderr, format="%(levelname)s %(name)s: %(message)s")
    try:
        settings = Settings(args.command, args)
        return _HANDLERS[args.command](settings)
    except (MoraldriftError, OSError, ValueError, KeyError) as exc:
        print(f"{TOOL_NAME}: error: {exc}", file=sys.stderr)
        return 2


def main(argv: Sequence[str] | None = None) -> int:
    return dispatch(sys.argv[1:] if argv is None else argv)


if __name__ == "__main__":
    sys.exit(main())
