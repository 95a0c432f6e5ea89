"""Statistical primitives: OLS regression, correlations, permutation
controls, and a regularized Fisher-discriminant 2D projection.

Also hosts the broad-scale pipeline that regresses per-word rates of
moral-relevance change on psycholinguistic factors (log frequency,
word length, concreteness), which the permutation control re-runs on
decade-shuffled score matrices.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import TYPE_CHECKING, Mapping, Sequence

import numpy as np
import scipy.linalg
from scipy.stats import t as student_t

from .embeddings import QueryVector
from .errors import DataError
from .lexicon import NormEntry

if TYPE_CHECKING:
    from .diachronic import PredictionMatrix

logger = logging.getLogger(__name__)

REGRESSION_FACTORS = ("frequency", "length", "concreteness")


@dataclass(frozen=True)
class CorrelationReport:
    """Pearson correlation with a two-sided t-test p-value."""

    r: float
    p: float
    n: int

    def to_dict(self) -> dict:
        return {"r": self.r, "p": self.p, "n": self.n}


@dataclass(frozen=True)
class RegressionFit:
    """OLS fit with per-coefficient t statistics and p-values."""

    coefficients: dict[str, float]
    std_errors: dict[str, float]
    t_stats: dict[str, float]
    p_values: dict[str, float]
    n: int
    r_squared: float

    def to_dict(self) -> dict:
        return {
            "coefficients": self.coefficients,
            "std_errors": self.std_errors,
            "t_stats": self.t_stats,
            "p_values": self.p_values,
            "n": self.n,
            "r_squared": self.r_squared,
        }


@dataclass(frozen=True)
class FactorControl:
    """One factor's diachronic coefficient against its shuffled control."""

    diachronic_coefficient: float
    control_mean: float
    control_stdev: float
    empirical_p: float

    def to_dict(self) -> dict:
        return {
            "diachronic_coefficient": self.diachronic_coefficient,
            "control_mean": self.control_mean,
            "control_stdev": self.control_stdev,
            "empirical_p": self.empirical_p,
        }


@dataclass(frozen=True)
class PermutationReport:
    factors: dict[str, FactorControl]
    n_shuffles: int
    seed: int

    def to_dict(self) -> dict:
        return {
            "factors": {name: fc.to_dict() for name, fc in self.factors.items()},
            "n_shuffles": self.n_shuffles,
            "seed": self.seed,
        }


@dataclass(frozen=True)
class ProjectionResult:
    """2D discriminant coordinates for queries and class anchors."""

    query_coords: np.ndarray               # (n_queries, 2)
    class_coords: dict[str, np.ndarray]    # class label -> (2,)
    anchor_coords: dict[str, np.ndarray]   # anchor label -> (2,)
    axes: np.ndarray                        # (dim, 2) projection matrix


def _column(name: str, values, n: int | None = None) -> np.ndarray:
    col = np.asarray(values, dtype=np.float64)
    if col.ndim != 1:
        raise DataError(f"{name} must be one-dimensional")
    if n is not None and col.shape[0] != n:
        raise DataError(f"{name} has length {col.shape[0]}, expected {n}")
    if not np.all(np.isfinite(col)):
        raise DataError(f"{name} contains non-finite values")
    return col


def pearson(x: Sequence[float], y: Sequence[float]) -> CorrelationReport:
    """Sample Pearson correlation; p from the exact t-transform (df=n-2)."""
    xa = _column("x", x)
    ya = _column("y", y, xa.shape[0])
    n = xa.shape[0]
    if n < 3:
        raise DataError(f"need at least 3 samples for a correlation, got {n}")
    xc = xa - xa.mean()
    yc = ya - ya.mean()
    sx = np.sqrt(np.sum(xc * xc))
    sy = np.sqrt(np.sum(yc * yc))
    if sx == 0.0 or sy == 0.0:
        raise DataError("correlation is undefined for a constant input")
    r = float(np.clip(np.sum(xc * yc) / (sx * sy), -1.0, 1.0))
    if 1.0 - r * r <= 0.0:
        p = 0.0
    else:
        t_stat = r * np.sqrt((n - 2) / (1.0 - r * r))
        p = float(2.0 * student_t.sf(abs(t_stat), n - 2))
    return CorrelationReport(r=r, p=p, n=n)


def slope_test(y: Sequence[float], t_values: Sequence[float] | None = None
               ) -> tuple[float, float]:
    """OLS slope of y on t (default t = 1..n) with a two-sided t-test p.

    Degenerate zero-residual fits use the convention p=0 for a nonzero
    slope and p=1 for a zero slope.
    """
    ya = _column("y", y)
    n = ya.shape[0]
    if t_values is None:
        ta = np.arange(1, n + 1, dtype=np.float64)
    else:
        ta = _column("t", t_values, n)
    if n < 3:
        raise DataError(f"need at least 3 points for a slope test, got {n}")
    tc = ta - ta.mean()
    sxx = np.sum(tc * tc)
    if sxx == 0.0:
        raise DataError("abscissa has zero variance")
    slope = float(np.sum(tc * (ya - ya.mean())) / sxx)
    resid = ya - ya.mean() - slope * tc
    rss = float(np.sum(resid * resid))
    se = np.sqrt(rss / (n - 2) / sxx)
    if se == 0.0:
        return slope, (1.0 if slope == 0.0 else 0.0)
    t_stat = slope / se
    return slope, float(2.0 * student_t.sf(abs(t_stat), n - 2))


def _design(factors: Mapping[str, Sequence[float]], n: int) -> tuple[np.ndarray, list[str]]:
    names = ["intercept"] + list(factors)
    cols = [np.ones(n)]
    for name in factors:
        cols.append(_column(name, factors[name], n))
    return np.column_stack(cols), names


def multiple_regression(y: Sequence[float],
                        factors: Mapping[str, Sequence[float]]) -> RegressionFit:
    """OLS with intercept; two-sided t-test p-value per coefficient."""
    ya = _column("y", y)
    n = ya.shape[0]
    if n <= len(factors) + 1:
        raise DataError(f"need more than {len(factors) + 1} samples, got {n}")
    x, names = _design(factors, n)
    p_cols = x.shape[1]
    if np.linalg.matrix_rank(x) < p_cols:
        raise DataError("design matrix is rank-deficient (collinear factors)")
    beta, _, _, _ = np.linalg.lstsq(x, ya, rcond=None)
    resid = ya - x @ beta
    rss = float(resid @ resid)
    dof = n - p_cols
    sigma2 = rss / dof
    cov = sigma2 * np.linalg.inv(x.T @ x)
    se = np.sqrt(np.diag(cov))

    coeffs, errs, tstats, pvals = {}, {}, {}, {}
    for j, name in enumerate(names):
        b = float(beta[j])
        s = float(se[j])
        if s == 0.0:
            t_stat = 0.0 if b == 0.0 else np.inf
            p = 1.0 if b == 0.0 else 0.0
        else:
            t_stat = b / s
            p = float(2.0 * student_t.sf(abs(t_stat), dof))
        coeffs[name] = b
        errs[name] = s
        tstats[name] = float(t_stat)
        pvals[name] = p
    tss = float(np.sum((ya - ya.mean()) ** 2))
    r_squared = 1.0 if tss == 0.0 else 1.0 - rss / tss
    return RegressionFit(coefficients=coeffs, std_errors=errs, t_stats=tstats,
                         p_values=pvals, n=n, r_squared=r_squared)


def partial_correlation(target: Sequence[float], factor: Sequence[float],
                        controls: Mapping[str, Sequence[float]]) -> CorrelationReport:
    """Pearson correlation of the OLS residuals of target and factor on
    the control columns. With no controls this is the plain correlation."""
    ta = _column("target", target)
    fa = _column("factor", factor, ta.shape[0])
    if not controls:
        return pearson(ta, fa)
    x, _ = _design(controls, ta.shape[0])
    if np.linalg.matrix_rank(x) < x.shape[1]:
        raise DataError("control design matrix is rank-deficient")

    def residualize(name, v):
        beta, _, _, _ = np.linalg.lstsq(x, v, rcond=None)
        resid = v - x @ beta
        centered = v - v.mean()
        total = float(centered @ centered)
        if total == 0.0 or float(resid @ resid) <= 1e-10 * total:
            raise DataError(f"{name} is (numerically) a linear function of the controls")
        return resid

    return pearson(residualize("target", ta), residualize("factor", fa))


# ---------------------------------------------------------------------------
# Broad-scale change regression and its shuffled control
# ---------------------------------------------------------------------------

def _row_slopes(values: np.ndarray, present: np.ndarray) -> np.ndarray:
    """Vectorized per-row OLS slopes of score on decade index 1..n,
    restricted to unmasked entries. Rows need >= 2 present points."""
    n_dec = values.shape[1]
    t_idx = np.arange(1, n_dec + 1, dtype=np.float64)
    k = present.sum(axis=1)
    vals = np.where(present, values, 0.0)
    t_mat = np.where(present, t_idx, 0.0)
    t_mean = t_mat.sum(axis=1) / k
    y_mean = vals.sum(axis=1) / k
    tc = np.where(present, t_idx[None, :] - t_mean[:, None], 0.0)
    yc = np.where(present, values - y_mean[:, None], 0.0)
    sxx = np.sum(tc * tc, axis=1)
    return np.sum(tc * yc, axis=1) / sxx


def _changed_word_fit(values: np.ndarray, words: Sequence[str],
                      concreteness: Mapping[str, float],
                      log_frequency: Mapping[str, float],
                      min_decades: int) -> tuple[RegressionFit, list[str]]:
    present = np.isfinite(values)
    n_words, n_dec = values.shape
    counts = present.sum(axis=1)
    usable = counts >= min_decades

    first_idx = np.argmax(present, axis=1)
    last_idx = n_dec - 1 - np.argmax(present[:, ::-1], axis=1)
    rows = np.arange(n_words)
    first_val = np.where(usable, values[rows, first_idx], np.nan)
    last_val = np.where(usable, values[rows, last_idx], np.nan)
    changed = usable & ((first_val > 0.5) != (last_val > 0.5))

    selected: list[int] = []
    kept_words: list[str] = []
    for i in np.flatnonzero(changed):
        w = words[i]
        if w in concreteness and w in log_frequency:
            selected.append(i)
            kept_words.append(w)
    if len(selected) <= len(REGRESSION_FACTORS) + 1:
        raise DataError(
            f"only {len(selected)} words qualify for the change regression; "
            f"need more than {len(REGRESSION_FACTORS) + 1}")
    idx = np.array(selected)
    slopes = _row_slopes(values[idx], present[idx])
    factors = {
        "frequency": np.array([log_frequency[w] for w in kept_words]),
        "length": np.array([float(len(w)) for w in kept_words]),
        "concreteness": np.array([concreteness[w] for w in kept_words]),
    }
    return multiple_regression(slopes, factors), kept_words


def _factor_tables(norms: Sequence[NormEntry],
                   frequencies: Mapping[str, float] | Sequence[tuple[str, float]]
                   ) -> tuple[dict[str, float], dict[str, float]]:
    concreteness = {e.word: e.concreteness for e in norms if e.concreteness is not None}
    freq_map = dict(frequencies)
    log_frequency = {}
    skipped = 0
    for w, f in freq_map.items():
        if f > 0:
            log_frequency[w] = float(np.log(f))
        else:
            skipped += 1
    if skipped:
        logger.warning("skipped %d words with non-positive frequency", skipped)
    return concreteness, log_frequency


def psycholinguistic_regression(
    matrix: "PredictionMatrix",
    norms: Sequence[NormEntry],
    frequencies: Mapping[str, float] | Sequence[tuple[str, float]],
    min_decades: int = 5,
) -> tuple[RegressionFit, list[str]]:
    """Regress per-word relevance-change slopes on log frequency, word
    length, and concreteness.

    The sample is restricted to words whose relevance class (score vs
    0.5) differs between their first and last unmasked decades, i.e.
    words that changed relevance in either direction. Returns the fit
    and the words that entered it.
    """
    concreteness, log_frequency = _factor_tables(norms, frequencies)
    return _changed_word_fit(np.asarray(matrix.values, dtype=np.float64),
                             list(matrix.words), concreteness, log_frequency,
                             min_decades)


def permutation_control(
    matrix: "PredictionMatrix",
    norms: Sequence[NormEntry],
    frequencies: Mapping[str, float] | Sequence[tuple[str, float]],
    n_shuffles: int = 1000,
    seed: int = 0,
    min_decades: int = 5,
    permutations: Sequence[np.ndarray] | None = None,
) -> PermutationReport:
    """Decade-shuffled control for the change regression.

    Each shuffle applies one shared permutation of the decade columns to
    every word's time course, then re-runs the complete regression
    pipeline (slopes, change filter, factor fit). The empirical p per
    factor is the two-sided fraction of control coefficients at least as
    large in magnitude as the diachronic one, with the +1/(n+1)
    finite-sample correction. Deterministic under a fixed seed.

    ``permutations`` overrides the seeded shuffles (for controls/tests).
    """
    values = np.asarray(matrix.values, dtype=np.float64)
    n_dec = values.shape[1]
    if n_dec < 5:
        raise DataError(f"need at least 5 decades, got {n_dec}")
    concreteness, log_frequency = _factor_tables(norms, frequencies)
    words = list(matrix.words)

    base_fit, _ = _changed_word_fit(values, words, concreteness,
                                    log_frequency, min_decades)

    if permutations is None:
        children = np.random.SeedSequence(seed).spawn(n_shuffles)
        permutations = [np.random.default_rng(c).permutation(n_dec) for c in children]
    else:
        permutations = [np.asarray(p) for p in permutations]
        n_shuffles = len(permutations)

    control = {name: np.empty(n_shuffles) for name in REGRESSION_FACTORS}
    for i, perm in enumerate(permutations):
        try:
            fit_i, _ = _changed_word_fit(values[:, perm], words, concreteness,
                                         log_frequency, min_decades)
        except DataError as exc:
            raise DataError(f"shuffle {i}: {exc}") from exc
        for name in REGRESSION_FACTORS:
            control[name][i] = fit_i.coefficients[name]

    factors: dict[str, FactorControl] = {}
    for name in REGRESSION_FACTORS:
        observed = base_fit.coefficients[name]
        ctrl = control[name]
        extreme = int(np.count_nonzero(np.abs(ctrl) >= abs(observed)))
        factors[name] = FactorControl(
            diachronic_coefficient=observed,
            control_mean=float(ctrl.mean()),
            control_stdev=float(ctrl.std(ddof=1)) if n_shuffles > 1 else 0.0,
            empirical_p=(1 + extreme) / (n_shuffles + 1),
        )
    return PermutationReport(factors=factors, n_shuffles=n_shuffles, seed=seed)


# ---------------------------------------------------------------------------
# Fisher discriminant projection
# ---------------------------------------------------------------------------

def _query_rows(queries) -> np.ndarray:
    rows = []
    for q in queries:
        rows.append(q.values if isinstance(q, QueryVector) else np.asarray(q, dtype=np.float64))
    if not rows:
        return np.empty((0, 0))
    return np.vstack(rows)


def fisher_projection(class_vectors: Mapping[str, Sequence],
                      queries: Sequence,
                      anchors: Mapping[str, Sequence] | None = None,
                      ridge: float = 1e-6) -> ProjectionResult:
    """Project queries onto the top-2 Fisher discriminant axes of three
    seed classes (typically virtue / vice / irrelevance).

    The within-class scatter is ridge-regularized (seed counts can fall
    below the embedding dimensionality). Axis signs are fixed so each
    axis's largest-magnitude entry is positive. ``anchors`` adds extra
    labelled vector sets whose centroids are projected as map anchors.
    """
    if len(class_vectors) != 3:
        raise DataError(f"fisher_projection expects exactly 3 classes, got {len(class_vectors)}")
    labels = list(class_vectors)
    matrices = []
    for label in labels:
        m = np.asarray(class_vectors[label], dtype=np.float64)
        if m.ndim != 2 or m.shape[0] < 2:
            raise DataError(f"class {label!r} needs at least 2 vectors")
        matrices.append(m)
    dims = {m.shape[1] for m in matrices}
    if len(dims) != 1:
        raise DataError(f"classes disagree on dimensionality: {sorted(dims)}")
    dim = dims.pop()

    total = np.vstack(matrices)
    grand_mean = total.mean(axis=0)
    s_w = ridge * np.eye(dim)
    s_b = np.zeros((dim, dim))
    centroids = {}
    for label, m in zip(labels, matrices):
        mu = m.mean(axis=0)
        centroids[label] = mu
        dev = m - mu
        s_w += dev.T @ dev
        gap = (mu - grand_mean)[:, None]
        s_b += m.shape[0] * (gap @ gap.T)

    try:
        eigvals, eigvecs = scipy.linalg.eigh(s_b, s_w)
    except (scipy.linalg.LinAlgError, ValueError) as exc:
        raise DataError(f"discriminant eigensolve failed: {exc}") from exc
    axes = eigvecs[:, [-1, -2]]
    for j in range(2):
        col = axes[:, j]
        if col[int(np.argmax(np.abs(col)))] < 0:
            axes[:, j] = -col

    q = _query_rows(queries)
    if q.size and q.shape[1] != dim:
        raise DataError(f"queries have dimension {q.shape[1]}, classes have {dim}")
    query_coords = q @ axes if q.size else np.empty((0, 2))

    class_coords = {label: centroids[label] @ axes for label in labels}
    anchor_coords = {}
    if anchors:
        for label, vectors in anchors.items():
            m = np.asarray(vectors, dtype=np.float64)
            if m.ndim == 1:
                m = m.reshape(1, -1)
            anchor_coords[label] = m.mean(axis=0) @ axes
    return ProjectionResult(query_coords=query_coords, class_coords=class_coords,
                            anchor_coords=anchor_coords, axes=axes)
