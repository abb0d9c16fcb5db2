"""Nonparametric battery for subjects-by-conditions score tables.

Friedman test with tie correction (chi-square tail, optional exact
permutation null for small tables), Kendall's W concordance, Wilcoxon
signed-rank (exact by sign enumeration up to n = 20, tie-corrected normal
approximation beyond), Holm step-down adjustment, and the rank-biserial
effect size.  All functions are pure and safe under concurrent callers.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np
from scipy import stats as _scipy_stats

FRIEDMAN_CHI_SQ = "friedman_chi_sq"
FRIEDMAN_EXACT = "friedman_exact"
WILCOXON_EXACT = "wilcoxon_exact"
WILCOXON_NORMAL = "wilcoxon_normal"

# Sign-assignment enumeration stays cheap up to here; beyond it the normal
# approximation is standard practice.
EXACT_WILCOXON_MAX_N = 20
EXACT_FRIEDMAN_MAX_M = 8


class ShapeError(ValueError):
    pass


class DomainError(ValueError):
    pass


class AllZeroDifferences(ValueError):
    pass


class EmptyGroup(ValueError):
    pass


@dataclass(frozen=True)
class ScoreMatrix:
    """m subjects x k conditions of real-valued scores; no missing cells."""

    values: np.ndarray
    subjects: tuple[str, ...] = ()
    conditions: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        values = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "values", values)
        if values.ndim != 2:
            raise ShapeError(f"score matrix must be 2-D, got shape {values.shape}")
        m, k = values.shape
        if m < 2 or k < 2:
            raise ShapeError(f"need at least 2 subjects and 2 conditions, got {m}x{k}")
        if not np.isfinite(values).all():
            raise ShapeError("score matrix contains non-finite cells")
        if self.subjects and len(self.subjects) != m:
            raise ShapeError("subject labels do not match row count")
        if self.conditions and len(self.conditions) != k:
            raise ShapeError("condition labels do not match column count")

    @property
    def m(self) -> int:
        return self.values.shape[0]

    @property
    def k(self) -> int:
        return self.values.shape[1]

    def column(self, condition: str) -> np.ndarray:
        if condition not in self.conditions:
            raise ShapeError(f"unknown condition {condition!r}")
        return self.values[:, self.conditions.index(condition)]


@dataclass(frozen=True)
class TestResult:
    statistic: float
    p_value: float
    method: str
    details: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        if not 0.0 <= self.p_value <= 1.0:
            raise DomainError(f"p-value {self.p_value} outside [0,1]")

    def to_dict(self) -> dict:
        return {
            "statistic": self.statistic,
            "p_value": self.p_value,
            "method": self.method,
            "details": dict(self.details),
        }


def _average_ranks(row: np.ndarray) -> np.ndarray:
    """Ranks 1..n with ties replaced by the mean of their positions."""
    order = np.argsort(row, kind="stable")
    ranks = np.empty(len(row), dtype=float)
    i = 0
    while i < len(row):
        j = i
        while j + 1 < len(row) and row[order[j + 1]] == row[order[i]]:
            j += 1
        ranks[order[i : j + 1]] = (i + j) / 2.0 + 1.0
        i = j + 1
    return ranks


def _tie_term(row: np.ndarray) -> float:
    """Sum of t^3 - t over the tie groups of one row."""
    _, counts = np.unique(row, return_counts=True)
    return float(np.sum(counts.astype(float) ** 3 - counts))


def _rank_table(matrix: ScoreMatrix) -> tuple[np.ndarray, float]:
    ranks = np.vstack([_average_ranks(row) for row in matrix.values])
    ties = sum(_tie_term(row) for row in matrix.values)
    return ranks, ties


def friedman_test(matrix: ScoreMatrix, exact: bool = False) -> TestResult:
    """Rank-based repeated-measures test over the score matrix.

    The statistic carries the standard tie correction; the p-value comes
    from the chi-square tail with k-1 degrees of freedom, or from full
    permutation enumeration when ``exact`` is set (m <= 8).
    """
    m, k = matrix.m, matrix.k
    ranks, ties = _rank_table(matrix)
    column_sums = ranks.sum(axis=0)
    ssbn = float(np.sum(column_sums**2))
    correction = 1.0 - ties / (m * k * (k * k - 1))
    if correction <= 0.0:
        # Every row fully tied: no information, by convention a null result.
        return TestResult(0.0, 1.0, FRIEDMAN_CHI_SQ, {"df": k - 1, "tie_term": ties})
    statistic = (12.0 / (m * k * (k + 1)) * ssbn - 3.0 * m * (k + 1)) / correction
    statistic = max(0.0, statistic)
    if exact:
        if m > EXACT_FRIEDMAN_MAX_M:
            raise ShapeError(f"exact Friedman null supports m <= {EXACT_FRIEDMAN_MAX_M}, got {m}")
        p_value = _friedman_exact_p(ranks, column_sums)
        return TestResult(statistic, p_value, FRIEDMAN_EXACT, {"df": k - 1, "tie_term": ties})
    p_value = float(_scipy_stats.chi2.sf(statistic, k - 1))
    return TestResult(statistic, p_value, FRIEDMAN_CHI_SQ, {"df": k - 1, "tie_term": ties})


def _friedman_exact_p(ranks: np.ndarray, column_sums: np.ndarray) -> float:
    """P(sum of squared column rank sums >= observed) under row permutation.

    Rows are permuted independently and uniformly; the tie structure of each
    row is fixed, so the tie-corrected statistic is monotone in the sum of
    squared column sums.  Doubled ranks keep everything integral.
    """
    k = ranks.shape[1]
    states: dict[tuple[int, ...], int] = {tuple([0] * k): 1}
    total_perms = 1
    for row in ranks:
        doubled = [int(round(2 * value)) for value in row]
        perms = list(itertools.permutations(doubled))
        total_perms *= len(perms)
        next_states: dict[tuple[int, ...], int] = {}
        for sums, count in states.items():
            for perm in perms:
                key = tuple(s + p for s, p in zip(sums, perm))
                next_states[key] = next_states.get(key, 0) + count
        states = next_states
    threshold = sum(int(round(2 * value)) ** 2 for value in column_sums)
    hits = 0
    for sums, count in states.items():
        if sum(value * value for value in sums) >= threshold:
            hits += count
    return hits / total_perms


def kendalls_w(matrix: ScoreMatrix) -> float:
    """Concordance of the row rankings, in [0, 1], tie-corrected."""
    m, k = matrix.m, matrix.k
    ranks, ties = _rank_table(matrix)
    column_sums = ranks.sum(axis=0)
    ssbn = float(np.sum(column_sums**2))
    numerator = 12.0 * ssbn - 3.0 * m * m * k * (k + 1) ** 2
    denominator = m * m * k * (k * k - 1) - m * ties
    if denominator <= 0.0:
        return 0.0
    return min(1.0, max(0.0, numerator / denominator))


def _signed_rank_prep(x, y) -> tuple[np.ndarray, np.ndarray, int]:
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.ndim != 1 or y.ndim != 1:
        raise ShapeError("paired samples must be 1-D")
    if len(x) != len(y):
        raise ShapeError(f"length mismatch: {len(x)} vs {len(y)}")
    if len(x) < 1:
        raise ShapeError("need at least one pair")
    if not (np.isfinite(x).all() and np.isfinite(y).all()):
        raise ShapeError("samples contain non-finite values")
    differences = x - y
    zeros = int(np.sum(differences == 0))
    nonzero = differences[differences != 0]
    return differences, nonzero, zeros


def _signed_rank_sums(nonzero: np.ndarray) -> tuple[float, float, np.ndarray]:
    ranks = _average_ranks(np.abs(nonzero))
    w_plus = float(ranks[nonzero > 0].sum())
    w_minus = float(ranks[nonzero < 0].sum())
    return w_plus, w_minus, ranks


def wilcoxon_signed_rank(x, y, method: str = "auto") -> TestResult:
    """Two-sided paired test; zero differences are dropped (and counted).

    ``method``: "auto" picks exact enumeration for n <= 20 and the
    tie-corrected normal approximation with continuity correction beyond;
    "exact" / "normal" force a regime.
    """
    _, nonzero, zeros = _signed_rank_prep(x, y)
    n = len(nonzero)
    if n == 0:
        # All pairs tied: p = 1 by convention, flagged for the caller.
        return TestResult(
            0.0,
            1.0,
            WILCOXON_EXACT,
            {"n_used": 0, "zeros_dropped": zeros, "all_zero": True, "w_plus": 0.0, "w_minus": 0.0},
        )
    w_plus, w_minus, ranks = _signed_rank_sums(nonzero)
    statistic = min(w_plus, w_minus)
    details = {
        "n_used": n,
        "zeros_dropped": zeros,
        "all_zero": False,
        "w_plus": w_plus,
        "w_minus": w_minus,
    }
    if method not in ("auto", "exact", "normal"):
        raise ValueError(f"unknown method {method!r}")
    use_exact = method == "exact" or (method == "auto" and n <= EXACT_WILCOXON_MAX_N)
    if use_exact:
        p_value = _wilcoxon_exact_p(ranks, nonzero)
        return TestResult(statistic, p_value, WILCOXON_EXACT, details)
    p_value = _wilcoxon_normal_p(ranks, statistic)
    return TestResult(statistic, p_value, WILCOXON_NORMAL, details)


def _wilcoxon_exact_p(ranks: np.ndarray, nonzero: np.ndarray) -> float:
    """Two-sided exact p: P(|W+ - E| >= |observed - E|) over all 2^n signs.

    The W+ null distribution is built by convolution over doubled ranks, so
    tied average ranks stay integral.
    """
    doubled = [int(round(2 * rank)) for rank in ranks]
    counts: dict[int, int] = {0: 1}
    for value in doubled:
        step: dict[int, int] = {}
        for total, count in counts.items():
            step[total] = step.get(total, 0) + count
            step[total + value] = step.get(total + value, 0) + count
        counts = step
    total2 = sum(doubled)
    observed2 = int(round(2 * float(ranks[nonzero > 0].sum())))
    deviation = abs(2 * observed2 - total2)  # 2*|W+ - E| in doubled units
    hits = sum(count for value, count in counts.items() if abs(2 * value - total2) >= deviation)
    return hits / (2 ** len(doubled))


def _wilcoxon_normal_p(ranks: np.ndarray, statistic: float) -> float:
    n = len(ranks)
    mean = n * (n + 1) / 4.0
    tie_term = _tie_term(np.abs(ranks))  # groups of equal ranks mirror |d| ties
    variance = n * (n + 1) * (2 * n + 1) / 24.0 - tie_term / 48.0
    if variance <= 0.0:
        return 1.0
    # Continuity correction of one half toward the mean.
    shift = 0.5 * np.sign(statistic - mean)
    z = (statistic - mean - shift) / np.sqrt(variance)
    return float(min(1.0, 2.0 * _scipy_stats.norm.sf(abs(z))))


def holm_correction(p_values) -> list[float]:
    """Step-down family-wise adjustment; output aligns with the input order."""
    ps = [float(p) for p in p_values]
    for p in ps:
        if not 0.0 <= p <= 1.0:
            raise DomainError(f"p-value {p} outside [0,1]")
    m = len(ps)
    order = sorted(range(m), key=lambda i: ps[i])
    adjusted = [0.0] * m
    running = 0.0
    for position, index in enumerate(order):
        running = max(running, (m - position) * ps[index])
        adjusted[index] = min(1.0, running)
    return adjusted


def rank_biserial(x, y) -> float:
    """Wilcoxon effect size (W+ - W-)/(W+ + W-) over the nonzero pairs."""
    _, nonzero, _ = _signed_rank_prep(x, y)
    if len(nonzero) == 0:
        raise AllZeroDifferences("every pair is tied; effect size undefined")
    w_plus, w_minus, _ = _signed_rank_sums(nonzero)
    return (w_plus - w_minus) / (w_plus + w_minus)


@dataclass(frozen=True)
class SummaryRow:
    group: str
    measure: str
    mean: float
    std: float
    n: int
    std_defined: bool

    def to_dict(self) -> dict:
        return {
            "group": self.group,
            "measure": self.measure,
            "mean": self.mean,
            "std": self.std,
            "n": self.n,
            "std_defined": self.std_defined,
        }

    def display(self) -> str:
        marker = "" if self.std_defined else "*"
        return f"{self.mean:.2f}±{self.std:.2f}{marker}"


_PROGRESS_MEASURES = ("whole", "level1", "level2")


def summarize_progress(groups: dict[str, list]) -> list[SummaryRow]:
    """Mean +/- sample standard deviation per (group x progress measure).

    Accepts per-trial (whole, level1, level2) triples.  With a single trial
    the sample deviation is undefined; it is reported as 0 with
    ``std_defined`` unset.
    """
    rows: list[SummaryRow] = []
    for group, triples in groups.items():
        if not triples:
            raise EmptyGroup(f"group {group!r} has no trials")
        values = np.asarray(
            [t.as_tuple() if hasattr(t, "as_tuple") else tuple(t) for t in triples], dtype=float
        )
        for index, measure in enumerate(_PROGRESS_MEASURES):
            column = values[:, index]
            n = len(column)
            std_defined = n > 1
            std = float(np.std(column, ddof=1)) if std_defined else 0.0
            rows.append(
                SummaryRow(
                    group=group,
                    measure=measure,
                    mean=float(np.mean(column)),
                    std=std,
                    n=n,
                    std_defined=std_defined,
                )
            )
    return rows
