"""CSV ingestion and the two-stage analysis report.

Input rows are ``subject,condition,measure,value``; each measure forms one
family.  Per family: Friedman test plus Kendall's W, and -- only when the
Friedman p falls under alpha -- the pre-specified Wilcoxon pairs with Holm
adjustment and rank-biserial effect sizes.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field

import numpy as np

from .logs import TrialLog
from .stats import (
    AllZeroDifferences,
    ScoreMatrix,
    TestResult,
    holm_correction,
    friedman_test,
    kendalls_w,
    rank_biserial,
    wilcoxon_signed_rank,
)

CSV_HEADER = ["subject", "condition", "measure", "value"]

TLX_MEASURES = ("overall", "mental", "physical", "temporal", "performance", "effort", "frustration")
PROGRESS_MEASURES = ("whole", "level1", "level2")


class SchemaError(ValueError):
    pass


class EmptyFamily(ValueError):
    pass


def read_scores(path_or_text: str, is_text: bool = False) -> dict[str, ScoreMatrix]:
    """Load one ScoreMatrix per measure from a scores CSV.

    Every (subject, condition) cell must be present exactly once per
    measure; gaps and duplicates are schema errors naming the offender.
    """
    if is_text:
        handle = io.StringIO(path_or_text)
        return _read_scores_handle(handle)
    with open(path_or_text, "r", encoding="utf-8", newline="") as handle:
        return _read_scores_handle(handle)


def _read_scores_handle(handle) -> dict[str, ScoreMatrix]:
    reader = csv.reader(handle)
    try:
        header = next(reader)
    except StopIteration:
        raise SchemaError("empty CSV") from None
    if [column.strip() for column in header] != CSV_HEADER:
        raise SchemaError(f"header must be {','.join(CSV_HEADER)}, got {','.join(header)}")

    cells: dict[str, dict[tuple[str, str], float]] = {}
    subjects: list[str] = []
    conditions: list[str] = []
    for lineno, row in enumerate(reader, start=2):
        if not row or all(not part.strip() for part in row):
            continue
        if len(row) != 4:
            raise SchemaError(f"line {lineno}: expected 4 columns, got {len(row)}")
        subject, condition, measure, value_text = (part.strip() for part in row)
        try:
            value = float(value_text)
        except ValueError:
            raise SchemaError(f"line {lineno}: value {value_text!r} is not a number") from None
        table = cells.setdefault(measure, {})
        key = (subject, condition)
        if key in table:
            raise SchemaError(f"duplicate cell subject={subject} condition={condition} measure={measure}")
        table[key] = value
        if subject not in subjects:
            subjects.append(subject)
        if condition not in conditions:
            conditions.append(condition)

    if not cells:
        raise SchemaError("no data rows")

    matrices: dict[str, ScoreMatrix] = {}
    for measure, table in cells.items():
        values = np.empty((len(subjects), len(conditions)), dtype=float)
        for i, subject in enumerate(subjects):
            for j, condition in enumerate(conditions):
                if (subject, condition) not in table:
                    raise SchemaError(
                        f"missing value for subject={subject} condition={condition} measure={measure}"
                    )
                values[i, j] = table[(subject, condition)]
        matrices[measure] = ScoreMatrix(values, tuple(subjects), tuple(conditions))
    return matrices


@dataclass(frozen=True)
class PairResult:
    a: str
    b: str
    wilcoxon: TestResult
    effect_size: float | None
    holm_adjusted_p: float

    def to_dict(self) -> dict:
        return {
            "pair": [self.a, self.b],
            "statistic": self.wilcoxon.statistic,
            "p_value": self.wilcoxon.p_value,
            "method": self.wilcoxon.method,
            "effect_size": self.effect_size,
            "holm_adjusted_p": self.holm_adjusted_p,
        }


@dataclass(frozen=True)
class FamilyReport:
    measure: str
    friedman: TestResult
    effect_size: float  # Kendall's W
    alpha: float
    significant: bool
    pairs: list[PairResult] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "measure": self.measure,
            "friedman": {
                "statistic": self.friedman.statistic,
                "p_value": self.friedman.p_value,
                "method": self.friedman.method,
            },
            "effect_size": self.effect_size,
            "alpha": self.alpha,
            "significant": self.significant,
            "pairs": [pair.to_dict() for pair in self.pairs],
        }


def parse_pair_spec(spec: str) -> list[tuple[str, str]]:
    """'a:b,c:d' -> [(a, b), (c, d)]."""
    pairs: list[tuple[str, str]] = []
    for chunk in spec.split(","):
        chunk = chunk.strip()
        if not chunk:
            continue
        parts = chunk.split(":")
        if len(parts) != 2 or not parts[0] or not parts[1]:
            raise SchemaError(f"bad pair {chunk!r}; expected 'condition:condition'")
        pairs.append((parts[0], parts[1]))
    return pairs


def analyze_family(
    measure: str,
    matrix: ScoreMatrix,
    pairs: list[tuple[str, str]],
    alpha: float = 0.05,
    exact_friedman: bool = False,
) -> FamilyReport:
    """Two-stage procedure for one measure family."""
    friedman = friedman_test(matrix, exact=exact_friedman)
    w = kendalls_w(matrix)
    significant = friedman.p_value < alpha
    pair_results: list[PairResult] = []
    if significant and pairs:
        tests: list[TestResult] = []
        effects: list[float | None] = []
        for a, b in pairs:
            x = matrix.column(a)
            y = matrix.column(b)
            result = wilcoxon_signed_rank(x, y)
            tests.append(result)
            try:
                effects.append(rank_biserial(x, y))
            except AllZeroDifferences:
                effects.append(None)
        adjusted = holm_correction([t.p_value for t in tests])
        for (a, b), result, effect, adj in zip(pairs, tests, effects, adjusted):
            pair_results.append(PairResult(a, b, result, effect, adj))
    return FamilyReport(
        measure=measure,
        friedman=friedman,
        effect_size=w,
        alpha=alpha,
        significant=significant,
        pairs=pair_results,
    )


def analyze_scores(
    matrices: dict[str, ScoreMatrix],
    pairs: list[tuple[str, str]],
    alpha: float = 0.05,
    exact_friedman: bool = False,
) -> list[FamilyReport]:
    if not matrices:
        raise EmptyFamily("no measure families in input")
    for measure, matrix in matrices.items():
        for a, b in pairs:
            for condition in (a, b):
                if condition not in matrix.conditions:
                    raise EmptyFamily(
                        f"pair condition {condition!r} absent from measure {measure!r}"
                    )
    return [
        analyze_family(measure, matrix, pairs, alpha, exact_friedman)
        for measure, matrix in matrices.items()
    ]


def render_report(reports: list[FamilyReport]) -> str:
    """Human-readable two-stage report, one block per family."""
    lines: list[str] = []
    for report in reports:
        lines.append(f"family: {report.measure}")
        lines.append(
            f"  friedman  statistic={report.friedman.statistic:.4f}"
            f"  p={report.friedman.p_value:.4g}  method={report.friedman.method}"
        )
        lines.append(f"  effect_size (kendalls_w)={report.effect_size:.4f}")
        if not report.significant:
            lines.append(f"  not significant at alpha={report.alpha}; no post hoc comparisons")
        elif not report.pairs:
            lines.append("  significant, but no pairs were pre-specified")
        else:
            for pair in report.pairs:
                effect = "n/a" if pair.effect_size is None else f"{pair.effect_size:+.4f}"
                lines.append(
                    f"  {pair.a} vs {pair.b}:  statistic={pair.wilcoxon.statistic:.4f}"
                    f"  p={pair.wilcoxon.p_value:.6g}  holm={pair.holm_adjusted_p:.6g}"
                    f"  effect_size={effect}  method={pair.wilcoxon.method}"
                )
        lines.append("")
    return "\n".join(lines)


def report_json(reports: list[FamilyReport]) -> str:
    return json.dumps([report.to_dict() for report in reports], indent=2, sort_keys=True)


def progress_to_csv(logs: list[TrialLog]) -> str:
    """Trial logs -> scores CSV (subject = seed, condition = mode)."""
    out = io.StringIO()
    writer = csv.writer(out)
    writer.writerow(CSV_HEADER)
    for log in logs:
        whole, level1, level2 = log.progress()
        for measure, value in zip(PROGRESS_MEASURES, (whole, level1, level2)):
            writer.writerow([f"seed{log.seed}", log.mode, measure, value])
    return out.getvalue()
