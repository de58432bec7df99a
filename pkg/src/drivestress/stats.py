"""Violation metrics and the statistical comparison machinery.

Evaluation episodes are summarized into violation counts (collision,
completion-infeasible, and their joint) plus conditional means of the
objective values over the violating subsets. Two methods are compared
per metric with a two-sided Fisher's exact test on the 2x2 table of
violating vs non-violating episode counts, plus the sample odds ratio.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import ContractError


@dataclass(frozen=True)
class ContingencyTable:
    """2x2 counts: row = method, column = violated / did not."""

    a: int  # method A, violated
    b: int  # method A, not violated
    c: int  # method B, violated
    d: int  # method B, not violated

    def __post_init__(self):
        for v in (self.a, self.b, self.c, self.d):
            if int(v) != v or v < 0:
                raise ContractError(f"contingency counts must be non-negative integers: {self}")


def contingency_from_counts(violations_a: int, n_a: int, violations_b: int, n_b: int) -> ContingencyTable:
    if violations_a > n_a or violations_b > n_b:
        raise ContractError("violation count exceeds episode count")
    return ContingencyTable(violations_a, n_a - violations_a, violations_b, n_b - violations_b)


def _log_binom(n: int, k: int) -> float:
    return math.lgamma(n + 1) - math.lgamma(k + 1) - math.lgamma(n - k + 1)


def fisher_exact_two_sided(table: ContingencyTable) -> float:
    """Two-sided Fisher's exact test.

    Sums hypergeometric point probabilities over all tables with the
    same margins whose probability does not exceed the observed one
    (with 1e-12 relative slack for ties). Probabilities are accumulated
    in log space via log-factorials.
    """
    a, b, c, d = table.a, table.b, table.c, table.d
    row1, row2 = a + b, c + d
    col1 = a + c
    n = row1 + row2
    if row1 == 0 or row2 == 0 or col1 == 0 or col1 == n:
        return 1.0  # degenerate margins: only one table is possible

    denom = _log_binom(n, col1)

    def log_pmf(x: int) -> float:
        return _log_binom(row1, x) + _log_binom(row2, col1 - x) - denom

    lo = max(0, col1 - row2)
    hi = min(col1, row1)
    observed = log_pmf(a)
    cutoff = observed + math.log1p(1e-12)
    total = 0.0
    for x in range(lo, hi + 1):
        lp = log_pmf(x)
        if lp <= cutoff:
            total += math.exp(lp)
    return min(total, 1.0)


def odds_ratio(table: ContingencyTable):
    """Sample odds ratio (a/b)/(c/d).

    Zero-cell conventions: no correction is applied; a zero comparison
    arm with a positive treatment arm is infinity, and a table with no
    violations on either side has no defined ratio (None).
    """
    ad = table.a * table.d
    bc = table.b * table.c
    if bc == 0:
        if ad == 0:
            return None
        return math.inf
    return ad / bc


def significance_bucket(p: float) -> str:
    if p < 0.01:
        return "<0.01"
    if p < 0.05:
        return "<0.05"
    return ">=0.05"


# ---------------------------------------------------------------------------
# episode aggregation


@dataclass
class MetricsSummary:
    """Violation counts and conditional objective means for one method
    on one road. Conditional means are None when the subset is empty
    (rendered as "/" in reports)."""

    n_episodes: int
    v_r1: int
    v_r2: int
    v_r1_r2: int
    v_r2_inclusive: int
    ttc_given_r1: float | None
    rc_given_r2: float | None
    ttc_given_joint: float | None
    rc_given_joint: float | None

    def rate_per_100(self, count: int) -> float:
        return 100.0 * count / self.n_episodes


def _mean(values):
    values = list(values)
    return None if not values else sum(values) / len(values)


def aggregate(records) -> MetricsSummary:
    records = list(records)
    if not records:
        raise ContractError("cannot aggregate zero episodes")
    r1 = [r for r in records if r.collided]
    r2 = [r for r in records if r.r2]
    joint = [r for r in records if r.collided and r.r2]
    inclusive = [r for r in records if r.r2 or r.collided]
    return MetricsSummary(
        n_episodes=len(records),
        v_r1=len(r1),
        v_r2=len(r2),
        v_r1_r2=len(joint),
        v_r2_inclusive=len(inclusive),
        ttc_given_r1=_mean(r.mean_ttc for r in r1),
        rc_given_r2=_mean(r.final_rc for r in r2),
        ttc_given_joint=_mean(r.mean_ttc for r in joint),
        rc_given_joint=_mean(r.final_rc for r in joint),
    )


METRIC_FIELDS = {
    "v_r1": lambda r: r.collided,
    "v_r2": lambda r: r.r2,
    "v_r1_r2": lambda r: r.collided and r.r2,
    "v_r2_inclusive": lambda r: r.r2 or r.collided,
}


@dataclass
class ComparisonResult:
    metric: str
    table: ContingencyTable
    p_value: float
    odds_ratio: float | None
    significance: str


def compare(records_a, records_b, metric: str) -> ComparisonResult:
    """Fisher + odds ratio for one violation metric, method A vs B."""
    if metric not in METRIC_FIELDS:
        raise ContractError(f"unknown metric {metric!r}; choose from {sorted(METRIC_FIELDS)}")
    pred = METRIC_FIELDS[metric]
    records_a, records_b = list(records_a), list(records_b)
    table = contingency_from_counts(
        sum(1 for r in records_a if pred(r)), len(records_a),
        sum(1 for r in records_b if pred(r)), len(records_b),
    )
    p = fisher_exact_two_sided(table)
    return ComparisonResult(metric, table, p, odds_ratio(table), significance_bucket(p))
