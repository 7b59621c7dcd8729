"""Accuracy aggregation and the statistical summaries used in reports.

Implements exact Clopper-Pearson binomial confidence intervals, Pearson
correlation with a two-sided t-approximation p-value, the exact two-sided
binomial test, and 2x2 odds ratios with a Haldane-Anscombe correction and
a Wald interval on the log scale (the report-level substitute for
trial-level logistic regressions).
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Callable, Iterable, Optional, Sequence, Union

import numpy as np
from scipy import stats as sps

logger = logging.getLogger(__name__)


class DomainError(ValueError):
    pass


class DegenerateInput(ValueError):
    pass


def binomial_ci(k: int, n: int, level: float = 0.95) -> tuple[float, float]:
    """Exact (Clopper-Pearson) confidence interval for a binomial proportion.

    Bounds invert the binomial CDF tails, computed through the standard
    beta-quantile form; lo is 0 when k = 0 and hi is 1 when k = n.
    """
    if n < 1 or not 0 <= k <= n:
        raise DomainError(f"need 0 <= k <= n, n >= 1; got k={k}, n={n}")
    if not 0 < level < 1:
        raise DomainError(f"confidence level must be in (0,1); got {level}")
    alpha = 1.0 - level
    lo = 0.0 if k == 0 else float(sps.beta.ppf(alpha / 2, k, n - k + 1))
    hi = 1.0 if k == n else float(sps.beta.ppf(1 - alpha / 2, k + 1, n - k))
    return lo, hi


def binomial_test(k: int, n: int, p0: float = 0.5) -> float:
    """Exact two-sided binomial test: sum of all outcome probabilities
    no larger than the observed outcome's probability."""
    if n < 1 or not 0 <= k <= n:
        raise DomainError(f"need 0 <= k <= n, n >= 1; got k={k}, n={n}")
    if not 0 < p0 < 1:
        raise DomainError(f"null probability must be in (0,1); got {p0}")
    if p0 == 0.5:
        # probabilities are proportional to binomial coefficients: compare
        # exactly in integers, then sum the included terms at float scale
        observed = math.comb(n, k)
        total = sum(math.comb(n, i) for i in range(n + 1) if math.comb(n, i) <= observed)
        return min(1.0, total * 0.5**n)
    log_pmf = [
        math.lgamma(n + 1) - math.lgamma(i + 1) - math.lgamma(n - i + 1)
        + i * math.log(p0) + (n - i) * math.log1p(-p0)
        for i in range(n + 1)
    ]
    cutoff = log_pmf[k] + 1e-9
    return min(1.0, float(sum(math.exp(lp) for lp in log_pmf if lp <= cutoff)))


def pearson_r(xs: Sequence[float], ys: Sequence[float]) -> dict:
    """Product-moment correlation with two-sided p from the t approximation."""
    x = np.asarray(xs, dtype=float)
    y = np.asarray(ys, dtype=float)
    if x.shape != y.shape or x.ndim != 1 or len(x) < 3:
        raise DomainError("need two equal-length vectors with at least 3 points")
    xc = x - x.mean()
    yc = y - y.mean()
    denom = math.sqrt(float(xc @ xc) * float(yc @ yc))
    if denom == 0.0:
        raise DegenerateInput("zero variance in at least one input")
    r = float(xc @ yc) / denom
    r = max(-1.0, min(1.0, r))
    n = len(x)
    if abs(r) == 1.0:
        p = 0.0
    else:
        t = r * math.sqrt((n - 2) / (1 - r * r))
        p = 2.0 * float(sps.t.sf(abs(t), n - 2))
    return {"r": r, "p": p, "n": n}


@dataclass(frozen=True)
class OddsRatioResult:
    table: tuple[tuple[float, float], tuple[float, float]]
    odds_ratio: float
    ci95: tuple[float, float]
    continuity_corrected: bool


def odds_ratio_2x2(a: float, b: float, c: float, d: float, level: float = 0.95) -> OddsRatioResult:
    """Odds ratio (a*d)/(b*c) with Haldane-Anscombe +0.5 on zero cells and
    a Wald interval on the log scale."""
    if min(a, b, c, d) < 0:
        raise DomainError("counts must be nonnegative")
    corrected = 0 in (a, b, c, d)
    if corrected:
        a, b, c, d = a + 0.5, b + 0.5, c + 0.5, d + 0.5
    or_value = (a * d) / (b * c)
    se = math.sqrt(1 / a + 1 / b + 1 / c + 1 / d)
    z = float(sps.norm.ppf(0.5 + level / 2))
    log_or = math.log(or_value)
    ci = (math.exp(log_or - z * se), math.exp(log_or + z * se))
    return OddsRatioResult(
        table=((a, b), (c, d)), odds_ratio=or_value, ci95=ci, continuity_corrected=corrected
    )


@dataclass(frozen=True)
class AccuracyRow:
    group: str
    successes: int
    trials: int
    accuracy: float
    ci95: tuple[float, float]


@dataclass
class AccuracyTable:
    grouping: str
    rows: list[AccuracyRow]

    def to_csv(self) -> str:
        lines = ["group,successes,trials,accuracy,ci_lo,ci_hi"]
        for r in self.rows:
            lines.append(
                f"{r.group},{r.successes},{r.trials},{r.accuracy:.6f},{r.ci95[0]:.6f},{r.ci95[1]:.6f}"
            )
        return "\n".join(lines) + "\n"

    def to_json_rows(self) -> list[dict]:
        return [
            {
                "group": r.group,
                "successes": r.successes,
                "trials": r.trials,
                "accuracy": r.accuracy,
                "ci95": list(r.ci95),
            }
            for r in self.rows
        ]


GroupKey = Union[str, Callable[[dict], Optional[str]]]


def summarize(records: Iterable[dict], grouping: GroupKey = "subtype") -> AccuracyTable:
    """Per-group successes, trials, accuracy, and exact 95% intervals.

    grouping is a record field name or a callable; records with no group
    value are dropped with a warning.
    """
    key = grouping if callable(grouping) else (lambda rec: rec.get(grouping))
    counts: dict[str, list[int]] = {}
    dropped = 0
    for rec in records:
        group = key(rec)
        if group is None:
            dropped += 1
            continue
        entry = counts.setdefault(str(group), [0, 0])
        entry[0] += 1 if rec.get("correct") else 0
        entry[1] += 1
    if dropped:
        logger.warning("summarize: dropped %d records with no group value", dropped)
    if not counts:
        raise DomainError("no records to summarize")
    rows = [
        AccuracyRow(group=g, successes=k, trials=n, accuracy=k / n, ci95=binomial_ci(k, n))
        for g, (k, n) in sorted(counts.items())
    ]
    name = grouping if isinstance(grouping, str) else getattr(grouping, "__name__", "custom")
    return AccuracyTable(grouping=name, rows=rows)
