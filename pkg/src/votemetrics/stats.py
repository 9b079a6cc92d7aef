"""Percentile bootstrap over voters, and corpus-level summary tables."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from .ballots import Profile
from .formatting import decimal_str
from .metrics import MetricReport, sigma_iia, sigma_u
from .rules import VotingRule

__all__ = [
    "BOOTSTRAP_CSV_HEADER",
    "BootstrapConfig",
    "IntervalEstimate",
    "aggregate_corpus",
    "bootstrap_metric",
    "intervals_to_csv",
]

METRICS = ("sigma_iia", "sigma_u")


@dataclass(frozen=True)
class BootstrapConfig:
    """Resample count, confidence level, and RNG seed."""

    resamples: int = 1000
    confidence: float = 0.95
    seed: int = 0

    def __post_init__(self):
        if self.resamples < 1:
            raise ValueError("resamples must be >= 1")
        if not 0 < self.confidence < 1:
            raise ValueError("confidence must be in (0, 1)")


@dataclass(frozen=True)
class IntervalEstimate:
    """Percentile bootstrap interval for one (rule, metric) pair."""

    rule: str
    metric: str
    mean: Fraction
    lo: Fraction
    hi: Fraction
    resamples: int
    confidence: float


def _nearest_rank(sorted_values: Sequence[Fraction], q: float) -> Fraction:
    """Nearest-rank percentile: the ceil(q*B)-th smallest value (1-based)."""
    rank = max(1, math.ceil(q * len(sorted_values)))
    return sorted_values[rank - 1]


def bootstrap_metric(profile: Profile, rule: VotingRule, metric: str,
                     cfg: BootstrapConfig) -> IntervalEstimate:
    """Resample voters with replacement and recompute the metric each time.

    Weights are respected by sampling from the weight-expanded voter
    multiset, which requires integer ballot weights.  The interval bounds
    are nearest-rank percentiles at (1 +/- confidence)/2; everything is
    deterministic for a fixed seed.
    """
    if metric not in METRICS:
        raise ValueError(f"unknown metric {metric!r}; expected one of {sorted(METRICS)}")
    if any(b.weight.denominator != 1 for b in profile.ballots):
        raise ValueError("bootstrap resampling needs integer ballot weights")
    n = int(profile.n)
    types = profile.grouped
    probabilities = np.array([float(w) / n for _, w in types])
    probabilities /= probabilities.sum()
    roster = profile.roster

    # Condensation maps are shared by every resample: original type t maps to
    # slot cond_map[t] of the removed-candidate type list.
    need_condensed = metric == "sigma_iia" and len(roster) >= 3
    condensations: dict[str, tuple] = {}
    if need_condensed:
        for removed_index, name in enumerate(roster.names):
            seen: dict[tuple[int, ...], int] = {}
            cond_map = np.empty(len(types), dtype=np.int64)
            for t, (key, _) in enumerate(types):
                reduced = tuple(c - (c > removed_index)
                                for c in key if c != removed_index)
                cond_map[t] = seen.setdefault(reduced, len(seen))
            ordered = sorted(seen, key=seen.get)
            condensed_roster = roster.without(name)
            condensations[name] = (ordered, cond_map, condensed_roster)

    rng = np.random.default_rng(cfg.seed)
    values: list[Fraction] = []
    for _ in range(cfg.resamples):
        counts = rng.multinomial(n, probabilities)
        grouped = tuple((key, Fraction(int(c)))
                        for (key, _), c in zip(types, counts) if c)
        resampled = Profile.from_grouped(roster, grouped, seats=profile.seats)
        if metric == "sigma_u":
            values.append(sigma_u(rule, resampled)[0])
            continue
        condensed = {}
        for name, (ordered, cond_map, condensed_roster) in condensations.items():
            cond_counts = np.bincount(cond_map, weights=counts,
                                      minlength=len(ordered)).astype(np.int64)
            cond_grouped = tuple(sorted(
                (key, Fraction(int(c)))
                for key, c in zip(ordered, cond_counts) if c))
            condensed[name] = Profile.from_grouped(
                condensed_roster, cond_grouped, seats=profile.seats)
        values.append(sigma_iia(rule, resampled,
                                condensed=condensed if need_condensed else None)[0])

    values.sort()
    lo_q = (1 - cfg.confidence) / 2
    return IntervalEstimate(
        rule=rule.name,
        metric=metric,
        mean=sum(values, Fraction(0)) / len(values),
        lo=_nearest_rank(values, lo_q),
        hi=_nearest_rank(values, 1 - lo_q),
        resamples=cfg.resamples,
        confidence=cfg.confidence,
    )


BOOTSTRAP_CSV_HEADER = "election_id,rule,metric,mean,lo,hi,B,confidence"


def intervals_to_csv(election_id: str, intervals: Iterable[IntervalEstimate],
                     manifest_hash: str | None = None) -> str:
    lines = []
    if manifest_hash:
        lines.append(f"# manifest: {manifest_hash}")
    lines.append(BOOTSTRAP_CSV_HEADER)
    for iv in intervals:
        lines.append(",".join([
            election_id,
            iv.rule,
            iv.metric,
            decimal_str(iv.mean),
            decimal_str(iv.lo),
            decimal_str(iv.hi),
            str(iv.resamples),
            decimal_str(Fraction(iv.confidence).limit_denominator(10**6)),
        ]))
    return "\n".join(lines) + "\n"


SUMMARY_FIELDS = ("count", "mean", "median", "q1", "q3", "min", "max")


def aggregate_corpus(reports: Iterable[MetricReport | dict],
                     group_by: Sequence[str]) -> list[dict]:
    """Per-group summary statistics of sigma_iia and sigma_u.

    `group_by` names MetricReport fields (e.g. `m`, `seats`, `rule`).  Rows
    come back sorted by group key; empty groups simply do not appear.
    Quartiles use linear interpolation (numpy convention).
    """
    groups: dict[tuple, dict[str, list[float]]] = {}
    for report in reports:
        get = (report.get if isinstance(report, dict)
               else lambda f, _r=report: getattr(_r, f))
        key = tuple(get(field) for field in group_by)
        bucket = groups.setdefault(key, {"sigma_iia": [], "sigma_u": []})
        bucket["sigma_iia"].append(float(get("sigma_iia")))
        bucket["sigma_u"].append(float(get("sigma_u")))
    rows: list[dict] = []
    for key in sorted(groups, key=lambda k: tuple(str(part) for part in k)):
        for metric in ("sigma_iia", "sigma_u"):
            data = np.array(groups[key][metric])
            row = dict(zip(group_by, key))
            row["metric"] = metric
            row["count"] = int(data.size)
            row["mean"] = float(data.mean())
            row["median"] = float(np.median(data))
            row["q1"] = float(np.percentile(data, 25))
            row["q3"] = float(np.percentile(data, 75))
            row["min"] = float(data.min())
            row["max"] = float(data.max())
            rows.append(row)
    return rows
