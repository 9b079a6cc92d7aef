"""Relaxed-axiom scores for a (rule, profile) pair.

sigma_iia measures output stability under single-candidate removal via
Kendall (swap) distance; sigma_u transforms the worst pairwise alignment
into a majority-compliance score.  Both live in [0, 1] and are computed with
exact rational arithmetic.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from math import comb
from typing import Iterable, Mapping, Sequence

from .ballots import Profile, Ranking, RosterError
from .formatting import decimal_str
from .pairwise import misalignment
from .rules import VotingRule

__all__ = [
    "METRIC_CSV_HEADER",
    "MetricReport",
    "RuleEvaluationError",
    "evaluate_all",
    "reports_to_csv",
    "reports_to_json",
    "sigma_from_misalignment",
    "sigma_iia",
    "sigma_u",
    "swap_distance",
]

HALF = Fraction(1, 2)


class RuleEvaluationError(RuntimeError):
    """A rule failed while being scored; carries the rule name."""

    def __init__(self, rule_name: str, cause: Exception):
        self.rule_name = rule_name
        super().__init__(f"rule {rule_name!r}: {cause}")


def swap_distance(r1: Ranking, r2: Ranking) -> int:
    """Kendall tau distance: number of candidate pairs ordered oppositely."""
    if set(r1.order) != set(r2.order):
        raise RosterError("swap distance needs rankings over the same candidates")
    pos2 = {name: i for i, name in enumerate(r2.order)}
    seq = [pos2[name] for name in r1.order]
    return sum(1
               for i in range(len(seq))
               for j in range(i + 1, len(seq))
               if seq[i] > seq[j])


def sigma_iia(rule: VotingRule, profile: Profile,
              condensed: Mapping[str, Profile] | None = None
              ) -> tuple[Fraction, dict[str, int]]:
    """Removal-stability score and the per-candidate swap distances.

    Runs the rule on the profile and on each single-candidate condensation,
    sums the swap distances between `rule(P^C)` and `rule(P)` with C removed,
    and normalizes by the worst case m*C(m-1, 2).  With fewer than three
    candidates the normalizer vanishes and the score is defined as 1 (the
    condensed rankings are singletons, so no swap is possible).
    """
    m = len(profile.roster)
    if m <= 2:
        return Fraction(1), {}
    full = rule(profile)
    swaps: dict[str, int] = {}
    for name in profile.roster.names:
        reduced = condensed[name] if condensed is not None else profile.condense(name)
        swaps[name] = swap_distance(rule(reduced), full.without(name))
    total = sum(swaps.values())
    return Fraction(1) - Fraction(total, m * comb(m - 1, 2)), swaps


def sigma_from_misalignment(m_value: Fraction) -> Fraction:
    """Piecewise transform M -> M/(1-M), capped at 1 once M >= 1/2."""
    if m_value >= HALF:
        return Fraction(1)
    return m_value / (1 - m_value)


def sigma_u(rule: VotingRule, profile: Profile) -> tuple[Fraction, Fraction]:
    """Majority-alignment score and the raw worst alignment M.

    Zero exactly when the profile holds a unanimous preference that the
    rule's output reverses.
    """
    if len(profile.roster) < 2:
        raise ValueError("sigma_u needs at least 2 candidates")
    m_value = misalignment(profile, rule(profile))
    return sigma_from_misalignment(m_value), m_value


METRIC_CSV_HEADER = "election_id,rule,sigma_iia,sigma_u,m_value,n,m,seats"


@dataclass(frozen=True)
class MetricReport:
    """Scores of one rule on one profile, plus serialization context."""

    election_id: str
    rule: str
    sigma_iia: Fraction
    sigma_u: Fraction
    m_value: Fraction
    per_candidate_swaps: Mapping[str, int]
    ranking: tuple[str, ...]
    n: Fraction
    m: int
    seats: int | None = None

    def to_csv_row(self) -> str:
        seats = "" if self.seats is None else str(self.seats)
        return ",".join([
            self.election_id,
            self.rule,
            decimal_str(self.sigma_iia),
            decimal_str(self.sigma_u),
            decimal_str(self.m_value),
            decimal_str(self.n),
            str(self.m),
            seats,
        ])

    def to_json_obj(self) -> dict:
        return {
            "election_id": self.election_id,
            "rule": self.rule,
            "ranking": list(self.ranking),
            "sigma_iia": float(self.sigma_iia),
            "sigma_u": float(self.sigma_u),
            "m_value": float(self.m_value),
            "per_candidate_swaps": dict(self.per_candidate_swaps),
            "n": float(self.n),
            "m": self.m,
            "seats": self.seats,
        }


def evaluate_all(rules: Sequence[VotingRule], profile: Profile,
                 election_id: str = "", seats: int | None = None
                 ) -> list[MetricReport]:
    """One MetricReport per rule, ordered by rule name.

    Candidate condensations are computed once and shared across rules.
    Rule failures are re-raised with the failing rule's name attached.
    """
    reports: list[MetricReport] = []
    m = len(profile.roster)
    condensed = ({name: profile.condense(name) for name in profile.roster.names}
                 if m >= 3 else {})
    if seats is None:
        seats = profile.seats
    for rule in sorted(rules, key=lambda r: r.name):
        try:
            s_iia, swaps = sigma_iia(rule, profile, condensed=condensed)
            ranking = rule(profile)
            m_value = misalignment(profile, ranking)
            s_u = sigma_from_misalignment(m_value)
        except Exception as exc:  # noqa: BLE001 - attributed and re-raised
            raise RuleEvaluationError(rule.name, exc) from exc
        reports.append(MetricReport(
            election_id=election_id,
            rule=rule.name,
            sigma_iia=s_iia,
            sigma_u=s_u,
            m_value=m_value,
            per_candidate_swaps=swaps,
            ranking=ranking.order,
            n=profile.n,
            m=m,
            seats=seats,
        ))
    return reports


def reports_to_csv(reports: Iterable[MetricReport],
                   manifest_hash: str | None = None) -> str:
    lines = []
    if manifest_hash:
        lines.append(f"# manifest: {manifest_hash}")
    lines.append(METRIC_CSV_HEADER)
    lines.extend(report.to_csv_row() for report in reports)
    return "\n".join(lines) + "\n"


def reports_to_json(reports: Iterable[MetricReport],
                    manifest_hash: str | None = None) -> str:
    payload: dict = {"reports": [r.to_json_obj() for r in reports]}
    if manifest_hash:
        payload["manifest"] = manifest_hash
    return json.dumps(payload, indent=2, sort_keys=True) + "\n"
