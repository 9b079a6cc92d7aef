"""Deterministic voting rules: positional scoring rules, single transferable
vote, and the dictatorship / reversal fixtures used in axiom tests.

Every rule maps a Profile to a complete tie-free Ranking.  All ties are
broken by canonical (roster) order so that repeated evaluation is exact and
reproducible; fractional STV transfers use exact rationals.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np

from .ballots import Profile, Ranking

__all__ = [
    "DEFAULT_RULE_SPECS",
    "RuleConfigError",
    "ScoreVector",
    "StvConfig",
    "VotingRule",
    "borda",
    "dictatorship",
    "k_approval",
    "plurality",
    "positional_scores",
    "resolve_rule",
    "resolve_rules",
    "reversal_of",
    "scoring_rule",
    "stv",
]


class RuleConfigError(ValueError):
    """A rule was configured outside its valid parameter range."""


class VotingRule:
    """A named, pure Profile -> Ranking map with canonical tie-breaking."""

    def __init__(self, name: str, evaluate: Callable[[Profile], Ranking],
                 tiebreak: str = "canonical-order"):
        self.name = name
        self._evaluate = evaluate
        self.tiebreak = tiebreak

    def __call__(self, profile: Profile) -> Ranking:
        return self._evaluate(profile)

    def __repr__(self) -> str:
        return f"VotingRule({self.name!r})"


@dataclass(frozen=True)
class ScoreVector:
    """Positional scores, best position first; unranked candidates score 0.

    At evaluation time the vector is truncated or zero-padded to the roster
    size, so one vector works across condensed profiles.
    """

    scores: tuple[Fraction, ...]

    def for_size(self, m: int) -> tuple[Fraction, ...]:
        padded = self.scores[:m] + (Fraction(0),) * max(0, m - len(self.scores))
        return padded


def positional_scores(profile: Profile, vector: Sequence[Fraction]) -> list[Fraction]:
    """Total positional score per roster candidate, in roster order."""
    m = len(profile.roster)
    vec = list(vector)[:m] + [Fraction(0)] * max(0, m - len(vector))
    denom, weights, positions = profile._scaled
    score_denom = 1
    for s in vec:
        f = Fraction(s)
        score_denom = score_denom * f.denominator // math.gcd(score_denom, f.denominator)
    svec = np.array([int(Fraction(s) * score_denom) for s in vec] + [0],
                    dtype=np.int64)
    bound = int(weights.sum()) * (int(np.abs(svec).max()) + 1)
    if bound < 2**62:
        raw = (weights[:, None] * svec[positions]).sum(axis=0)
        return [Fraction(int(v), denom * score_denom) for v in raw]
    totals = [Fraction(0)] * m  # big-number fallback, exactness over speed
    names = profile.roster.names
    for key, w in profile.grouped:
        for pos, c in enumerate(key):
            if pos < m:
                totals[c] += w * Fraction(vec[pos])
    return totals


def _rank_by_score(profile: Profile, scores: Sequence[Fraction]) -> Ranking:
    names = profile.roster.names
    order = sorted(range(len(names)), key=lambda i: (_neg(scores[i]), i))
    return Ranking(tuple(names[i] for i in order))


def _neg(x: Fraction) -> Fraction:
    return -x


def scoring_rule(name: str, vector: ScoreVector | Sequence) -> VotingRule:
    """Rule ranking candidates by descending total positional score."""
    sv = vector if isinstance(vector, ScoreVector) else ScoreVector(
        tuple(Fraction(s) for s in vector))

    def evaluate(profile: Profile) -> Ranking:
        scores = positional_scores(profile, sv.for_size(len(profile.roster)))
        return _rank_by_score(profile, scores)

    return VotingRule(name, evaluate)


def borda() -> VotingRule:
    """Linear scoring: first place scores m, last place 1, unranked 0."""

    def evaluate(profile: Profile) -> Ranking:
        m = len(profile.roster)
        vec = [Fraction(m - i) for i in range(m)]
        return _rank_by_score(profile, positional_scores(profile, vec))

    return VotingRule("borda", evaluate)


def k_approval(k: int) -> VotingRule:
    """Each of the top k listed choices gets one point."""
    if k < 1:
        raise RuleConfigError("k-approval needs k >= 1")
    return scoring_rule(f"{k}-approval", [1] * k)


def plurality() -> VotingRule:
    """Only the first choice gets a point (1-approval)."""
    return scoring_rule("plurality", [1])


@dataclass(frozen=True)
class StvConfig:
    """Seat count and election quota for STV (default: Droop, n/(seats+1))."""

    seats: int
    quota: Fraction | None = None


def stv(seats: int | StvConfig, quota: Fraction | None = None) -> VotingRule:
    """Single transferable vote for k seats, reported as a full ranking.

    Rounds: while seats remain, elect the candidate with the largest
    first-place support strictly above quota (transferring each supporting
    ballot at the fractional surplus weight), otherwise eliminate the
    lowest-support candidate (latest in canonical order on ties) at full
    weight.  The output lists elected candidates in order of election, then
    still-standing candidates by final first-place support, then eliminated
    candidates bottom-up.
    """
    cfg = seats if isinstance(seats, StvConfig) else StvConfig(seats, quota)

    def evaluate(profile: Profile) -> Ranking:
        return _run_stv(profile, cfg)

    return VotingRule(f"stv:k={cfg.seats}", evaluate)


def _run_stv(profile: Profile, cfg: StvConfig) -> Ranking:
    names = profile.roster.names
    m = len(names)
    if not 1 <= cfg.seats < m:
        raise RuleConfigError(
            f"stv needs 1 <= seats < {m} candidates, got seats={cfg.seats}")
    quota = cfg.quota if cfg.quota is not None else profile.n / (cfg.seats + 1)
    quota_num, quota_den = quota.numerator, quota.denominator

    # All ballot weights are kept as integers over one shared denominator,
    # which absorbs each surplus-transfer factor exactly; only integers are
    # ever compared or summed (value of type t is weights[t] / denom).
    denom = 1
    for _, weight in profile.grouped:
        denom = denom * weight.denominator // math.gcd(denom, weight.denominator)
    pool = [[key, int(weight * denom), 0] for key, weight in profile.grouped]
    standing = set(range(m))
    elected: list[int] = []
    eliminated: list[int] = []

    def first_place_support() -> dict[int, int]:
        support = dict.fromkeys(standing, 0)
        for entry in pool:
            key, weight, cursor = entry
            while cursor < len(key) and key[cursor] not in standing:
                cursor += 1
            entry[2] = cursor
            if cursor < len(key) and weight > 0:
                support[key[cursor]] += weight
        return support

    support = first_place_support()
    while standing and len(elected) < cfg.seats:
        quota_scaled = quota_num * denom  # compare s/denom > quota exactly
        over = [c for c in standing if support[c] * quota_den > quota_scaled]
        if over:
            winner = max(over, key=lambda c: (support[c], -c))
            # transfer factor (s - q)/s: winners' ballots scale by the
            # numerator, everyone else by the denominator s*quota_den
            keep = support[winner] * quota_den - quota_scaled
            scale = support[winner] * quota_den
            for entry in pool:
                key, _, cursor = entry
                if cursor < len(key) and key[cursor] == winner:
                    entry[1] *= keep
                else:
                    entry[1] *= scale
            denom *= scale
            standing.discard(winner)
            elected.append(winner)
        else:
            loser = min(standing, key=lambda c: (support[c], -c))
            standing.discard(loser)
            eliminated.append(loser)
        support = first_place_support()

    middle = sorted(standing, key=lambda c: (-support[c], c))
    order = elected + middle + list(reversed(eliminated))
    return Ranking(tuple(names[i] for i in order))


def dictatorship(voter: int) -> VotingRule:
    """Returns one fixed voter's ballot, completed in canonical order.

    The voter index addresses the weight-expanded voter list, so it stays
    valid on condensed profiles (condensation keeps ballot order and weights).
    """
    if voter < 0:
        raise RuleConfigError("voter index must be nonnegative")

    def evaluate(profile: Profile) -> Ranking:
        if voter >= profile.n:
            raise RuleConfigError(
                f"dictator index {voter} outside 0..{profile.n - 1}")
        ballot = profile.voter_ballot(voter)
        listed = set(ballot.ranking)
        tail = tuple(c for c in profile.roster.names if c not in listed)
        return Ranking(ballot.ranking + tail)

    return VotingRule(f"dictator:i={voter}", evaluate)


def reversal_of(rule: VotingRule) -> VotingRule:
    """Evaluates `rule`, then reverses its output (axiom-failure fixture)."""
    return VotingRule(f"reversal({rule.name})",
                      lambda profile: rule(profile).reverse())


DEFAULT_RULE_SPECS = ("borda", "3-approval", "2-approval", "plurality", "stv",
                      "optimal-u")


def resolve_rule(spec: str, default_seats: int | None = None) -> VotingRule:
    """Build a rule from its registry name.

    Recognized: `borda`, `<k>-approval`, `plurality`, `stv` (seat count from
    profile metadata via `default_seats`), `stv:k=<int>`, `dictator:i=<int>`,
    `optimal-u`.
    """
    spec = spec.strip()
    if spec == "borda":
        return borda()
    if spec == "plurality":
        return plurality()
    if spec.endswith("-approval"):
        try:
            k = int(spec[: -len("-approval")])
        except ValueError:
            raise RuleConfigError(f"bad approval rule {spec!r}") from None
        return k_approval(k)
    if spec == "stv":
        if default_seats is None:
            raise RuleConfigError(
                "rule 'stv' needs a seat count (profile '# seats:' metadata "
                "or an explicit 'stv:k=<int>')")
        return stv(default_seats)
    if spec.startswith("stv:k="):
        try:
            return stv(int(spec[len("stv:k="):]))
        except ValueError:
            raise RuleConfigError(f"bad stv spec {spec!r}") from None
    if spec.startswith("dictator:i="):
        try:
            return dictatorship(int(spec[len("dictator:i="):]))
        except ValueError:
            raise RuleConfigError(f"bad dictator spec {spec!r}") from None
    if spec == "optimal-u":
        from .optimizer import optimal_u_rule

        return optimal_u_rule()
    raise RuleConfigError(f"unknown rule {spec!r}")


def resolve_rules(specs: Sequence[str],
                  default_seats: int | None = None) -> list[VotingRule]:
    return [resolve_rule(s, default_seats=default_seats) for s in specs]
