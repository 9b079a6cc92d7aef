"""Greedy majority-alignment optimizer and its exhaustive oracle.

The greedy rule builds the majority-margin graph and, while no topological
sort exists, deletes every edge of the current minimum weight, then sorts.
The resulting ranking attains the best possible sigma_u on every profile;
`brute_force_optimal` verifies that claim by enumeration on small rosters.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations, permutations

from .ballots import Profile, Ranking
from .metrics import sigma_from_misalignment
from .pairwise import PairwiseGraph, _kahn, build_pwcg
from .rules import VotingRule

__all__ = [
    "DisagreementSet",
    "alignment_from_margin",
    "brute_force_optimal",
    "disagreement_set",
    "optimal_u_ranking",
    "optimal_u_rule",
    "sigma_u_via_margins",
]


@dataclass(frozen=True)
class DisagreementSet:
    """Candidate pairs whose majority edge points against a given ranking."""

    pairs: frozenset[tuple[str, str]]
    max_disagreeing_margin: Fraction | None

    def __bool__(self) -> bool:
        return bool(self.pairs)


def disagreement_set(graph: PairwiseGraph, ranking: Ranking) -> DisagreementSet:
    """Pairs where `ranking` contradicts an edge of the margin graph.

    Pairs are stored with the graph winner first; a pair is present exactly
    when the ranking puts the graph loser above the graph winner.
    """
    worst: Fraction | None = None
    pairs = set()
    for (a, b), weight in graph.edges.items():
        if ranking.above(b, a):
            pairs.add((a, b))
            if worst is None or weight > worst:
                worst = weight
    return DisagreementSet(frozenset(pairs), worst)


def alignment_from_margin(delta: Fraction, n: Fraction) -> Fraction:
    """Alignment of the losing side of a margin-delta pair: 1/2 - delta/(2n)."""
    return Fraction(1, 2) - Fraction(delta, 2 * n)


def sigma_u_via_margins(graph: PairwiseGraph, ranking: Ranking) -> Fraction:
    """sigma_u from the margin graph alone: 1 when nothing disagrees, else
    the alignment transform of the worst disagreeing margin."""
    disagreement = disagreement_set(graph, ranking)
    if not disagreement:
        return Fraction(1)
    worst = disagreement.max_disagreeing_margin
    return sigma_from_misalignment(alignment_from_margin(worst, graph.n))


def optimal_u_ranking(profile: Profile) -> Ranking:
    """Greedy rule: drop all minimum-weight edges until a sort exists.

    Each round deletes every remaining edge of the current smallest weight,
    so the loop runs at most once per distinct edge weight and always
    terminates (an edgeless graph sorts trivially).  The surviving graph's
    canonical topological sort is returned.
    """
    graph = build_pwcg(profile)
    edges = dict(graph.edges)
    while True:
        ranking = _kahn(profile.roster, edges.keys())
        if ranking is not None:
            return ranking
        cutoff = min(edges.values())
        edges = {pair: w for pair, w in edges.items() if w != cutoff}


def optimal_u_rule() -> VotingRule:
    """The greedy optimizer packaged as a registry rule named `optimal-u`."""
    return VotingRule("optimal-u", optimal_u_ranking)


def brute_force_optimal(profile: Profile,
                        max_candidates: int = 8) -> tuple[Ranking, Fraction]:
    """Enumerate all rankings and return a sigma_u maximizer with its value.

    Ties go to the first maximizer in lexicographic canonical order.  Guarded
    to small rosters: the enumeration is factorial in the candidate count.
    """
    roster = profile.roster
    m = len(roster)
    if m > max_candidates:
        raise ValueError(
            f"brute force limited to {max_candidates} candidates, got {m}")
    tallies = profile.double_tallies
    denom, _, _ = profile._scaled
    n2 = 2 * denom * profile.n

    best_perm: tuple[int, ...] | None = None
    best_value: Fraction | None = None
    index_pairs = list(combinations(range(m), 2))
    for perm in permutations(range(m)):
        position = [0] * m
        for pos, c in enumerate(perm):
            position[c] = pos
        worst = Fraction(1)
        for a, b in index_pairs:
            if position[a] < position[b]:
                value = Fraction(int(tallies[a, b])) / n2
            else:
                value = Fraction(int(tallies[b, a])) / n2
            if value < worst:
                worst = value
        value = sigma_from_misalignment(worst)
        if best_value is None or value > best_value:
            best_value = value
            best_perm = perm
    assert best_perm is not None and best_value is not None
    return Ranking(tuple(roster.names[i] for i in best_perm)), best_value
