"""Pairwise preference machinery: relative ranking vectors, alignment,
misalignment, the majority-margin comparison graph, and topological sorting.

Everything here is a pure function of immutable inputs, so callers may
evaluate pairs and profiles concurrently.
"""

from __future__ import annotations

import io
import csv
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from typing import Mapping

from .ballots import CandidateRoster, Profile, Ranking
from .formatting import decimal_str

__all__ = [
    "AlignmentValue",
    "PairwiseGraph",
    "RelativeRankingVector",
    "alignment",
    "build_pwcg",
    "misalignment",
    "relative_vector",
    "topological_sort",
]

AlignmentValue = Fraction

HALF = Fraction(1, 2)


@dataclass(frozen=True)
class RelativeRankingVector:
    """Per-ballot comparison of one ordered candidate pair.

    Each entry is (value, weight) with value 1 when the ballot ranks the
    first candidate above the second, 1/2 when it leaves both unranked, and
    0 otherwise.
    """

    pair: tuple[str, str]
    entries: tuple[tuple[Fraction, Fraction], ...]

    def l1(self) -> Fraction:
        """Weighted entry sum ||X_{a,b}||_1."""
        return sum((v * w for v, w in self.entries), Fraction(0))


def _pair_value(ballot_ranking: tuple[str, ...], a: str, b: str) -> Fraction:
    try:
        pa = ballot_ranking.index(a)
    except ValueError:
        pa = None
    try:
        pb = ballot_ranking.index(b)
    except ValueError:
        pb = None
    if pa is None and pb is None:
        return HALF
    if pb is None or (pa is not None and pa < pb):
        return Fraction(1)
    return Fraction(0)


def relative_vector(profile: Profile, a: str, b: str) -> RelativeRankingVector:
    """Relative ranking vector of (a, b): one entry per ballot, in order."""
    if a == b:
        raise ValueError("relative vector needs two distinct candidates")
    profile.roster.index(a)
    profile.roster.index(b)
    entries = tuple((_pair_value(ballot.ranking, a, b), ballot.weight)
                    for ballot in profile.ballots)
    return RelativeRankingVector((a, b), entries)


def alignment(profile: Profile, outcome: Ranking, a: str, b: str) -> Fraction:
    """Share of voters ordering (a, b) the way `outcome` does, ties as half."""
    if a == b:
        raise ValueError("alignment needs two distinct candidates")
    if outcome.above(a, b):
        return profile.pair_tally(a, b) / profile.n
    return profile.pair_tally(b, a) / profile.n


def misalignment(profile: Profile, outcome: Ranking) -> Fraction:
    """Worst pairwise alignment of the outcome over all candidate pairs."""
    roster = profile.roster
    if len(roster) < 2:
        raise ValueError("misalignment is undefined for fewer than 2 candidates")
    tallies = profile.double_tallies
    denom, _, _ = profile._scaled
    n2 = 2 * denom * profile.n
    worst = Fraction(1)
    for ia, ib in combinations(range(len(roster)), 2):
        a, b = roster.names[ia], roster.names[ib]
        if outcome.above(a, b):
            value = Fraction(int(tallies[ia, ib])) / n2
        else:
            value = Fraction(int(tallies[ib, ia])) / n2
        if value < worst:
            worst = value
    return worst


@dataclass(frozen=True)
class PairwiseGraph:
    """Directed majority-margin graph over a roster.

    `edges[(a, b)]` is the strictly positive margin by which voters prefer a
    to b; exactly tied pairs carry no edge in either direction.  The voter
    count n is kept because margin-to-alignment conversion needs it.
    """

    roster: CandidateRoster
    n: Fraction
    edges: Mapping[tuple[str, str], Fraction]

    def margin(self, a: str, b: str) -> Fraction:
        """Signed margin of a over b (negative when b beats a, 0 on ties)."""
        if (a, b) in self.edges:
            return self.edges[(a, b)]
        if (b, a) in self.edges:
            return -self.edges[(b, a)]
        self.roster.index(a)
        self.roster.index(b)
        return Fraction(0)

    def to_edge_csv(self) -> str:
        """Edge list as `from,to,weight` CSV for external graph tooling."""
        out = io.StringIO()
        writer = csv.writer(out, lineterminator="\n")
        writer.writerow(["from", "to", "weight"])
        index = self.roster.index
        for (a, b) in sorted(self.edges, key=lambda e: (index(e[0]), index(e[1]))):
            writer.writerow([a, b, decimal_str(self.edges[(a, b)])])
        return out.getvalue()


def build_pwcg(profile: Profile) -> PairwiseGraph:
    """Pairwise comparison graph: an edge toward the loser of each majority."""
    roster = profile.roster
    tallies = profile.double_tallies
    denom, _, _ = profile._scaled
    edges: dict[tuple[str, str], Fraction] = {}
    for ia, ib in combinations(range(len(roster)), 2):
        diff = int(tallies[ia, ib]) - int(tallies[ib, ia])
        if diff > 0:
            edges[(roster.names[ia], roster.names[ib])] = Fraction(diff, 2 * denom)
        elif diff < 0:
            edges[(roster.names[ib], roster.names[ia])] = Fraction(-diff, 2 * denom)
    return PairwiseGraph(roster, profile.n, edges)


def topological_sort(graph: PairwiseGraph) -> Ranking | None:
    """Kahn's algorithm with canonical-order tie-breaking.

    Returns a complete ranking consistent with every edge, choosing the
    earliest candidate in canonical order whenever several are available, or
    None when the edge set contains a directed cycle.
    """
    return _kahn(graph.roster, graph.edges.keys())


def _kahn(roster: CandidateRoster, edge_pairs) -> Ranking | None:
    names = roster.names
    indegree = {name: 0 for name in names}
    successors: dict[str, list[str]] = {name: [] for name in names}
    for a, b in edge_pairs:
        indegree[b] += 1
        successors[a].append(b)
    remaining = set(names)
    order: list[str] = []
    while remaining:
        ready = next((name for name in names
                      if name in remaining and indegree[name] == 0), None)
        if ready is None:
            return None
        remaining.discard(ready)
        order.append(ready)
        for succ in successors[ready]:
            indegree[succ] -= 1
    return Ranking(tuple(order))
