"""Candidate rosters, ranked ballots, preference profiles, and profile file I/O.

A profile is an immutable weighted multiset of (possibly partial) ranked
ballots over a fixed candidate roster.  Roster order doubles as the canonical
tie-break order used everywhere else in the package, so it is fixed at parse
time and preserved by candidate removal.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Iterator, Sequence

import numpy as np

__all__ = [
    "BallotError",
    "Ballot",
    "CandidateRoster",
    "Profile",
    "ProfileFormatError",
    "Ranking",
    "RosterError",
    "condense_profile",
    "condense_ranking",
    "detect_format",
    "parse_profile",
    "write_profile",
]

CANONICAL_CSV = "canonical_csv"
POSITION_COLUMNS_CSV = "position_columns_csv"


class RosterError(ValueError):
    """A candidate reference does not match the roster."""


class BallotError(ValueError):
    """A ballot violates validity rules (duplicate entries, bad weight)."""


class ProfileFormatError(ValueError):
    """A profile file cannot be parsed; carries a 1-based line number."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(message if line is None else f"line {line}: {message}")


def _as_weight(value) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, float):
        return Fraction(value).limit_denominator(10**12)
    return Fraction(value)


@dataclass(frozen=True)
class CandidateRoster:
    """Ordered distinct candidate identifiers.

    The list order is the canonical order: it is what every deterministic
    tie-break in this package falls back to.
    """

    names: tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "names", tuple(self.names))
        if not self.names:
            raise RosterError("roster must contain at least one candidate")
        if any(not name for name in self.names):
            raise RosterError("candidate identifiers must be non-empty")
        if len(set(self.names)) != len(self.names):
            raise RosterError("duplicate candidate identifier in roster")

    @cached_property
    def _positions(self) -> dict[str, int]:
        return {name: i for i, name in enumerate(self.names)}

    def index(self, name: str) -> int:
        try:
            return self._positions[name]
        except KeyError:
            raise RosterError(f"unknown candidate {name!r}") from None

    def without(self, name: str) -> "CandidateRoster":
        self.index(name)
        return CandidateRoster(tuple(c for c in self.names if c != name))

    def __len__(self) -> int:
        return len(self.names)

    def __iter__(self) -> Iterator[str]:
        return iter(self.names)

    def __contains__(self, name: object) -> bool:
        return name in self._positions


@dataclass(frozen=True)
class Ballot:
    """One voter's ranking of a subset of the roster, with a multiplicity.

    Candidates left off the ballot are read as mutually unranked below every
    listed one.  Weights are exact rationals so that identical ballots can be
    merged and fractional vote transfers stay exact.
    """

    ranking: tuple[str, ...] = ()
    weight: Fraction = Fraction(1)

    def __post_init__(self):
        object.__setattr__(self, "ranking", tuple(self.ranking))
        object.__setattr__(self, "weight", _as_weight(self.weight))
        if len(set(self.ranking)) != len(self.ranking):
            raise BallotError("candidate listed more than once on a ballot")
        if self.weight < 0:
            raise BallotError("ballot weight must be nonnegative")

    def without(self, name: str) -> "Ballot":
        return Ballot(tuple(c for c in self.ranking if c != name), self.weight)


@dataclass(frozen=True)
class Ranking:
    """A complete, tie-free ordering of a candidate set (best first)."""

    order: tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "order", tuple(self.order))
        if len(set(self.order)) != len(self.order):
            raise ValueError("ranking contains a repeated candidate")

    @cached_property
    def _positions(self) -> dict[str, int]:
        return {name: i for i, name in enumerate(self.order)}

    def position(self, name: str) -> int:
        try:
            return self._positions[name]
        except KeyError:
            raise RosterError(f"candidate {name!r} not in ranking") from None

    def above(self, a: str, b: str) -> bool:
        return self.position(a) < self.position(b)

    def without(self, name: str) -> "Ranking":
        self.position(name)
        return Ranking(tuple(c for c in self.order if c != name))

    def reverse(self) -> "Ranking":
        return Ranking(tuple(reversed(self.order)))

    def __len__(self) -> int:
        return len(self.order)

    def __iter__(self) -> Iterator[str]:
        return iter(self.order)

    def __contains__(self, name: object) -> bool:
        return name in self._positions


class Profile:
    """Immutable weighted multiset of ballots over a roster.

    Ballot order is preserved (it defines voter indexing for the dictatorship
    rule) but all counting is done on the aggregated form, where identical
    rankings are merged and weights summed.
    """

    def __init__(self, roster: CandidateRoster, ballots: Iterable[Ballot],
                 seats: int | None = None):
        self._roster = roster
        self._ballots = tuple(ballots)
        self._seats = seats
        for ballot in self._ballots:
            for name in ballot.ranking:
                roster.index(name)
        if sum((b.weight for b in self._ballots), Fraction(0)) <= 0:
            raise ValueError("profile must carry positive total voter weight")

    @classmethod
    def from_grouped(cls, roster: CandidateRoster,
                     grouped: "tuple[tuple[tuple[int, ...], Fraction], ...]",
                     seats: int | None = None) -> "Profile":
        """Trusted fast path: build a profile directly from aggregated types.

        `grouped` must already be validated (roster-index tuples, positive
        Fraction weights, sorted).  The per-voter ballot list is left empty,
        so voter indexing and condensation are unavailable; counting paths
        (scores, tallies, STV) work as usual.  Used by resampling loops.
        """
        profile = cls.__new__(cls)
        profile._roster = roster
        profile._ballots = ()
        profile._seats = seats
        profile.__dict__["grouped"] = grouped
        profile.__dict__["n"] = sum((w for _, w in grouped), Fraction(0))
        return profile

    @property
    def roster(self) -> CandidateRoster:
        return self._roster

    @property
    def ballots(self) -> tuple[Ballot, ...]:
        return self._ballots

    @property
    def seats(self) -> int | None:
        """Seat count from file metadata, if any (used by the STV default)."""
        return self._seats

    @cached_property
    def n(self) -> Fraction:
        """Total voter count (sum of ballot weights)."""
        return sum((b.weight for b in self._ballots), Fraction(0))

    @cached_property
    def grouped(self) -> tuple[tuple[tuple[int, ...], Fraction], ...]:
        """Aggregated ballots as (roster-index tuple, total weight), sorted."""
        acc: dict[tuple[int, ...], Fraction] = {}
        idx = self._roster.index
        for ballot in self._ballots:
            key = tuple(idx(c) for c in ballot.ranking)
            acc[key] = acc.get(key, Fraction(0)) + ballot.weight
        return tuple(sorted(acc.items()))

    @cached_property
    def _scaled(self) -> tuple[int, np.ndarray, np.ndarray]:
        """Integerized aggregate: (denominator D, weights*D, position matrix).

        positions[t, c] is the 0-based rank of candidate c on ballot type t,
        or m when unranked.  Exactness: every weight times D is an integer.
        """
        m = len(self._roster)
        types = self.grouped
        denom = 1
        for _, w in types:
            denom = denom * w.denominator // math.gcd(denom, w.denominator)
        weights = np.array([int(w * denom) for _, w in types], dtype=np.int64)
        positions = np.full((len(types), m), m, dtype=np.int16)
        for t, (key, _) in enumerate(types):
            for pos, c in enumerate(key):
                positions[t, c] = pos
        return denom, weights, positions

    @cached_property
    def double_tallies(self) -> np.ndarray:
        """Matrix of 2*D*||X_{a,b}||_1 as exact int64 (D = weight denominator).

        Entry (a, b) doubles the weighted count of voters ranking a over b,
        counting 1/2 for pairs the voter leaves entirely unranked.
        """
        denom, weights, positions = self._scaled
        if 2 * int(weights.sum()) * 1 >= 2**62:
            raise OverflowError("profile weights too large for exact tallies")
        less = positions[:, :, None] < positions[:, None, :]
        equal = positions[:, :, None] == positions[:, None, :]
        contrib = 2 * less.astype(np.int64) + equal.astype(np.int64)
        out = np.tensordot(weights, contrib, axes=1)
        np.fill_diagonal(out, 0)
        return out

    def pair_tally(self, a: str, b: str) -> Fraction:
        """||X_{a,b}||_1: weighted share-count of voters ranking a over b."""
        if a == b:
            raise ValueError("pair tally needs two distinct candidates")
        ia, ib = self._roster.index(a), self._roster.index(b)
        denom = self._scaled[0]
        return Fraction(int(self.double_tallies[ia, ib]), 2 * denom)

    def condense(self, name: str) -> "Profile":
        """Profile with one candidate disqualified; other orders and weights kept.

        Ballots that become empty are retained, so n is unchanged.
        """
        if len(self._roster) < 2:
            raise RosterError("cannot remove a candidate from a 1-candidate roster")
        self._roster.index(name)
        return Profile(self._roster.without(name),
                       (b.without(name) for b in self._ballots),
                       seats=self._seats)

    def voter_ballot(self, index) -> Ballot:
        """Ballot of voter `index` in the weight-expanded voter list."""
        if index < 0 or index >= self.n:
            raise IndexError(f"voter index {index} outside [0, {self.n})")
        acc = Fraction(0)
        for ballot in self._ballots:
            acc += ballot.weight
            if acc > index:
                return ballot
        raise IndexError(f"voter index {index} outside [0, {self.n})")

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Profile):
            return NotImplemented
        return self._roster == other._roster and self.grouped == other.grouped

    __hash__ = None  # type: ignore[assignment]

    def __repr__(self) -> str:
        return (f"Profile(m={len(self._roster)}, n={self.n}, "
                f"types={len(self.grouped)})")


def condense_profile(profile: Profile, candidate: str) -> Profile:
    """Remove one candidate from a profile, preserving all other orderings."""
    return profile.condense(candidate)


def condense_ranking(ranking: Ranking, candidate: str) -> Ranking:
    """Remove one candidate from a ranking, preserving the rest of the order."""
    return ranking.without(candidate)


# ---------------------------------------------------------------------------
# File formats.
#
# canonical_csv:
#     # candidates: A,B,C
#     # seats: 3            (optional)
#     weight,ranking
#     3,A>B>C
#     1,
#
# position_columns_csv (public Scottish-dataset layout):
#     # candidates: A,B,C
#     # seats: 3            (optional)
#     count,rank1,rank2,rank3
#     12,B,A,
# Blank rank cells mean the ballot is truncated from that position on.
# ---------------------------------------------------------------------------


def _decode(source) -> str:
    if isinstance(source, bytes):
        return source.decode("utf-8")
    if isinstance(source, str):
        return source
    data = source.read()
    return data.decode("utf-8") if isinstance(data, bytes) else data


def detect_format(source) -> str:
    """Guess the profile format from the first non-comment line."""
    for line in _decode(source).splitlines():
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        head = [cell.strip().lower() for cell in stripped.split(",")]
        if head[:2] == ["weight", "ranking"]:
            return CANONICAL_CSV
        if head and head[0] == "count":
            return POSITION_COLUMNS_CSV
        break
    raise ProfileFormatError("unrecognized profile header")


def parse_profile(source, fmt: str | None = None) -> Profile:
    """Parse a profile file (bytes, text, or handle) in the declared format."""
    text = _decode(source)
    if fmt is None:
        fmt = detect_format(text)
    if fmt not in (CANONICAL_CSV, POSITION_COLUMNS_CSV):
        raise ProfileFormatError(f"unknown profile format {fmt!r}")

    roster: CandidateRoster | None = None
    seats: int | None = None
    header_seen = False
    ballots: list[Ballot] = []

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            body = line[1:].strip()
            if body.lower().startswith("candidates:"):
                names = [c.strip() for c in body.split(":", 1)[1].split(",")]
                names = [c for c in names if c]
                if roster is not None:
                    raise ProfileFormatError("duplicate candidates line", lineno)
                try:
                    roster = CandidateRoster(tuple(names))
                except RosterError as exc:
                    raise ProfileFormatError(str(exc), lineno) from exc
            elif body.lower().startswith("seats:"):
                try:
                    seats = int(body.split(":", 1)[1].strip())
                except ValueError as exc:
                    raise ProfileFormatError("seats must be an integer", lineno) from exc
            continue
        if not header_seen:
            if roster is None:
                raise ProfileFormatError(
                    "missing '# candidates:' line before the header", lineno)
            header_seen = True
            continue
        try:
            cells = next(csv.reader(io.StringIO(raw)))
        except StopIteration:  # pragma: no cover - blank handled above
            continue
        if fmt == CANONICAL_CSV:
            ballots.append(_parse_canonical_row(cells, roster, lineno))
        else:
            ballots.append(_parse_position_row(cells, roster, lineno))

    if roster is None:
        raise ProfileFormatError("missing '# candidates:' line")
    if not header_seen:
        raise ProfileFormatError("missing column header line")
    if not ballots:
        raise ProfileFormatError("profile contains no ballots")
    return Profile(roster, ballots, seats=seats)


def _parse_weight(cell: str, lineno: int) -> Fraction:
    try:
        weight = Fraction(cell.strip())
    except (ValueError, ZeroDivisionError) as exc:
        raise ProfileFormatError(f"bad weight {cell!r}", lineno) from exc
    if weight <= 0:
        raise ProfileFormatError(f"weight must be positive, got {cell!r}", lineno)
    return weight


def _checked_ballot(names: Sequence[str], weight: Fraction,
                    roster: CandidateRoster, lineno: int) -> Ballot:
    seen = set()
    for name in names:
        if name not in roster:
            raise RosterError(f"line {lineno}: unknown candidate {name!r}")
        if name in seen:
            raise BallotError(f"line {lineno}: candidate {name!r} listed twice")
        seen.add(name)
    return Ballot(tuple(names), weight)


def _parse_canonical_row(cells: list[str], roster: CandidateRoster,
                         lineno: int) -> Ballot:
    if not cells or len(cells) > 2:
        raise ProfileFormatError("expected 'weight,ranking'", lineno)
    weight = _parse_weight(cells[0], lineno)
    ranking_cell = cells[1].strip() if len(cells) == 2 else ""
    names = [c.strip() for c in ranking_cell.split(">")] if ranking_cell else []
    return _checked_ballot(names, weight, roster, lineno)


def _parse_position_row(cells: list[str], roster: CandidateRoster,
                        lineno: int) -> Ballot:
    if not cells:
        raise ProfileFormatError("empty row", lineno)
    weight = _parse_weight(cells[0], lineno)
    names: list[str] = []
    truncated = False
    for cell in cells[1:]:
        name = cell.strip()
        if not name:
            truncated = True
            continue
        if truncated:
            raise BallotError(
                f"line {lineno}: ranked cell after a blank cell")
        names.append(name)
    return _checked_ballot(names, weight, roster, lineno)


def write_profile(profile: Profile) -> str:
    """Serialize to canonical_csv; parsing it back gives an equal profile."""
    out = io.StringIO()
    out.write("# candidates: " + ",".join(profile.roster.names) + "\n")
    if profile.seats is not None:
        out.write(f"# seats: {profile.seats}\n")
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(["weight", "ranking"])
    names = profile.roster.names
    for key, weight in profile.grouped:
        ranking = ">".join(names[i] for i in key)
        writer.writerow([str(weight), ranking])
    return out.getvalue()
