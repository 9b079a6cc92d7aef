import string

import numpy as np
import pytest
from hypothesis import strategies as st

from votemetrics import Ballot, CandidateRoster, Profile


def roster_of(m: int) -> CandidateRoster:
    return CandidateRoster(tuple(string.ascii_uppercase[:m]))


def random_profile(rng: np.random.Generator, m: int, n: int,
                   complete: bool = False, weights: bool = False) -> Profile:
    """Seeded random profile; mixed partial ballots unless complete=True."""
    roster = roster_of(m)
    ballots = []
    for _ in range(n):
        perm = rng.permutation(m)
        k = m if complete else int(rng.integers(0, m + 1))
        w = int(rng.integers(1, 4)) if weights else 1
        ballots.append(Ballot(tuple(roster.names[i] for i in perm[:k]), w))
    return Profile(roster, ballots)


@st.composite
def profiles_st(draw, min_m=2, max_m=5, min_n=1, max_n=8, complete=False):
    m = draw(st.integers(min_m, max_m))
    roster = roster_of(m)
    n = draw(st.integers(min_n, max_n))
    ballots = []
    for _ in range(n):
        perm = draw(st.permutations(list(roster.names)))
        k = m if complete else draw(st.integers(0, m))
        ballots.append(Ballot(tuple(perm[:k])))
    return Profile(roster, ballots)


@pytest.fixture
def cycle3() -> Profile:
    """The 3-voter Condorcet cycle A>B>C, B>C>A, C>A>B."""
    roster = roster_of(3)
    return Profile(roster, [Ballot(("A", "B", "C")), Ballot(("B", "C", "A")),
                            Ballot(("C", "A", "B"))])


@pytest.fixture
def spoiler7() -> Profile:
    """{3 x (A,B,C), 2 x (B,C,A), 2 x (C,B,A)}: plurality winner loses pairwise."""
    roster = roster_of(3)
    return Profile(roster, [Ballot(("A", "B", "C"), 3), Ballot(("B", "C", "A"), 2),
                            Ballot(("C", "B", "A"), 2)])
