"""Synthetic profile generation from a Bradley-Terry ranking model.

Latent candidate strengths are drawn from a symmetric Dirichlet; a ranking's
probability is proportional to the product of pairwise win probabilities
s_i/(s_i+s_j) over all pairs it orders.  Small candidate sets are sampled by
exact enumeration of all m! rankings; larger ones by a Metropolis chain over
adjacent transpositions.  Everything is deterministic given the seed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from fractions import Fraction
from itertools import permutations
from string import ascii_uppercase
from typing import Iterator, Sequence

import numpy as np

from .ballots import Ballot, CandidateRoster, Profile
from .metrics import MetricReport, evaluate_all
from .rules import VotingRule

__all__ = [
    "BtConfig",
    "bt_ranking_weight",
    "default_roster",
    "enumerate_distribution",
    "experiment_rows_to_csv",
    "generate_profiles",
    "run_bt_experiment",
    "sample_profile",
    "sample_strengths",
]

ENUMERATION_LIMIT = 7  # m! rankings are enumerated up to here


@dataclass(frozen=True)
class BtConfig:
    """Generator settings: roster size, electorate size, strength spread.

    `alpha` is the symmetric Dirichlet concentration: large alpha gives
    near-equal candidate strengths, small alpha a dominant candidate.
    `profiles` is the replicate count for experiments.
    """

    m: int
    alpha: float
    seed: int = 0
    voters: int = 1000
    profiles: int = 100
    candidates: tuple[str, ...] | None = None
    sampler: str = "auto"  # auto | enumerate | mcmc
    burn_in: int | None = None  # default 10*m^2
    thin: int | None = None  # default m^2
    chains: int = 64
    strengths_mode: str = "per-replicate"  # or per-scenario

    def __post_init__(self):
        if self.m < 2:
            raise ValueError("need at least 2 candidates")
        if self.alpha <= 0:
            raise ValueError("alpha must be positive")
        if self.voters < 1:
            raise ValueError("voters must be >= 1")
        if self.sampler not in ("auto", "enumerate", "mcmc"):
            raise ValueError(f"unknown sampler {self.sampler!r}")
        if self.strengths_mode not in ("per-replicate", "per-scenario"):
            raise ValueError(f"unknown strengths_mode {self.strengths_mode!r}")

    def roster(self) -> CandidateRoster:
        if self.candidates is not None:
            return CandidateRoster(tuple(self.candidates))
        return default_roster(self.m)


def default_roster(m: int) -> CandidateRoster:
    """A..Z for small rosters, C1..Cm beyond."""
    if m <= 26:
        return CandidateRoster(tuple(ascii_uppercase[:m]))
    return CandidateRoster(tuple(f"C{i + 1}" for i in range(m)))


def sample_strengths(cfg: BtConfig, rng: np.random.Generator) -> np.ndarray:
    """One positive draw from Dirichlet(alpha, ..., alpha), summing to 1."""
    while True:
        s = rng.dirichlet(np.full(cfg.m, cfg.alpha))
        if np.all(s > 0):
            return s


def bt_ranking_weight(strengths: Sequence[float],
                      ranking: Sequence[int]) -> float:
    """Unnormalized ranking weight: product of s_i/(s_i+s_j) over ordered pairs."""
    weight = 1.0
    for pos, i in enumerate(ranking):
        for j in ranking[pos + 1:]:
            weight *= strengths[i] / (strengths[i] + strengths[j])
    return weight


def enumerate_distribution(strengths: Sequence[float]
                           ) -> tuple[list[tuple[int, ...]], np.ndarray]:
    """All rankings (lexicographic) with their normalized probabilities."""
    m = len(strengths)
    if m > ENUMERATION_LIMIT:
        raise ValueError(f"enumeration limited to {ENUMERATION_LIMIT} candidates")
    perms = list(permutations(range(m)))
    weights = np.array([bt_ranking_weight(strengths, p) for p in perms])
    return perms, weights / weights.sum()


def _sample_counts_enumerate(strengths, voters, rng) -> dict[tuple[int, ...], int]:
    perms, probs = enumerate_distribution(strengths)
    counts = rng.multinomial(voters, probs)
    return {perm: int(c) for perm, c in zip(perms, counts) if c}


def _mcmc_advance(state: np.ndarray, strengths: np.ndarray, steps: int,
                  rng: np.random.Generator) -> None:
    chains, m = state.shape
    rows = np.arange(chains)
    for _ in range(steps):
        pos = rng.integers(0, m - 1, size=chains)
        upper = state[rows, pos]
        lower = state[rows, pos + 1]
        accept = rng.random(chains) < strengths[lower] / strengths[upper]
        idx = np.flatnonzero(accept)
        state[idx, pos[idx]] = lower[idx]
        state[idx, pos[idx] + 1] = upper[idx]


def _sample_counts_mcmc(strengths, voters, rng, burn_in, thin,
                        chains) -> dict[tuple[int, ...], int]:
    m = len(strengths)
    chains = max(1, min(chains, voters))
    state = rng.permuted(np.tile(np.arange(m), (chains, 1)), axis=1)
    strengths = np.asarray(strengths, dtype=float)
    _mcmc_advance(state, strengths, burn_in, rng)
    counts: dict[tuple[int, ...], int] = {}
    collected = 0
    while collected < voters:
        _mcmc_advance(state, strengths, thin, rng)
        for row in state:
            if collected >= voters:
                break
            key = tuple(int(c) for c in row)
            counts[key] = counts.get(key, 0) + 1
            collected += 1
    return counts


def sample_ranking_counts(cfg: BtConfig, strengths: Sequence[float],
                          rng: np.random.Generator) -> dict[tuple[int, ...], int]:
    """Draw cfg.voters complete rankings i.i.d.; returns ranking -> count."""
    sampler = cfg.sampler
    if sampler == "auto":
        sampler = "enumerate" if cfg.m <= ENUMERATION_LIMIT else "mcmc"
    if sampler == "enumerate":
        return _sample_counts_enumerate(strengths, cfg.voters, rng)
    burn_in = cfg.burn_in if cfg.burn_in is not None else 10 * cfg.m**2
    thin = cfg.thin if cfg.thin is not None else cfg.m**2
    return _sample_counts_mcmc(strengths, cfg.voters, rng, burn_in, thin,
                               cfg.chains)


def sample_profile(cfg: BtConfig, strengths: Sequence[float],
                   rng: np.random.Generator) -> Profile:
    """A profile of cfg.voters complete ballots drawn from the model."""
    roster = cfg.roster()
    counts = sample_ranking_counts(cfg, strengths, rng)
    ballots = [Ballot(tuple(roster.names[i] for i in perm), Fraction(count))
               for perm, count in sorted(counts.items())]
    return Profile(roster, ballots)


def _replicate_rng(cfg: BtConfig, replicate: int) -> np.random.Generator:
    return np.random.default_rng(
        np.random.SeedSequence(cfg.seed, spawn_key=(replicate,)))


def generate_profiles(cfg: BtConfig
                      ) -> Iterator[tuple[int, np.ndarray, Profile]]:
    """Yield (replicate, strengths, profile) with independent seed streams.

    Replicate r always sees the same stream regardless of evaluation order,
    so serial and parallel runs agree.  In per-scenario mode one strength
    vector (drawn from a reserved stream) is shared by all replicates.
    """
    scenario_strengths = None
    if cfg.strengths_mode == "per-scenario":
        scenario_strengths = sample_strengths(
            cfg, _replicate_rng(cfg, cfg.profiles))
    for replicate in range(cfg.profiles):
        rng = _replicate_rng(cfg, replicate)
        strengths = (scenario_strengths if scenario_strengths is not None
                     else sample_strengths(cfg, rng))
        yield replicate, strengths, sample_profile(cfg, strengths, rng)


EXPERIMENT_CSV_HEADER = "replicate,rule,sigma_iia,sigma_u,alpha,m"


def run_bt_experiment(cfg: BtConfig, rules: Sequence[VotingRule],
                      seats: int | None = None) -> list[dict]:
    """Evaluate the rules on every replicate; long-format rows."""
    rows: list[dict] = []
    for replicate, _, profile in generate_profiles(cfg):
        reports: list[MetricReport] = evaluate_all(
            rules, profile, election_id=f"bt-{replicate}", seats=seats)
        for report in reports:
            rows.append({
                "replicate": replicate,
                "rule": report.rule,
                "sigma_iia": report.sigma_iia,
                "sigma_u": report.sigma_u,
                "alpha": cfg.alpha,
                "m": cfg.m,
            })
    return rows


def experiment_rows_to_csv(rows: Sequence[dict],
                           manifest_hash: str | None = None) -> str:
    from .formatting import decimal_str

    lines = []
    if manifest_hash:
        lines.append(f"# manifest: {manifest_hash}")
    lines.append(EXPERIMENT_CSV_HEADER)
    for row in rows:
        lines.append(",".join([
            str(row["replicate"]),
            row["rule"],
            decimal_str(row["sigma_iia"]),
            decimal_str(row["sigma_u"]),
            decimal_str(row["alpha"]),
            str(row["m"]),
        ]))
    return "\n".join(lines) + "\n"
