#!/usr/bin/env python3
"""Generate a Scottish-corpus-scale directory of synthetic ward elections.

The real 1,070-election ballot corpus cannot be redistributed with this
repository, so scale tests run against a synthetic stand-in with the same
shape: one canonical_csv file per ward, mostly 6-9 candidates, 3-4 seats,
truncated ballots, electorates in the low thousands, and election ids
carrying a year.  Ballots come from the package's Bradley-Terry generator
and are then truncated to realistic ranking depths.

Usage: python scripts/make_synthetic_corpus.py --out DIR [--elections 1070]
"""

from __future__ import annotations

import argparse
import sys
from fractions import Fraction
from pathlib import Path

import numpy as np

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from votemetrics import Ballot, Profile, write_profile
from votemetrics.synth import BtConfig, default_roster, sample_ranking_counts, sample_strengths

# ranking-depth distribution: most voters rank about 3-5 candidates
DEPTH_WEIGHTS = {1: 0.08, 2: 0.14, 3: 0.30, 4: 0.22, 5: 0.12, 6: 0.07,
                 7: 0.04, 8: 0.02, 9: 0.005, 10: 0.005}
YEARS = (2012, 2017, 2022)


def depth_probs(m: int) -> np.ndarray:
    probs = np.array([DEPTH_WEIGHTS.get(k, 0.002) for k in range(1, m + 1)])
    return probs / probs.sum()


def synth_election(rng: np.random.Generator, m: int, voters: int,
                   seats: int) -> Profile:
    cfg = BtConfig(m=m, alpha=float(rng.uniform(0.8, 3.0)), voters=voters,
                   chains=256)
    strengths = sample_strengths(cfg, rng)
    counts = sample_ranking_counts(cfg, strengths, rng)
    probs = depth_probs(m)
    roster = default_roster(m)
    merged: dict[tuple[str, ...], int] = {}
    for ranking, count in sorted(counts.items()):
        split = rng.multinomial(count, probs)
        for depth, sub in enumerate(split, start=1):
            if not sub:
                continue
            key = tuple(roster.names[c] for c in ranking[:depth])
            merged[key] = merged.get(key, 0) + int(sub)
    ballots = [Ballot(key, Fraction(count)) for key, count in sorted(merged.items())]
    return Profile(roster, ballots, seats=seats)


def make_corpus(outdir: Path, elections: int, seed: int) -> None:
    outdir.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(seed)
    for i in range(elections):
        # mostly 6-9 candidates, tails at 5 and 10-12, like the real corpus
        m = int(rng.choice([5, 6, 7, 8, 9, 10, 11, 12],
                           p=[0.06, 0.22, 0.28, 0.22, 0.12, 0.05, 0.03, 0.02]))
        # keep seats <= m-2 so STV stays configurable on condensed profiles
        seats = 3 if m == 5 else int(rng.choice([3, 4], p=[0.55, 0.45]))
        voters = int(rng.integers(700, 4200))
        year = YEARS[i % len(YEARS)]
        profile = synth_election(rng, m, voters, seats)
        name = f"ward_{i:04d}_{year}.csv"
        (outdir / name).write_text(write_profile(profile), encoding="utf-8")
        if (i + 1) % 100 == 0:
            print(f"  {i + 1}/{elections}", flush=True)


def main() -> int:
    parser = argparse.ArgumentParser()
    parser.add_argument("--out", required=True)
    parser.add_argument("--elections", type=int, default=1070)
    parser.add_argument("--seed", type=int, default=2012)
    args = parser.parse_args()
    make_corpus(Path(args.out), args.elections, args.seed)
    print(f"wrote {args.elections} elections to {args.out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
