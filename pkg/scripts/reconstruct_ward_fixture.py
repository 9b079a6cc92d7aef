#!/usr/bin/env python3
"""Reconstruct the Renfrewshire Ward 2 (2022) test electorate.

The ballot-level records for this ward are not redistributable with the
repository, so the acceptance fixture is a synthetic electorate whose
behavior matches the ward's published summary outcomes exactly: the output
rankings of all five rules, the head-to-head order (McEwan beats everyone),
and the removal-stability / majority-alignment scores to two decimals.

Simulated annealing over integer weights on ballot types.  The search uses a
fast mirrored evaluator; the final profile is re-verified with the real
votemetrics evaluators before anything is written.

Usage: python scripts/reconstruct_ward_fixture.py [--seed N] [--out PATH]
"""

from __future__ import annotations

import argparse
import itertools
import math
import sys
import time
from fractions import Fraction
from pathlib import Path

import numpy as np

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from votemetrics import (Ballot, CandidateRoster, Profile, borda,
                         build_pwcg, evaluate_all, k_approval, plurality,
                         sigma_u, stv, topological_sort, write_profile)
from votemetrics.metrics import sigma_iia
from votemetrics.rules import resolve_rule

CANDIDATES = ("Grady", "Hughes", "McEwan", "Nelson", "Paterson")
M = 5
SEATS = 3

# 0-based targets (ballot-paper order: 0 Grady, 1 Hughes, 2 McEwan,
# 3 Nelson, 4 Paterson)
TARGETS = {
    "borda": (2, 4, 0, 1, 3),
    "3app": (2, 1, 4, 0, 3),
    "2app": (2, 4, 0, 1, 3),
    "plur": (2, 0, 4, 3, 1),
    "stv": (2, 0, 4, 3, 1),
}
PWCG_ORDER = (2, 4, 0, 1, 3)  # earlier beats later, all margins positive
SWAP_SUMS = {"borda": 2, "3app": 3, "2app": 2, "plur": 6, "stv": 8}

# margin/n windows from the two-decimal score targets
W1_PAIRS = ((4, 0), (1, 3))  # disagreements of the plurality/STV output
W1_LO, W1_HI = Fraction(111, 289), Fraction(113, 287)
W2_PAIRS = ((4, 1), (0, 1))  # disagreements of the 3-approval output
W2_LO, W2_HI = Fraction(49, 351), Fraction(51, 349)

SCORE_VECTORS = {
    "borda": lambda m: tuple(range(m, 0, -1)),
    "3app": lambda m: tuple(1 if i < 3 else 0 for i in range(m)),
    "2app": lambda m: tuple(1 if i < 2 else 0 for i in range(m)),
    "plur": lambda m: tuple(1 if i < 1 else 0 for i in range(m)),
}


def build_pool() -> list[tuple[int, ...]]:
    pool = []
    for k in range(1, M + 1):
        pool.extend(itertools.permutations(range(M), k))
    return pool


def score_matrix(types, candidates, vector) -> np.ndarray:
    mat = np.zeros((len(candidates), len(types)), dtype=np.int64)
    pos_of = {c: i for i, c in enumerate(candidates)}
    for t, ranking in enumerate(types):
        for pos, c in enumerate(ranking):
            mat[pos_of[c], t] = vector[pos]
    return mat


def pair_matrix(types) -> np.ndarray:
    """Doubled pairwise contributions: row (a*M+b), entry 2/1/0 per type."""
    mat = np.zeros((M * M, len(types)), dtype=np.int64)
    for t, ranking in enumerate(types):
        rank_pos = {c: i for i, c in enumerate(ranking)}
        for a in range(M):
            for b in range(M):
                if a == b:
                    continue
                pa, pb = rank_pos.get(a), rank_pos.get(b)
                if pa is None and pb is None:
                    mat[a * M + b, t] = 1
                elif pb is None or (pa is not None and pa < pb):
                    mat[a * M + b, t] = 2
    return mat


def ranking_from_scores(scores, candidates) -> tuple[int, ...]:
    order = sorted(range(len(candidates)), key=lambda i: (-scores[i], i))
    return tuple(candidates[i] for i in order)


def ranking_penalty(scores, target, candidates) -> int:
    index = {c: i for i, c in enumerate(candidates)}
    pen = 0
    for hi, lo in zip(target, target[1:]):
        gap = scores[index[lo]] - scores[index[hi]]
        if gap >= 0:
            pen += gap + 1
    return pen


def swap_distance(r1, r2) -> int:
    pos = {c: i for i, c in enumerate(r2)}
    seq = [pos[c] for c in r1]
    return sum(1 for i in range(len(seq)) for j in range(i + 1, len(seq))
               if seq[i] > seq[j])


def stv_order(types, weights, candidates, seats) -> tuple[int, ...]:
    """Mirrors votemetrics.rules._run_stv on (ranking tuple, weight) pairs."""
    n = sum(weights)
    quota = Fraction(n, seats + 1)
    pool = [[t, Fraction(w), 0] for t, w in zip(types, weights) if w > 0]
    canon = {c: i for i, c in enumerate(candidates)}
    standing = set(candidates)
    elected, eliminated = [], []

    def support():
        sup = {c: Fraction(0) for c in standing}
        for entry in pool:
            key, w, cur = entry
            while cur < len(key) and key[cur] not in standing:
                cur += 1
            entry[2] = cur
            if cur < len(key) and w > 0:
                sup[key[cur]] += w
        return sup

    sup = support()
    while standing and len(elected) < seats:
        over = [c for c in standing if sup[c] > quota]
        if over:
            winner = max(over, key=lambda c: (sup[c], -canon[c]))
            factor = (sup[winner] - quota) / sup[winner]
            for entry in pool:
                key, _, cur = entry
                if cur < len(key) and key[cur] == winner:
                    entry[1] *= factor
            standing.discard(winner)
            elected.append(winner)
        else:
            loser = min(standing, key=lambda c: (sup[c], -canon[c]))
            standing.discard(loser)
            eliminated.append(loser)
        sup = support()
    middle = sorted(standing, key=lambda c: (-sup[c], canon[c]))
    return tuple(elected + middle + list(reversed(eliminated)))


class Evaluator:
    def __init__(self):
        self.types = build_pool()
        self.T = len(self.types)
        self.full_scores = {rule: score_matrix(self.types, tuple(range(M)),
                                               SCORE_VECTORS[rule](M))
                            for rule in SCORE_VECTORS}
        self.pairs = pair_matrix(self.types)
        # per removed candidate: reduced candidate tuple, type map, matrices
        self.reduced = {}
        for removed in range(M):
            cands = tuple(c for c in range(M) if c != removed)
            red_index: dict[tuple[int, ...], int] = {}
            red_types: list[tuple[int, ...]] = []
            type_map = np.zeros(self.T, dtype=np.int64)
            for t, ranking in enumerate(self.types):
                red = tuple(c for c in ranking if c != removed)
                if red not in red_index:
                    red_index[red] = len(red_types)
                    red_types.append(red)
                type_map[t] = red_index[red]
            mats = {rule: score_matrix(red_types, cands,
                                       SCORE_VECTORS[rule](M - 1))
                    for rule in SCORE_VECTORS}
            self.reduced[removed] = (cands, red_types, type_map, mats)

    # -- cheap constraints: rankings, margins, windows ---------------------

    def cheap_penalty(self, w: np.ndarray) -> int:
        pen = 0
        for rule, mat in self.full_scores.items():
            pen += ranking_penalty(mat @ w, TARGETS[rule], tuple(range(M)))
        tall = self.pairs @ w  # doubled tallies, flattened
        n2 = 2 * int(w.sum())  # doubled voter count

        def margin2(a, b):
            return int(tall[a * M + b]) - int(tall[b * M + a])

        for i, a in enumerate(PWCG_ORDER):
            for b in PWCG_ORDER[i + 1:]:
                m2 = margin2(a, b)
                if m2 < 1:
                    pen += (1 - m2)
        for pairs, lo, hi in ((W1_PAIRS, W1_LO, W1_HI),
                              (W2_PAIRS, W2_LO, W2_HI)):
            worst = max(margin2(a, b) for a, b in pairs)
            lo_i = math.ceil(lo * n2)
            hi_i = math.floor(hi * n2)
            if worst < lo_i:
                pen += lo_i - worst
            elif worst > hi_i:
                pen += worst - hi_i
        return pen

    # -- expensive constraints: STV output and swap-distance sums ----------

    def rule_rankings(self, w, removed=None):
        if removed is None:
            out = {rule: ranking_from_scores(mat @ w, tuple(range(M)))
                   for rule, mat in self.full_scores.items()}
            out["stv"] = stv_order(self.types, [int(x) for x in w],
                                   tuple(range(M)), SEATS)
            return out
        cands, red_types, type_map, mats = self.reduced[removed]
        red_w = np.bincount(type_map, weights=w, minlength=len(red_types))
        red_w = red_w.astype(np.int64)
        out = {rule: ranking_from_scores(mat @ red_w, cands)
               for rule, mat in mats.items()}
        out["stv"] = stv_order(red_types, [int(x) for x in red_w], cands, SEATS)
        return out

    def expensive_penalty(self, w: np.ndarray) -> tuple[int, dict]:
        full = self.rule_rankings(w)
        pen = 40 * swap_distance(full["stv"], TARGETS["stv"])
        sums = {rule: 0 for rule in SWAP_SUMS}
        for removed in range(M):
            reduced = self.rule_rankings(w, removed)
            for rule in SWAP_SUMS:
                kept = tuple(c for c in full[rule] if c != removed)
                sums[rule] += swap_distance(reduced[rule], kept)
        # the STV sum is the hardest to move, so its gap dominates
        weights = {"borda": 4, "3app": 4, "2app": 4, "plur": 6, "stv": 16}
        for rule, target in SWAP_SUMS.items():
            pen += weights[rule] * abs(sums[rule] - target)
        return pen, sums


def seed_weights(ev: Evaluator, rng: np.random.Generator) -> np.ndarray:
    """Party-structured starting point: SNP {2,4}, Labour {0,1}, Con {3}."""
    w = np.zeros(ev.T, dtype=np.int64)
    index = {t: i for i, t in enumerate(ev.types)}
    blocks = {
        (2, 4): 700, (2, 4, 0): 260, (2,): 240, (2, 4, 1): 120,
        (4, 2): 300, (4, 2, 1): 90, (4,): 60,
        (0, 1): 420, (0, 1, 2): 160, (0,): 170, (0, 1, 4): 60,
        (1, 0): 200, (1, 0, 2): 80, (1,): 60,
        (3,): 330, (3, 0): 130, (3, 0, 1): 60, (3, 2): 50,
        (2, 1, 0): 40, (4, 1): 40, (1, 2): 30,
    }
    for ranking, weight in blocks.items():
        w[index[ranking]] = weight
    jitter = rng.integers(0, 9, size=ev.T)
    live = rng.random(ev.T) < 0.05
    return w + jitter * live


def anneal(ev: Evaluator, rng: np.random.Generator, budget_s: float,
           report_every: float = 30.0) -> tuple[np.ndarray, int]:
    w = seed_weights(ev, rng)
    CHEAP_W = 50
    OFFSET = 40  # puts mildly infeasible states above decent feasible ones

    def total(wv):
        cheap = ev.cheap_penalty(wv)
        if cheap:
            return CHEAP_W * cheap + OFFSET
        exp, _ = ev.expensive_penalty(wv)
        return exp

    current = total(w)
    best, best_w = current, w.copy()
    start = time.time()
    last_report = start
    temperature = 30.0
    stale = 0
    step = 0
    deltas = (1, -1, 2, -2, 5, -5, 12, -12, 30, -30)
    while time.time() - start < budget_s and best > 0:
        step += 1
        stale += 1
        temperature = max(0.5, temperature * 0.99997)
        if stale > 15_000:  # reheat when the endgame stalls
            temperature = max(temperature, 14.0)
            stale = 0
        if rng.random() < 0.3:  # n-preserving transfer between two types
            t1, t2 = rng.integers(0, ev.T, size=2)
            d = int(deltas[rng.integers(0, len(deltas))])
            if t1 == t2 or w[t1] - abs(d) < 0:
                continue
            move = ((t1, -abs(d)), (t2, abs(d)))
        else:
            t = int(rng.integers(0, ev.T))
            d = int(deltas[rng.integers(0, len(deltas))])
            if w[t] + d < 0:
                continue
            move = ((t, d),)
        for t, d in move:
            w[t] += d
        cand = total(w)
        if cand <= current or rng.random() < math.exp((current - cand) / temperature):
            current = cand
            if cand < best:
                best, best_w, stale = cand, w.copy(), 0
        else:
            for t, d in move:
                w[t] -= d
        now = time.time()
        if now - last_report > report_every:
            last_report = now
            print(f"  t={now - start:6.0f}s step={step} best={best} "
                  f"current={current} T={temperature:.2f}", flush=True)
    if best > 0:
        best_w, best = polish(ev, best_w, best, total)
    if best > 0 and ev.cheap_penalty(best_w) == 0:
        best_w, best = drift(ev, best_w, rng, total)
    if best > 0:
        best_w, best = pair_polish(ev, best_w, best, total)
    if best > 0:
        _, sums = ev.expensive_penalty(best_w)
        full = ev.rule_rankings(best_w)
        detail = {}
        for rule in SWAP_SUMS:
            detail[rule] = [swap_distance(
                ev.rule_rankings(best_w, removed)[rule],
                tuple(c for c in full[rule] if c != removed))
                for removed in range(M)]
        print(f"  stuck at {best}; swap sums {sums} (targets {SWAP_SUMS})\n"
              f"  per-removal: {detail}", flush=True)
    return best_w, best


def drift(ev, w, rng, total, deadline_s: float = 480.0):
    """Pinned anneal endgame: cheap constraints and the full-profile STV
    ranking are hard requirements; Metropolis on the weighted swap-sum gaps
    at low temperature walks the remaining discrete landscape."""
    w = w.copy()
    if ev.rule_rankings(w)["stv"] != TARGETS["stv"]:
        return w, total(w)
    weights = {"borda": 4, "3app": 4, "2app": 4, "plur": 6, "stv": 7}

    def gap_score(sums):
        return sum(weights[r] * abs(sums[r] - SWAP_SUMS[r]) for r in SWAP_SUMS)

    _, sums = ev.expensive_penalty(w)
    current = gap_score(sums)
    best, best_w = current, w.copy()
    start = time.time()
    temperature = 6.0
    steps = accepted = 0
    while time.time() - start < deadline_s and best > 0:
        steps += 1
        temperature = max(0.8, temperature * 0.99995)
        if rng.random() < 0.5:
            t1, t2 = rng.integers(0, ev.T, size=2)
            d = int(rng.integers(1, 4))
            if t1 == t2 or w[t1] - d < 0:
                continue
            move = ((t1, -d), (t2, d))
        else:
            t = int(rng.integers(0, ev.T))
            d = int(rng.integers(1, 4)) * (1 if rng.random() < 0.5 else -1)
            if w[t] + d < 0:
                continue
            move = ((t, d),)
        for t, d in move:
            w[t] += d
        revert = ev.cheap_penalty(w) != 0
        if not revert:
            exp, new_sums = ev.expensive_penalty(w)
            if exp >= 40:  # full STV ranking broke
                revert = True
            else:
                cand = gap_score(new_sums)
                if cand <= current or rng.random() < math.exp(
                        (current - cand) / temperature):
                    current = cand
                    accepted += 1
                    if cand < best:
                        best, best_w = cand, w.copy()
                else:
                    revert = True
        if revert:
            for t, d in move:
                w[t] -= d
    _, sums = ev.expensive_penalty(best_w)
    print(f"  pinned anneal: {steps} steps, {accepted} accepted, "
          f"best {best}, sums {sums}", flush=True)
    return best_w, total(best_w)


# -- final verification with the real evaluators ----------------------------


def library_profile(ev: Evaluator, w: np.ndarray) -> Profile:
    roster = CandidateRoster(CANDIDATES)
    ballots = [Ballot(tuple(CANDIDATES[c] for c in ev.types[t]), int(w[t]))
               for t in range(ev.T) if w[t] > 0]
    return Profile(roster, ballots, seats=SEATS)


def verify(profile: Profile) -> list[str]:
    problems = []
    names = CANDIDATES
    rules = {
        "borda": borda(),
        "3app": k_approval(3),
        "2app": k_approval(2),
        "plur": plurality(),
        "stv": stv(SEATS),
    }
    expected_sigma = {"borda": ("0.93", "1.00"), "3app": ("0.90", "0.75"),
                      "2app": ("0.93", "1.00"), "plur": ("0.80", "0.44"),
                      "stv": ("0.73", "0.44")}
    tolerance = Fraction(1, 200)
    for key, rule in rules.items():
        out = rule(profile)
        want = tuple(names[c] for c in TARGETS[key])
        if out.order != want:
            problems.append(f"{key}: ranking {out.order} != {want}")
        s_iia, _ = sigma_iia(rule, profile)
        s_u, _ = sigma_u(rule, profile)
        want_iia, want_u = (Fraction(x) for x in expected_sigma[key])
        if abs(s_iia - want_iia) > tolerance:
            problems.append(f"{key}: sigma_iia {float(s_iia):.4f} != {want_iia}")
        if abs(s_u - want_u) > tolerance:
            problems.append(f"{key}: sigma_u {float(s_u):.4f} != {want_u}")
    graph = build_pwcg(profile)
    sort = topological_sort(graph)
    if sort is None:
        problems.append("head-to-head graph has a cycle")
    else:
        if sort.order != tuple(names[c] for c in PWCG_ORDER):
            problems.append(f"head-to-head order {sort.order}")
        if len(graph.edges) != 10:
            problems.append("some head-to-head margin is exactly zero")
    if sigma_u(resolve_rule("optimal-u"), profile)[0] != 1:
        problems.append("optimal rule does not reach sigma_u = 1")
    return problems


def main() -> int:
    parser = argparse.ArgumentParser()
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--budget", type=float, default=900.0,
                        help="seconds per annealing attempt")
    parser.add_argument("--attempts", type=int, default=4)
    parser.add_argument("--out", default="tests/fixtures/renfrewshire_2022_ward2.csv")
    args = parser.parse_args()

    ev = Evaluator()
    print(f"search space: {ev.T} ballot types")
    for attempt in range(args.attempts):
        rng = np.random.default_rng(args.seed + attempt)
        print(f"attempt {attempt} (seed {args.seed + attempt})")
        w, penalty = anneal(ev, rng, args.budget)
        print(f"  finished with penalty {penalty}")
        if penalty != 0:
            continue
        profile = library_profile(ev, w)
        problems = verify(profile)
        if problems:
            print("  mirrored evaluator disagreed with the library:")
            for line in problems:
                print("   -", line)
            continue
        out = Path(args.out)
        out.parent.mkdir(parents=True, exist_ok=True)
        header = ("# Renfrewshire Ward 2, 2022 (reconstruction).\n"
                  "# Synthetic electorate matching the ward's published rule\n"
                  "# outcomes and scores; not the original cast ballots.\n")
        out.write_text(header + write_profile(profile), encoding="utf-8")
        print(f"wrote {out} (n={profile.n}, {len(profile.grouped)} ballot types)")
        return 0
    print("no attempt satisfied every target; rerun with more budget")
    return 1


if __name__ == "__main__":
    sys.exit(main())
