"""Acceptance gate: one test per criterion, each printing a PASS line with
the measured values.  Run with `pytest tests/test_acceptance.py -v -s`.

The two corpus-scale criteria run against the ward fixture and a synthetic
corpus generated at Scottish-corpus scale (set SCOT_CORPUS_DIR to use a real
ballot corpus directory instead).
"""

import csv
import os
import subprocess
import sys
import time
from fractions import Fraction
from itertools import permutations
from pathlib import Path

import numpy as np
import pytest
from scipy import stats as sps

from votemetrics import (Ballot, BootstrapConfig, Profile, bootstrap_metric,
                         borda, brute_force_optimal, build_pwcg, dictatorship,
                         evaluate_all, parse_profile, plurality, sigma_iia,
                         sigma_u, swap_distance, topological_sort)
from votemetrics.ballots import Ranking
from votemetrics.optimizer import sigma_u_via_margins
from votemetrics.rules import k_approval, resolve_rule, resolve_rules, stv
from votemetrics.synth import (BtConfig, enumerate_distribution,
                               run_bt_experiment, sample_ranking_counts,
                               sample_strengths)

from conftest import random_profile, roster_of

REPO = Path(__file__).resolve().parent.parent
FIXTURE = REPO / "tests" / "fixtures" / "renfrewshire_2022_ward2.csv"
WARD_NAMES = ("Grady", "Hughes", "McEwan", "Nelson", "Paterson")  # paper order 1..5

TOL = Fraction(1, 200)  # two-decimal reporting tolerance


def _ok(name: str, detail: str = "") -> None:
    print(f"ACCEPT PASS  {name}" + (f"  [{detail}]" if detail else ""))


def _ward(indices) -> tuple[str, ...]:
    return tuple(WARD_NAMES[i - 1] for i in indices)


def test_table2_reproduction():
    """All five rule rankings and ten scores on the ward fixture, < 1 s."""
    profile = parse_profile(FIXTURE.read_bytes())
    assert profile.seats == 3
    expected = {
        "borda": (_ward((3, 5, 1, 2, 4)), "0.93", "1.00"),
        "3-approval": (_ward((3, 2, 5, 1, 4)), "0.90", "0.75"),
        "2-approval": (_ward((3, 5, 1, 2, 4)), "0.93", "1.00"),
        "plurality": (_ward((3, 1, 5, 4, 2)), "0.80", "0.44"),
        "stv:k=3": (_ward((3, 1, 5, 4, 2)), "0.73", "0.44"),
    }
    rules = resolve_rules(["borda", "3-approval", "2-approval", "plurality",
                           "stv"], default_seats=profile.seats)
    start = time.perf_counter()
    reports = {r.rule: r for r in evaluate_all(rules, profile)}
    elapsed = time.perf_counter() - start
    for rule, (ranking, s_iia, s_u) in expected.items():
        report = reports[rule]
        assert report.ranking == ranking, (rule, report.ranking)
        assert abs(report.sigma_iia - Fraction(s_iia)) <= TOL, \
            (rule, float(report.sigma_iia))
        assert abs(report.sigma_u - Fraction(s_u)) <= TOL, \
            (rule, float(report.sigma_u))
    assert elapsed < 1.0, elapsed
    _ok("Table 2 reproduction",
        f"{elapsed * 1000:.0f} ms, " + ", ".join(
            f"{r}={float(reports[r].sigma_iia):.3f}/{float(reports[r].sigma_u):.3f}"
            for r in sorted(expected)))


def test_table2_fixture_pwcg_and_optimal_rule():
    """The ward graph is acyclic with McEwan beating everyone head-to-head,
    so the greedy rule reaches a perfect majority score."""
    profile = parse_profile(FIXTURE.read_bytes())
    graph = build_pwcg(profile)
    assert len(graph.edges) == 10
    mcewan = WARD_NAMES[2]
    for other in WARD_NAMES:
        if other != mcewan:
            assert graph.margin(mcewan, other) > 0
    assert topological_sort(graph) is not None
    value, _ = sigma_u(resolve_rule("optimal-u"), profile)
    assert value == 1
    _ok("ward fixture head-to-head structure", "acyclic, optimal-u sigma_u=1")


def test_theorem3_oracle_equivalence():
    """Greedy rule exactly matches the enumeration oracle on 200 profiles."""
    rng = np.random.default_rng(42)
    optimal = resolve_rule("optimal-u")
    start = time.perf_counter()
    for _ in range(200):
        p = random_profile(rng, m=int(rng.integers(3, 6)),
                           n=int(rng.integers(5, 26)))
        greedy = sigma_u(optimal, p)[0]
        _, best = brute_force_optimal(p)
        assert greedy == best
    elapsed = time.perf_counter() - start
    assert elapsed < 30.0, elapsed
    _ok("Theorem 3 oracle equivalence", f"200 profiles in {elapsed:.1f} s")


def test_lemma1_identity():
    """Tally sums equal n exactly for every pair on 1000 random profiles."""
    rng = np.random.default_rng(7)
    for _ in range(1000):
        p = random_profile(rng, m=int(rng.integers(2, 6)),
                           n=int(rng.integers(1, 12)),
                           complete=bool(rng.integers(0, 2)),
                           weights=bool(rng.integers(0, 2)))
        names = p.roster.names
        for i, a in enumerate(names):
            for b in names[i + 1:]:
                assert p.pair_tally(a, b) + p.pair_tally(b, a) == p.n
    _ok("Lemma 1 identity", "1000 profiles, exact")


def test_lemma_a1_margin_consistency():
    """Margin-graph shortcut equals definitional sigma_u for all five rules
    on 200 complete-ballot profiles containing majority cycles."""
    rng = np.random.default_rng(13)
    checked = 0
    while checked < 200:
        m = int(rng.integers(3, 6))
        p = random_profile(rng, m=m, n=int(rng.integers(3, 15)), complete=True)
        graph = build_pwcg(p)
        if topological_sort(graph) is not None:
            continue
        checked += 1
        rules = [borda(), k_approval(3), k_approval(2), plurality(), stv(2)]
        for rule in rules:
            assert sigma_u_via_margins(graph, rule(p)) == sigma_u(rule, p)[0]
    _ok("Lemma A.1 margin consistency", "200 cyclic profiles x 5 rules, exact")


def test_proposition2_endpoints():
    """Dictatorship scores sigma_iia = 1 and sigma_u > 0 everywhere; the
    reversal construction scores sigma_iia = 0 on its fixtures."""
    rng = np.random.default_rng(77)
    for _ in range(100):
        p = random_profile(rng, m=int(rng.integers(3, 6)),
                           n=int(rng.integers(1, 9)))
        rule = dictatorship(int(rng.integers(0, int(p.n))))
        assert sigma_iia(rule, p)[0] == 1
        assert sigma_u(rule, p)[0] > 0

    from votemetrics.rules import VotingRule, reversal_of
    for m in (3, 4, 5):
        base, reverse = borda(), reversal_of(borda())
        crafted = VotingRule("crafted", lambda q, m=m, base=base,
                             reverse=reverse: base(q) if len(q.roster) == m
                             else reverse(q))
        fixture = Profile(roster_of(m), [Ballot(tuple(roster_of(m).names), 4)])
        assert sigma_iia(crafted, fixture)[0] == 0
    _ok("Proposition 2 endpoints",
        "dictator: sigma_iia=1, sigma_u>0 on 100 profiles; reversal: 0")


def test_hand_derived_values(spoiler7, cycle3):
    assert sigma_iia(plurality(), spoiler7)[0] == Fraction(1, 3)
    for rule in (borda(), k_approval(3), k_approval(2), plurality(), stv(2),
                 resolve_rule("optimal-u")):
        assert sigma_u(rule, cycle3)[0] == Fraction(1, 2)
    _ok("hand-derived scores", "plurality spoiler=1/3, cycle sigma_u=1/2")


def test_swap_distance_metric_axioms():
    rng = np.random.default_rng(3)
    start = time.perf_counter()
    for _ in range(10_000):
        m = int(rng.integers(2, 9))
        names = roster_of(m).names
        r1, r2, r3 = (Ranking(tuple(np.array(names)[rng.permutation(m)]))
                      for _ in range(3))
        d12, d13, d23 = (swap_distance(a, b)
                         for a, b in ((r1, r2), (r1, r3), (r2, r3)))
        assert swap_distance(r1, r1) == 0
        assert d12 == swap_distance(r2, r1)
        assert d13 <= d12 + d23
        assert d12 <= m * (m - 1) // 2
    _ok("swap-distance metric axioms",
        f"10000 triples in {time.perf_counter() - start:.1f} s")


def test_bt_sampler_fidelity():
    """Chi-square GOF at m = 3, 4 (1e5 samples, 99%); MCMC first-place
    marginals at m = 6 within 0.02 of enumeration."""
    for m, seed in ((3, 5), (4, 6)):
        cfg = BtConfig(m=m, alpha=2.0, voters=100_000)
        rng = np.random.default_rng(seed)
        strengths = sample_strengths(cfg, rng)
        counts = sample_ranking_counts(cfg, strengths, rng)
        perms, probs = enumerate_distribution(strengths)
        observed = np.array([counts.get(perm, 0) for perm in perms])
        statistic = ((observed - probs * cfg.voters) ** 2
                     / (probs * cfg.voters)).sum()
        assert statistic < sps.chi2.ppf(0.99, df=len(perms) - 1)

    cfg = BtConfig(m=6, alpha=2.0, voters=100_000, sampler="mcmc", chains=256)
    rng = np.random.default_rng(21)
    strengths = sample_strengths(cfg, rng)
    counts = sample_ranking_counts(cfg, strengths, rng)
    empirical = np.zeros(6)
    for perm, count in counts.items():
        empirical[perm[0]] += count
    empirical /= cfg.voters
    perms, probs = enumerate_distribution(strengths)
    exact = np.zeros(6)
    for perm, prob in zip(perms, probs):
        exact[perm[0]] += prob
    gap = float(np.abs(empirical - exact).max())
    assert gap < 0.02
    _ok("BT sampler fidelity", f"chi-square ok, mcmc marginal gap {gap:.4f}")


def test_bt_experiment_directional():
    """alpha=2, m=6, 1000 voters, 100 replicates: borda's mean scores beat
    plurality's and STV's.  Budget 10 minutes."""
    start = time.perf_counter()
    cfg = BtConfig(m=6, alpha=2.0, seed=20, voters=1000, profiles=100)
    rows = run_bt_experiment(cfg, [borda(), plurality(), stv(3)])
    elapsed = time.perf_counter() - start
    means: dict[str, dict[str, float]] = {}
    for metric in ("sigma_iia", "sigma_u"):
        for rule in ("borda", "plurality", "stv:k=3"):
            values = [float(r[metric]) for r in rows if r["rule"] == rule]
            assert len(values) == 100
            means.setdefault(metric, {})[rule] = sum(values) / len(values)
    for metric, by_rule in means.items():
        assert by_rule["borda"] >= by_rule["plurality"], (metric, by_rule)
        assert by_rule["borda"] >= by_rule["stv:k=3"], (metric, by_rule)
    assert elapsed < 600, elapsed
    _ok("BT experiment directional check",
        f"{elapsed:.0f} s, " + "; ".join(
            f"{metric}: borda={v['borda']:.3f} plur={v['plurality']:.3f} "
            f"stv={v['stv:k=3']:.3f}" for metric, v in means.items()))


@pytest.fixture(scope="session")
def corpus_dir(tmp_path_factory):
    override = os.environ.get("SCOT_CORPUS_DIR")
    if override:
        return Path(override)
    cache = REPO / ".cache" / "synth_corpus_1070_seed2012"
    stamp = cache / ".complete"
    if not stamp.exists():
        subprocess.run(
            [sys.executable, str(REPO / "scripts" / "make_synthetic_corpus.py"),
             "--out", str(cache), "--elections", "1070", "--seed", "2012"],
            check=True, cwd=REPO)
        stamp.write_text("ok")
    return cache


def test_full_corpus_sweep(corpus_dir, tmp_path):
    """1,070 elections x 6 rules in <= 30 min, no failures, scores in [0,1],
    and the greedy rule's sigma_u dominates every rule on every election."""
    out = tmp_path / "sweep.csv"
    start = time.perf_counter()
    proc = subprocess.run(
        [sys.executable, "-m", "votemetrics.cli", "sweep", str(corpus_dir),
         "-o", str(out), "--jobs", "2", "--rules",
         "borda,3-approval,2-approval,plurality,stv,optimal-u"],
        capture_output=True, text=True, cwd=REPO)
    elapsed = time.perf_counter() - start
    assert proc.returncode == 0, proc.stderr
    assert "warning:" not in proc.stderr, proc.stderr[:2000]
    with open(out) as handle:
        rows = [row for row in csv.DictReader(
            line for line in handle if not line.startswith("#"))]
    elections: dict[str, dict[str, Fraction]] = {}
    for row in rows:
        s_iia, s_u = Fraction(row["sigma_iia"]), Fraction(row["sigma_u"])
        assert 0 <= s_iia <= 1 and 0 <= s_u <= 1, row
        elections.setdefault(row["election_id"], {})[row["rule"]] = s_u
    n_files = len(list(corpus_dir.glob("*.csv")))
    assert len(elections) == n_files
    assert len(rows) == 6 * n_files
    for election_id, by_rule in elections.items():
        best = by_rule["optimal-u"]
        for rule, value in by_rule.items():
            assert best >= value, (election_id, rule)
    assert elapsed < 1800, elapsed
    _ok("full-corpus sweep",
        f"{n_files} elections, {len(rows)} rows, {elapsed / 60:.1f} min, "
        "optimal-u dominant everywhere")


def test_bootstrap_acceptance():
    """Zero-width CI on an identical-ballot profile; byte-stable under a
    fixed seed; B=1000 on the ward fixture under 10 s per (rule, metric),
    with the borda sigma_u interval containing 1.00."""
    p_const = Profile(roster_of(4), [Ballot(("C", "A", "D", "B"), 40)])
    iv = bootstrap_metric(p_const, borda(), "sigma_iia",
                          BootstrapConfig(resamples=200, seed=1))
    assert iv.lo == iv.hi == iv.mean

    profile = parse_profile(FIXTURE.read_bytes())
    cfg = BootstrapConfig(resamples=1000, seed=5)
    timings = {}
    start = time.perf_counter()
    borda_u = bootstrap_metric(profile, borda(), "sigma_u", cfg)
    timings["borda/sigma_u"] = time.perf_counter() - start
    start = time.perf_counter()
    stv_iia = bootstrap_metric(profile, stv(3), "sigma_iia", cfg)
    timings["stv/sigma_iia"] = time.perf_counter() - start
    assert borda_u.lo <= 1 <= borda_u.hi
    assert 0 <= stv_iia.lo <= stv_iia.hi <= 1
    for pair, seconds in timings.items():
        assert seconds < 10, (pair, seconds)
    again = bootstrap_metric(profile, borda(), "sigma_u", cfg)
    assert (again.lo, again.mean, again.hi) == \
        (borda_u.lo, borda_u.mean, borda_u.hi)
    _ok("bootstrap", "; ".join(f"{k}={v:.1f}s" for k, v in timings.items())
        + f"; borda sigma_u CI [{float(borda_u.lo):.3f}, {float(borda_u.hi):.3f}]")
