"""Ranked-ballot analysis toolkit: removal-stability (sigma_iia) and
majority-alignment (sigma_u) scores for voting rules, a provably optimal
greedy majority rule, Bradley-Terry synthetic electorates, and bootstrap
uncertainty, with a batch CLI."""

__version__ = "0.1.0"

from .ballots import (Ballot, CandidateRoster, Profile, Ranking,
                      condense_profile, condense_ranking, parse_profile,
                      write_profile)
from .metrics import (MetricReport, evaluate_all, sigma_iia, sigma_u,
                      swap_distance)
from .optimizer import brute_force_optimal, optimal_u_ranking, optimal_u_rule
from .pairwise import (alignment, build_pwcg, misalignment, relative_vector,
                       topological_sort)
from .rules import (StvConfig, VotingRule, borda, dictatorship, k_approval,
                    plurality, resolve_rule, resolve_rules, reversal_of,
                    scoring_rule, stv)
from .stats import BootstrapConfig, IntervalEstimate, aggregate_corpus, bootstrap_metric
from .synth import (BtConfig, bt_ranking_weight, enumerate_distribution,
                    run_bt_experiment, sample_profile, sample_strengths)

__all__ = [name for name in dir() if not name.startswith("_")]
