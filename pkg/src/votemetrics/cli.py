"""Batch front door: analyze elections, sweep corpora, generate synthetic
experiments, and bootstrap uncertainty, emitting stable CSV/JSON schemas.

Exit codes: 0 success, 2 input/parse error, 3 configuration error, 4 empty
corpus.  Every output file carries a `# manifest: <hash>` reference to the
run manifest written next to it; the hash covers everything reproducible
(command, inputs, rules, seed, config, tool version) but not the timestamp.
"""

from __future__ import annotations

import argparse
import concurrent.futures
import hashlib
import json
import sys
import time
from fractions import Fraction
from pathlib import Path
from typing import Sequence

from . import __version__
from .ballots import (BallotError, Profile, ProfileFormatError, RosterError,
                      parse_profile, write_profile)
from .formatting import decimal_str, round2
from .metrics import (METRIC_CSV_HEADER, MetricReport, RuleEvaluationError,
                      evaluate_all, reports_to_csv, reports_to_json)
from .rules import DEFAULT_RULE_SPECS, RuleConfigError, resolve_rules
from .stats import BootstrapConfig, bootstrap_metric, intervals_to_csv
from .synth import (BtConfig, experiment_rows_to_csv, generate_profiles,
                    run_bt_experiment)

EXIT_OK = 0
EXIT_PARSE = 2
EXIT_CONFIG = 3
EXIT_EMPTY_CORPUS = 4

PARSE_ERRORS = (ProfileFormatError, RosterError, BallotError, OSError)


def build_manifest(command: str, inputs: Sequence[str], rules: Sequence[str],
                   seed: int | None, config: dict) -> dict:
    core = {
        "command": command,
        "inputs": list(inputs),
        "rules": list(rules),
        "seed": seed,
        "config": config,
        "tool_version": __version__,
    }
    digest = hashlib.sha256(
        json.dumps(core, sort_keys=True).encode("utf-8")).hexdigest()[:16]
    manifest = dict(core)
    manifest["hash"] = digest
    manifest["timestamp"] = time.strftime("%Y-%m-%dT%H:%M:%S%z")
    return manifest


def _write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        handle.write(text)


def _write_manifest(outdir: Path, manifest: dict) -> None:
    _write(outdir / "manifest.json",
           json.dumps(manifest, indent=2, sort_keys=True) + "\n")


def _split_rules(spec: str) -> list[str]:
    return [token.strip() for token in spec.split(",") if token.strip()]


def _load_profile(path: Path) -> Profile:
    with open(path, "rb") as handle:
        return parse_profile(handle.read())


def _rankings_csv(reports: Sequence[MetricReport], manifest_hash: str) -> str:
    lines = [f"# manifest: {manifest_hash}", "election_id,rule,ranking"]
    for report in reports:
        lines.append(f"{report.election_id},{report.rule},"
                     + ">".join(report.ranking))
    return "\n".join(lines) + "\n"


def cmd_analyze(args: argparse.Namespace) -> int:
    path = Path(args.profile)
    try:
        profile = _load_profile(path)
    except PARSE_ERRORS as exc:
        print(f"error: {path}: {exc}", file=sys.stderr)
        return EXIT_PARSE
    rule_specs = _split_rules(args.rules)
    try:
        rules = resolve_rules(rule_specs, default_seats=profile.seats)
        reports = evaluate_all(rules, profile, election_id=path.stem)
    except (RuleConfigError, RuleEvaluationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    manifest = build_manifest("analyze", [str(path)], rule_specs, None,
                              {"format": args.format})
    outdir = Path(args.output)
    if args.format in ("csv", "both"):
        _write(outdir / "metrics.csv", reports_to_csv(reports, manifest["hash"]))
        _write(outdir / "rankings.csv", _rankings_csv(reports, manifest["hash"]))
    if args.format in ("json", "both"):
        _write(outdir / "analysis.json", reports_to_json(reports, manifest["hash"]))
    _write_manifest(outdir, manifest)

    print(f"election {path.stem}: n={decimal_str(profile.n)}, "
          f"m={len(profile.roster)}")
    width = max(len(r.rule) for r in reports)
    for report in reports:
        print(f"  {report.rule:<{width}}  {'>'.join(report.ranking)}  "
              f"sigma_iia={round2(report.sigma_iia):.2f}  "
              f"sigma_u={round2(report.sigma_u):.2f}")
    return EXIT_OK


def _sweep_one(path_str: str, rule_specs: Sequence[str]
               ) -> tuple[str, list[MetricReport] | None, str | None]:
    """Worker: returns (election_id, reports, error). Importable for pickling."""
    path = Path(path_str)
    try:
        profile = _load_profile(path)
        rules = resolve_rules(rule_specs, default_seats=profile.seats)
        reports = evaluate_all(rules, profile, election_id=path.stem)
        return path.stem, reports, None
    except (*PARSE_ERRORS, RuleConfigError, RuleEvaluationError,
            ValueError) as exc:
        return path.stem, None, str(exc)


def cmd_sweep(args: argparse.Namespace) -> int:
    corpus = Path(args.corpus)
    if not corpus.is_dir():
        print(f"error: {corpus} is not a directory", file=sys.stderr)
        return EXIT_PARSE
    files = sorted(p for p in corpus.iterdir()
                   if p.is_file() and p.suffix == ".csv")
    rule_specs = _split_rules(args.rules)

    results: list[tuple[str, list[MetricReport] | None, str | None]] = []
    if args.jobs > 1:
        with concurrent.futures.ProcessPoolExecutor(max_workers=args.jobs) as pool:
            results = list(pool.map(_sweep_one, [str(p) for p in files],
                                    [rule_specs] * len(files),
                                    chunksize=8))
    else:
        results = [_sweep_one(str(p), rule_specs) for p in files]

    reports: list[MetricReport] = []
    failures = 0
    for election_id, election_reports, error in results:
        if error is not None:
            failures += 1
            print(f"warning: {election_id}: {error}", file=sys.stderr)
        else:
            reports.extend(election_reports)
    if not reports:
        print("error: no profile in the corpus could be processed",
              file=sys.stderr)
        return EXIT_EMPTY_CORPUS

    reports.sort(key=lambda r: (r.election_id, r.rule))
    # jobs only changes scheduling, never results, so it stays out of the hash
    manifest = build_manifest("sweep", [str(corpus)], rule_specs, None, {})
    out = Path(args.output)
    if args.format == "json":
        _write(out, reports_to_json(reports, manifest["hash"]))
    else:
        _write(out, reports_to_csv(reports, manifest["hash"]))
    _write_manifest(out.parent, manifest)
    print(f"swept {len(files)} files: {len(files) - failures} ok, "
          f"{failures} failed, {len(reports)} rows -> {out}")
    return EXIT_OK


def _bt_config(args: argparse.Namespace) -> BtConfig:
    return BtConfig(
        m=args.m,
        alpha=args.alpha,
        seed=args.seed,
        voters=args.voters,
        profiles=args.profiles,
        sampler=args.sampler,
        strengths_mode=args.strengths_mode,
    )


def cmd_generate(args: argparse.Namespace) -> int:
    try:
        cfg = _bt_config(args)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    outdir = Path(args.output)
    manifest = build_manifest(
        "generate", [], [], args.seed,
        {"m": cfg.m, "alpha": cfg.alpha, "voters": cfg.voters,
         "profiles": cfg.profiles, "sampler": cfg.sampler,
         "strengths_mode": cfg.strengths_mode, "seats": args.seats})
    for replicate, _, profile in generate_profiles(cfg):
        if args.seats is not None:
            profile = Profile(profile.roster, profile.ballots, seats=args.seats)
        name = f"bt_m{cfg.m}_a{decimal_str(cfg.alpha)}_r{replicate:03d}.csv"
        _write(outdir / name,
               f"# manifest: {manifest['hash']}\n" + write_profile(profile))
    _write(outdir / "config.json", json.dumps(
        {"manifest": manifest["hash"], "m": cfg.m, "alpha": cfg.alpha,
         "voters": cfg.voters, "profiles": cfg.profiles, "seed": cfg.seed,
         "sampler": cfg.sampler, "strengths_mode": cfg.strengths_mode,
         "seats": args.seats}, indent=2, sort_keys=True) + "\n")
    _write_manifest(outdir, manifest)
    print(f"wrote {cfg.profiles} profiles to {outdir}")
    return EXIT_OK


def cmd_bt_experiment(args: argparse.Namespace) -> int:
    try:
        cfg = _bt_config(args)
        rule_specs = _split_rules(args.rules)
        rules = resolve_rules(rule_specs, default_seats=args.seats)
    except (ValueError, RuleConfigError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    rows = run_bt_experiment(cfg, rules, seats=args.seats)
    manifest = build_manifest(
        "bt-experiment", [], rule_specs, args.seed,
        {"m": cfg.m, "alpha": cfg.alpha, "voters": cfg.voters,
         "profiles": cfg.profiles, "seats": args.seats})
    out = Path(args.output)
    _write(out, experiment_rows_to_csv(rows, manifest["hash"]))
    _write_manifest(out.parent, manifest)
    print(f"wrote {len(rows)} experiment rows -> {out}")
    return EXIT_OK


def cmd_bootstrap(args: argparse.Namespace) -> int:
    path = Path(args.profile)
    try:
        profile = _load_profile(path)
    except PARSE_ERRORS as exc:
        print(f"error: {path}: {exc}", file=sys.stderr)
        return EXIT_PARSE
    try:
        cfg = BootstrapConfig(resamples=args.resamples,
                              confidence=args.confidence, seed=args.seed)
        rules = resolve_rules(_split_rules(args.rules),
                              default_seats=profile.seats)
        metrics = _split_rules(args.metrics)
        intervals = [bootstrap_metric(profile, rule, metric, cfg)
                     for rule in rules for metric in metrics]
    except (ValueError, RuleConfigError, RuleEvaluationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    manifest = build_manifest(
        "bootstrap", [str(path)], [r.name for r in rules], args.seed,
        {"B": cfg.resamples, "confidence": cfg.confidence,
         "metrics": metrics})
    out = Path(args.output)
    _write(out, intervals_to_csv(path.stem, intervals, manifest["hash"]))
    _write_manifest(out.parent, manifest)
    for iv in intervals:
        print(f"  {iv.rule} {iv.metric}: mean={float(iv.mean):.4f} "
              f"[{float(iv.lo):.4f}, {float(iv.hi):.4f}]")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="votemetrics",
        description="Removal-stability and majority-alignment analysis of "
                    "ranked-choice elections.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    rules_help = ("comma-separated rule list: borda, <k>-approval, plurality, "
                  "stv (seats from profile metadata), stv:k=<int>, "
                  "dictator:i=<int>, optimal-u")

    p = sub.add_parser("analyze", help="score one election file")
    p.add_argument("profile")
    p.add_argument("-o", "--output", required=True, help="output directory")
    p.add_argument("--rules", default=",".join(DEFAULT_RULE_SPECS),
                   help=rules_help)
    p.add_argument("--format", choices=("csv", "json", "both"), default="both")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("sweep", help="score every election in a directory")
    p.add_argument("corpus")
    p.add_argument("-o", "--output", required=True, help="output CSV path")
    p.add_argument("--rules", default=",".join(DEFAULT_RULE_SPECS),
                   help=rules_help)
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--jobs", type=int, default=1, help="parallel workers")
    p.set_defaults(func=cmd_sweep)

    def add_bt_flags(p: argparse.ArgumentParser) -> None:
        p.add_argument("--m", type=int, required=True, help="candidate count")
        p.add_argument("--alpha", type=float, required=True,
                       help="Dirichlet concentration")
        p.add_argument("--voters", type=int, default=1000)
        p.add_argument("--profiles", type=int, default=100)
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--sampler", choices=("auto", "enumerate", "mcmc"),
                       default="auto")
        p.add_argument("--strengths-mode", dest="strengths_mode",
                       choices=("per-replicate", "per-scenario"),
                       default="per-replicate")
        p.add_argument("--seats", type=int, default=None,
                       help="seat metadata for STV")

    p = sub.add_parser("generate", help="write synthetic profile files")
    add_bt_flags(p)
    p.add_argument("-o", "--output", required=True, help="output directory")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("bt-experiment",
                       help="score rules across synthetic replicates")
    add_bt_flags(p)
    p.add_argument("-o", "--output", required=True, help="output CSV path")
    p.add_argument("--rules", default="borda,3-approval,2-approval,plurality",
                   help=rules_help)
    p.set_defaults(func=cmd_bt_experiment)

    p = sub.add_parser("bootstrap", help="percentile bootstrap over voters")
    p.add_argument("profile")
    p.add_argument("-o", "--output", required=True, help="output CSV path")
    p.add_argument("--rules", default="borda", help=rules_help)
    p.add_argument("--metrics", default="sigma_iia,sigma_u",
                   help="comma-separated: sigma_iia, sigma_u")
    p.add_argument("--resamples", "--B", dest="resamples", type=int,
                   default=1000)
    p.add_argument("--confidence", type=float, default=0.95)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_bootstrap)

    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
