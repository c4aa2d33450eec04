"""Command line entry point: ``qbc3 <command> ...``.

Exit codes: 0 success, 1 invalid configuration, 2 self-test failure.
"""
from __future__ import annotations

import argparse
import math
import sys
import time

from . import __version__
from .harness import DEFAULT_TRIALS, ExperimentConfig, parse_angle, parse_int_range, run, to_csv, to_json
from .selftest import run_selftest


def _common(p: argparse.ArgumentParser, mc: bool = True) -> None:
    p.add_argument("--m", type=int, default=1, help="signal qubits sent by Babe (default 1)")
    p.add_argument("--n", type=int, default=5, help="qubits in the commitment (default 5)")
    p.add_argument("--theta", type=parse_angle, default=math.pi, help="modulation angle, e.g. pi, pi/2 (default pi)")
    if mc:
        p.add_argument("--trials", type=int, default=DEFAULT_TRIALS)
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--sigma", type=float, default=3.0, dest="sigma_threshold",
                       help="PASS/FAIL threshold in binomial standard deviations")
    _output(p)


def _output(p: argparse.ArgumentParser) -> None:
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.add_argument("--output", "-o", help="write the report here instead of stdout")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qbc3", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("honest", help="run the honest protocol")
    _common(p)
    p.add_argument("--per-trial", action="store_true", help="include every session transcript")
    p.add_argument("--reveal-secrets", action="store_true", help="include Babe's and the decoy angles in transcripts")

    p = sub.add_parser("attack", help="run a cheating strategy")
    p.add_argument("role", choices=("babe", "adam"))
    p.add_argument("--strategy", required=True, help="babe: guess|majority|helstrom|entangled; adam: relabel|clone")
    p.add_argument("--cloner", default="phase_covariant", help="clone attack machine (phase_covariant|universal)")
    _common(p)

    p = sub.add_parser("bounds-table", help="tabulate the closed-form bounds")
    p.add_argument("--n", default="3..11", help="n values, e.g. 3..11 or 3,5,7")
    p.add_argument("--m", default="1", help="m values, same syntax")
    p.add_argument("--theta", type=parse_angle, default=math.pi)
    _output(p)

    p = sub.add_parser("epr-demo", help="purification attack on naive schemes")
    _output(p)

    p = sub.add_parser("selftest", help="run every reproduction check")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--trials", type=int, default=DEFAULT_TRIALS, help="Monte Carlo trials for attack checks")
    p.add_argument("--honest-trials", type=int, default=10_000, help="sampled honest runs per (m, n)")
    p.add_argument("--only", default=None, help="subset of criteria, e.g. 1,4,7..8")
    p.add_argument("--output", "-o")
    return parser


def _emit(text: str, path: str | None) -> None:
    if path:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _config(args) -> ExperimentConfig:
    if args.command == "bounds-table":
        return ExperimentConfig("bounds-table", theta=args.theta,
                                n_values=parse_int_range(args.n), m_values=parse_int_range(args.m))
    if args.command == "epr-demo":
        return ExperimentConfig("epr-demo")
    cfg = ExperimentConfig(args.command, m=args.m, n=args.n, theta=args.theta, trials=args.trials,
                           seed=args.seed, sigma_threshold=args.sigma_threshold)
    if args.command == "honest":
        cfg.per_trial, cfg.reveal_secrets = args.per_trial, args.reveal_secrets
    else:
        cfg.role, cfg.strategy, cfg.cloner = args.role, args.strategy, args.cloner
    return cfg


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code == 0 else 1

    if args.command == "selftest":
        try:
            only = parse_int_range(args.only) if args.only else None
            start = time.perf_counter()
            report = run_selftest(args.seed, args.trials, args.honest_trials, only=only)
        except (ValueError, KeyError) as exc:
            print(f"qbc3: {exc}", file=sys.stderr)
            return 1
        for c in report["criteria"]:
            print(f"{'PASS' if c['pass'] else 'FAIL'}  [{c['id']:2d}] {c['name']}", file=sys.stderr)
        print(f"selftest finished in {time.perf_counter() - start:.1f}s", file=sys.stderr)
        _emit(to_json(report), args.output)
        return 0 if report["all_pass"] else 2

    try:
        summary = run(_config(args))
        text = to_json(summary) if args.format == "json" else to_csv(summary)
        _emit(text, args.output)
    except (ValueError, KeyError) as exc:
        print(f"qbc3: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"qbc3: cannot write output: {exc}", file=sys.stderr)
        return 1
    chk = summary.get("analytic")
    if chk:
        flag = "PASS" if chk["pass"] else "FAIL"
        print(f"{flag}  |empirical - reference| = {chk['abs_deviation']:.3g}", file=sys.stderr)
    return 0


if __name__ == "__main__":
    sys.exit(main())
