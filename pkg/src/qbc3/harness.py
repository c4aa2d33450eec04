"""Experiment runner behind the command line.

``run`` turns an :class:`ExperimentConfig` into a JSON-ready summary dict.
Summaries are deterministic for a fixed config except for the
``wall_clock_seconds`` field.
"""
from __future__ import annotations

import csv
import io
import json
import math
import re
import time
from dataclasses import asdict, dataclass, field

import numpy as np

from . import __version__, attacks, bounds
from .montecarlo import binomial_sigma, run_trials, wilson_interval
from .protocol import run_honest
from .qubit import lambda_plus

SCHEMA_VERSION = 1
DEFAULT_TRIALS = 100_000

BOUNDS_COLUMNS = [
    "n", "m", "theta", "lambda_plus", "eq7", "eq7_upper", "eq8_lower",
    "eq9", "eq9_upper", "hypergeom_miss", "guess_baseline",
]

_ANGLE = re.compile(r"^\s*([0-9]*\.?[0-9]*)\s*\*?\s*pi\s*(?:/\s*([0-9]*\.?[0-9]+))?\s*$")


def parse_angle(text) -> float:
    """Parse ``pi``, ``pi/2``, ``3pi/4``, ``0.5*pi`` or a plain number of radians."""
    if isinstance(text, (int, float)):
        return float(text)
    m = _ANGLE.match(str(text).lower())
    if m:
        coef = float(m.group(1)) if m.group(1) else 1.0
        div = float(m.group(2)) if m.group(2) else 1.0
        return coef * math.pi / div
    return float(text)


def parse_int_range(text) -> list[int]:
    """``"3..11"``, ``"1,3,5"`` or ``"7"``; ranges are inclusive."""
    if isinstance(text, int):
        return [text]
    out: list[int] = []
    for part in str(text).split(","):
        part = part.strip()
        if ".." in part:
            lo, hi = part.split("..")
            out.extend(range(int(lo), int(hi) + 1))
        elif part:
            out.append(int(part))
    return out


@dataclass
class ExperimentConfig:
    command: str
    role: str | None = None
    strategy: str | None = None
    m: int = 1
    n: int = 5
    theta: float = math.pi
    trials: int = DEFAULT_TRIALS
    seed: int = 0
    sigma_threshold: float = 3.0
    cloner: str = "phase_covariant"
    n_values: list[int] = field(default_factory=list)
    m_values: list[int] = field(default_factory=list)
    per_trial: bool = False
    reveal_secrets: bool = False
    workers: int | None = None

    def validate(self) -> None:
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")
        if self.m < 1 or self.n < 1:
            raise ValueError("m and n must be positive")

    def echo(self) -> dict:
        d = asdict(self)
        d.pop("workers")  # never affects results
        return d


def reference_check(empirical: float, reference: float | None, trials: int, k: float, exact_tol: float = 1e-9) -> dict | None:
    if reference is None:
        return None
    deviation = abs(empirical - reference)
    if trials == 0:
        return {"reference": reference, "abs_deviation": deviation, "tolerance": exact_tol, "pass": deviation <= exact_tol}
    sigma = binomial_sigma(reference, trials)
    passed = deviation <= k * sigma if sigma > 0 else deviation == 0.0
    return {
        "reference": reference,
        "abs_deviation": deviation,
        "sigma": sigma,
        "threshold_sigma": k,
        "pass": passed,
    }


def _trial_honest(rng: np.random.Generator, m: int, n: int, theta: float, reveal: bool) -> dict:
    bit = int(rng.integers(2))
    session = run_honest(m, n, bit, rng, theta, sample=True)
    t = session.transcript(reveal)
    t["analytic_acceptance"] = session.verdict.probability
    return t


def _run_honest(cfg: ExperimentConfig) -> dict:
    rows = run_trials(_trial_honest, cfg.trials, cfg.seed, (cfg.m, cfg.n, cfg.theta, cfg.reveal_secrets), cfg.workers)
    accepted = sum(bool(r["acceptance"]) for r in rows)
    analytic = min(r["analytic_acceptance"] for r in rows)
    out = {
        "aggregate": {
            "trials": cfg.trials,
            "successes": accepted,
            "mean": accepted / cfg.trials,
            "wilson95": list(wilson_interval(accepted, cfg.trials)),
            "min_analytic_acceptance": analytic,
        },
        "analytic": reference_check(accepted / cfg.trials, 1.0, cfg.trials, cfg.sigma_threshold),
    }
    if cfg.per_trial:
        out["per_trial"] = rows
    return out


def run_attack(cfg: ExperimentConfig) -> attacks.AttackReport:
    common = dict(trials=cfg.trials, seed=cfg.seed, workers=cfg.workers)
    key = (cfg.role, cfg.strategy)
    if key == ("babe", "guess"):
        if cfg.m != 1:
            raise ValueError("the position-guess strategy is defined for m = 1")
        return attacks.babe_guess_position(cfg.n, cfg.theta, **common)
    if key == ("babe", "majority"):
        return attacks.babe_majority_vote(cfg.n, cfg.m, cfg.theta, **common)
    if key == ("babe", "helstrom"):
        return attacks.babe_helstrom_report(cfg.n, cfg.m, cfg.theta)
    if key == ("babe", "entangled"):
        return attacks.babe_entangled_attack(cfg.n, cfg.m, cfg.theta)
    if key == ("adam", "relabel"):
        return attacks.adam_relabel_attack(cfg.n, cfg.m, cfg.theta, **common)
    if key == ("adam", "clone"):
        return attacks.adam_clone_attack(cfg.n, cfg.m, cfg.theta, cloner=cfg.cloner, **common)
    raise ValueError(f"unknown attack {cfg.role!r}/{cfg.strategy!r}")


def _run_attack(cfg: ExperimentConfig) -> dict:
    report = run_attack(cfg)
    trials = report.parameters.get("trials", 0)
    out = {
        "report": report.to_dict(),
        "aggregate": {"trials": trials, "mean": report.empirical_success, "wilson95": list(report.wilson95)},
        "analytic": reference_check(report.empirical_success, report.analytic_reference, trials, cfg.sigma_threshold),
    }
    if cfg.strategy == "clone":
        ex = report.extras
        dev = abs(ex["per_qubit_empirical"] - ex["per_qubit_analytic"])
        out["per_qubit_check"] = {"abs_deviation": dev, "tolerance": 1e-2, "pass": dev <= 1e-2}
    return out


def bounds_rows(n_values, m_values, theta: float = math.pi) -> list[dict]:
    """One row per ``(n, m)``; cells whose formula does not apply are ``None``."""
    lam = lambda_plus(theta)
    rows = []
    for n in n_values:
        for m in m_values:
            if not 1 <= m <= n:
                continue
            odd = n % 2 == 1
            l = (n - 1) // 2
            row = {
                "n": n,
                "m": m,
                "theta": theta,
                "lambda_plus": lam,
                "eq7": bounds.helstrom_gap_m1(n, lam) if odd else None,
                "eq7_upper": bounds.helstrom_gap_upper(l) if odd and l >= 1 else None,
                "eq8_lower": bounds.helstrom_gap_lower(l) if odd and l >= 1 else None,
                "eq9": None,
                "eq9_upper": None,
                "hypergeom_miss": bounds.hypergeom_miss(n, m),
                "guess_baseline": bounds.guess_baseline(n),
            }
            if odd and m < n and (n - m) % 2 == 0:
                row["eq9"] = bounds.majority_gap(n, m)
                row["eq9_upper"] = bounds.majority_gap_upper(n, m)
            rows.append(row)
    return rows


def epr_demo_rows(epsilons=(0.0, 0.05, 0.1, 0.2, 0.3, 0.4)) -> list[dict]:
    rows = []
    for eps in epsilons:
        r = attacks.epr_demo_naive(attacks.bb84_spec(eps))
        rows.append({"case": "bb84", "epsilon": eps, **r})
    revealing = attacks.NaiveProtocolSpec([(1.0, [1, 0])], [(1.0, [0, 1])])
    rows.append({"case": "revealing", "epsilon": None, **attacks.epr_demo_naive(revealing)})
    return rows


def run(cfg: ExperimentConfig) -> dict:
    cfg.validate()
    start = time.perf_counter()
    if cfg.command == "honest":
        body = _run_honest(cfg)
    elif cfg.command == "attack":
        body = _run_attack(cfg)
    elif cfg.command == "bounds-table":
        body = {"rows": bounds_rows(cfg.n_values or [cfg.n], cfg.m_values or [cfg.m], cfg.theta)}
    elif cfg.command == "epr-demo":
        body = {"rows": epr_demo_rows()}
    else:
        raise ValueError(f"unknown command {cfg.command!r}")
    return {
        "schema_version": SCHEMA_VERSION,
        "software_version": __version__,
        "command": cfg.command,
        "config": cfg.echo(),
        "seed": cfg.seed,
        **body,
        "wall_clock_seconds": time.perf_counter() - start,
    }


def to_json(summary: dict) -> str:
    return json.dumps(summary, indent=2, sort_keys=True) + "\n"


def _flatten(prefix: str, value, out: dict) -> None:
    if isinstance(value, dict):
        for k, v in value.items():
            _flatten(f"{prefix}.{k}" if prefix else k, v, out)
    elif isinstance(value, (list, tuple)) and not any(isinstance(v, dict) for v in value):
        out[prefix] = ";".join("" if v is None else str(v) for v in value)
    else:
        out[prefix] = "" if value is None else value


def to_csv(summary: dict) -> str:
    """Tables (``rows``) become one CSV line per row; other summaries one flat line."""
    buf = io.StringIO()
    if "rows" in summary:
        rows = summary["rows"]
        cols = BOUNDS_COLUMNS if summary["command"] == "bounds-table" else list(rows[0].keys())
        writer = csv.DictWriter(buf, fieldnames=cols + ["schema_version"], lineterminator="\n")
        writer.writeheader()
        for r in rows:
            cells = {k: ("" if r.get(k) is None else r[k]) for k in cols}
            writer.writerow({**cells, "schema_version": summary["schema_version"]})
        return buf.getvalue()
    flat: dict = {}
    _flatten("", {k: v for k, v in summary.items() if k != "per_trial"}, flat)
    writer = csv.DictWriter(buf, fieldnames=list(flat), lineterminator="\n")
    writer.writeheader()
    writer.writerow(flat)
    return buf.getvalue()
