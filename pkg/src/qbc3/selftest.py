"""Reproduction checks for every quantitative claim, runnable from the CLI.

Each ``criterion_*`` returns a JSON-ready dict with an ``id``, a ``pass``
flag and the numbers behind it. Nothing timing-dependent goes into the
dict except the coarse runtime-budget flag, so reports are byte-stable.
"""
from __future__ import annotations

import math
import time
from fractions import Fraction

import numpy as np

from . import __version__, attacks, bounds
from .linalg import fidelity, trace_norm
from .montecarlo import binomial_sigma, child_seed, run_trials
from .protocol import run_honest
from .qubit import lambda_plus

THETAS = {"pi": math.pi, "pi/2": math.pi / 2, "pi/4": math.pi / 4}


def _result(cid: int, name: str, passed: bool, **details) -> dict:
    return {"id": cid, "name": name, "pass": bool(passed), **details}


def criterion_1() -> dict:
    start = time.perf_counter()
    worst = 0.0
    rows = []
    for label, theta in THETAS.items():
        for n in (1, 3, 5, 7, 9, 11):
            rho0 = attacks.babe_density(n, 1, 0, theta)
            rho1 = attacks.babe_density(n, 1, 1, theta)
            dense = 0.25 * trace_norm(rho0 - rho1, tol=1e-10)
            closed = bounds.helstrom_gap_m1(n, lambda_plus(theta))
            worst = max(worst, abs(dense - closed))
            rows.append({"n": n, "theta": label, "closed_form": closed, "dense": dense})
    elapsed = time.perf_counter() - start
    return _result(1, "closed-form gap equals dense trace norm", worst <= 1e-9 and elapsed < 30.0,
                   max_abs_deviation=worst, tolerance=1e-9, runtime_under_30s=elapsed < 30.0, rows=rows)


def criterion_2() -> dict:
    bad = [l for l in range(1, 1001) if not bounds.below_upper_exact(bounds.helstrom_gap_m1_exact(2 * l + 1), l)]
    return _result(2, "gap below 1/(2 sqrt(pi l)) for 1 <= l <= 1000", not bad, violations=bad)


def criterion_3() -> dict:
    bad = [l for l in range(2, 1001) if not bounds.above_lower_exact(bounds.helstrom_gap_m1_exact(2 * l + 1), l)]
    gap1 = bounds.helstrom_gap_m1_exact(3)
    return _result(3, "gap above 1/(4 sqrt l) for 2 <= l <= 1000", not bad, violations=bad,
                   l1_gap=str(gap1), l1_bound="1/4", l1_strict_inequality_fails=gap1 == Fraction(1, 4))


def criterion_4() -> dict:
    reduce_bad = [n for n in range(3, 22, 2) if bounds.majority_gap_exact(n, 1) != bounds.helstrom_gap_m1_exact(n)]
    enum = []
    worst = 0.0
    for n, m in ((5, 1), (7, 3), (9, 3), (11, 5)):
        formula = bounds.majority_gap_exact(n, m)
        oracle = bounds.majority_gap_enumerated(n, m)
        worst = max(worst, abs(float(formula - oracle)))
        enum.append({"n": n, "m": m, "formula": str(formula), "enumerated": str(oracle)})
    return _result(4, "majority formula reduces at m=1 and matches enumeration", not reduce_bad and worst <= 1e-12,
                   reduction_failures=reduce_bad, enumeration=enum, max_abs_deviation=worst)


def criterion_5() -> dict:
    checked, bad = 0, []
    for n in range(3, 42, 2):
        for m in range(1, n, 2):
            lp = (n - m) // 2
            checked += 1
            if not bounds.below_upper_exact(bounds.majority_gap_exact(n, m), lp, scale=m + 1):
                bad.append([n, m])
    return _result(5, "majority gap below (m+1)/(2 sqrt(pi l'))", not bad, pairs_checked=checked, violations=bad)


def _honest_sample(rng, m, n):
    return bool(run_honest(m, n, int(rng.integers(2)), rng).verdict.accepted)


def _honest_analytic(rng, m, n):
    return run_honest(m, n, int(rng.integers(2)), rng, sample=False).verdict.probability


def criterion_6(seed: int, honest_trials: int = 10_000, workers=None) -> dict:
    worst = 0.0
    rejected = []
    configs = [(m, n) for m in range(1, 5) for n in range(m, 12)]
    for k, (m, n) in enumerate(configs):
        probs = run_trials(_honest_analytic, 100, child_seed(seed, 2 * k), (m, n), workers)
        worst = max(worst, max(abs(1.0 - p) for p in probs))
        accepts = run_trials(_honest_sample, honest_trials, child_seed(seed, 2 * k + 1), (m, n), workers)
        if not all(accepts):
            rejected.append({"m": m, "n": n, "rejections": honest_trials - sum(accepts)})
    return _result(6, "honest runs always accept", worst <= 1e-12 and not rejected,
                   configs=len(configs), samples_per_config=honest_trials,
                   max_analytic_deficit=worst, sampled_rejections=rejected)


def _within(emp: float, ref: float, trials: int, k: float = 3.0) -> tuple[bool, float]:
    sigma = binomial_sigma(ref, trials)
    return abs(emp - ref) <= k * sigma, sigma


def criterion_7(seed: int, trials: int = 100_000, workers=None) -> dict:
    rows, ok = [], True
    for m, n in ((1, 5), (2, 9), (3, 9)):
        r = attacks.adam_relabel_attack(n, m, trials=trials, seed=child_seed(seed, 100 + m), workers=workers)
        good, sigma = _within(r.empirical_success, 0.5**m, trials)
        ok &= good
        rows.append({"m": m, "n": n, "empirical": r.empirical_success, "reference": 0.5**m, "sigma": sigma, "pass": good})
    return _result(7, "relabel attack succeeds with probability 2^-m", ok, trials=trials, rows=rows)


def criterion_8(seed: int, trials: int = 100_000, workers=None) -> dict:
    rows, ok = [], True
    for m in (1, 2, 3):
        n = 2 * m + 3
        r = attacks.adam_clone_attack(n, m, trials=trials, seed=child_seed(seed, 200 + m), workers=workers)
        ex = r.extras
        p_analytic = ex["per_qubit_analytic"]
        per_qubit_ok = abs(ex["per_qubit_empirical"] - p_analytic) <= 1e-2
        seq_ok, sigma = _within(r.empirical_success, p_analytic**m, trials)
        cost_ok = ex["per_qubit_empirical"] < 0.95
        ok &= per_qubit_ok and seq_ok and cost_ok
        rows.append({
            "m": m, "n": n,
            "per_qubit_empirical": ex["per_qubit_empirical"], "per_qubit_analytic": p_analytic,
            "sequence_empirical": r.empirical_success, "sequence_reference": p_analytic**m, "sigma": sigma,
            "per_qubit_pass": per_qubit_ok, "sequence_pass": seq_ok, "no_cloning_cost_visible": cost_ok,
        })
    return _result(8, "clone attack matches the cloner's analytic acceptance", ok, trials=trials, rows=rows)


def criterion_9() -> dict:
    r = attacks.epr_demo_naive(attacks.bb84_spec())
    ok = abs(r["babe_helstrom"] - 0.5) <= 1e-10 and r["achieved_overlap"] >= 1 - 1e-9
    return _result(9, "perfectly concealing naive scheme is perfectly switchable", ok, **r)


def perturbed_specs(seed: int, count: int = 20) -> list[attacks.NaiveProtocolSpec]:
    """Random small perturbations of the computational/diagonal pair."""
    rng = np.random.default_rng(child_seed(seed, 900))
    specs = []
    s = 1 / math.sqrt(2)
    base0 = [np.array([1, 0], complex), np.array([0, 1], complex)]
    base1 = [np.array([s, s], complex), np.array([s, -s], complex)]
    for _ in range(count):
        eps = rng.uniform(0.01, 0.3)
        ens = []
        for base in (base0, base1):
            p = 0.5 + eps * rng.uniform(-0.5, 0.5)
            states = []
            for v in base:
                w = v + eps * (rng.standard_normal(2) + 1j * rng.standard_normal(2))
                states.append(w / np.linalg.norm(w))
            ens.append([(p, states[0]), (1 - p, states[1])])
        specs.append(attacks.NaiveProtocolSpec(*ens))
    return specs


def criterion_10(seed: int) -> dict:
    worst, excess = 0.0, -math.inf
    rows = []
    for spec in perturbed_specs(seed):
        phi0, phi1 = attacks.epr_build_purifications(spec)
        f = fidelity(spec.density(0), spec.density(1))
        _, achieved = attacks.epr_cheat_unitary(phi0, phi1)
        worst = max(worst, abs(achieved - f))
        excess = max(excess, achieved - f)
        rows.append({"fidelity": f, "achieved_overlap": achieved,
                     "babe_helstrom": attacks.helstrom_success(spec.density(0), spec.density(1))})
    return _result(10, "switching overlap reaches the fidelity and never exceeds it",
                   worst <= 1e-6 and excess <= 1e-6, max_abs_deviation=worst, max_excess=excess, rows=rows)


def criterion_11() -> dict:
    exact = bounds.hypergeom_miss_exact(100, 5)
    exact_ok = exact == Fraction(math.comb(95, 5), math.comb(100, 5)) and abs(float(exact) - 0.7696) <= 5e-5
    monotone = {}
    for m in (1, 2, 5):
        vals = [bounds.hypergeom_miss_exact(n, m) for n in range(2 * m, 10_001)]
        increasing = all(a < b for a, b in zip(vals, vals[1:]))
        monotone[str(m)] = {"strictly_increasing": increasing, "below_one": vals[-1] < 1,
                            "value_at_10000": float(vals[-1])}
    ok = exact_ok and all(v["strictly_increasing"] and v["below_one"] and v["value_at_10000"] > 0.99
                          for v in monotone.values())
    return _result(11, "hypergeometric miss probability", ok, n100_m5=str(exact), n100_m5_float=float(exact),
                   monotone=monotone)


def criterion_12() -> dict:
    values = {n: attacks.babe_entangled_attack(n, 1) for n in (1, 3, 5)}
    v = {n: r.empirical_success for n, r in values.items()}
    ok = abs(v[1] - 1.0) <= 1e-9 and v[1] > v[3] > v[5]
    rows = [{"n": n, "joint_helstrom": r.empirical_success, "unentangled_optimum": r.extras["unentangled_optimum"],
             "gap_vs_unentangled": r.extras["gap_vs_unentangled"], "miss_probability": r.extras["miss_probability"]}
            for n, r in values.items()]
    return _result(12, "entangled inputs: exact joint discrimination", ok, rows=rows,
                   entanglement_improves=any(r["gap_vs_unentangled"] > 1e-9 for r in rows))


def run_selftest(seed: int = 0, trials: int = 100_000, honest_trials: int = 10_000, workers=None, only=None) -> dict:
    checks = {
        1: criterion_1,
        2: criterion_2,
        3: criterion_3,
        4: criterion_4,
        5: criterion_5,
        6: lambda: criterion_6(seed, honest_trials, workers),
        7: lambda: criterion_7(seed, trials, workers),
        8: lambda: criterion_8(seed, trials, workers),
        9: criterion_9,
        10: lambda: criterion_10(seed),
        11: criterion_11,
        12: criterion_12,
    }
    wanted = sorted(checks) if not only else sorted(only)
    results = [checks[i]() for i in wanted]
    return {
        "schema_version": 1,
        "software_version": __version__,
        "command": "selftest",
        "seed": seed,
        "trials": trials,
        "honest_trials": honest_trials,
        "criteria": results,
        "all_pass": all(r["pass"] for r in results),
    }
