"""Reproducible trial execution.

Trial ``t`` of a run with root seed ``s`` draws from its own generator,
seeded with the ``t``-th output of a splitmix64 stream started at ``s``:

    state_t = (s + (t + 1) * 0x9E3779B97F4A7C15) mod 2**64
    seed_t  = mix64(state_t)

``mix64`` is a bijection on 64-bit words, so distinct trials never share a
seed. Results are collected by trial index, which makes every aggregate
independent of how trials are spread over workers.
"""
from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from typing import Any, Callable, Sequence

import numpy as np

MASK64 = (1 << 64) - 1
GOLDEN_GAMMA = 0x9E3779B97F4A7C15
WORKERS_ENV = "QBC3_WORKERS"


def mix64(z: int) -> int:
    z &= MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def child_seed(root: int, t: int) -> int:
    if not 0 <= root <= MASK64:
        raise ValueError("seed must be a 64-bit unsigned integer")
    return mix64(root + (t + 1) * GOLDEN_GAMMA)


def trial_rng(root: int, t: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(child_seed(root, t)))


def default_workers() -> int:
    raw = os.environ.get(WORKERS_ENV, "").strip()
    if not raw:
        return 1
    workers = int(raw)
    if workers < 1:
        raise ValueError(f"{WORKERS_ENV} must be a positive integer")
    return workers


def _run_chunk(fn: Callable, seed: int, start: int, stop: int, args: tuple) -> list:
    return [fn(trial_rng(seed, t), *args) for t in range(start, stop)]


def run_trials(
    fn: Callable[..., Any],
    trials: int,
    seed: int,
    args: Sequence = (),
    workers: int | None = None,
) -> list:
    """Evaluate ``fn(rng_t, *args)`` for ``t in range(trials)``.

    ``fn`` must be a module-level function when ``workers > 1``.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    workers = default_workers() if workers is None else workers
    args = tuple(args)
    if workers <= 1 or trials < 2 * workers:
        return _run_chunk(fn, seed, 0, trials, args)
    bounds = np.linspace(0, trials, workers * 4 + 1).astype(int)
    with ProcessPoolExecutor(max_workers=workers) as pool:
        futures = [
            pool.submit(_run_chunk, fn, seed, int(a), int(b), args)
            for a, b in zip(bounds[:-1], bounds[1:])
            if b > a
        ]
        results: list = []
        for f in futures:
            results.extend(f.result())
    return results


def wilson_interval(successes: int, trials: int, z: float = 1.96) -> tuple[float, float]:
    if trials < 1:
        raise ValueError("trials must be >= 1")
    if not 0 <= successes <= trials:
        raise ValueError("successes must lie in [0, trials]")
    p = successes / trials
    z2 = z * z
    denom = 1.0 + z2 / trials
    centre = (p + z2 / (2 * trials)) / denom
    half = z * math.sqrt(p * (1 - p) / trials + z2 / (4 * trials * trials)) / denom
    lo, hi = max(0.0, centre - half), min(1.0, centre + half)
    # guard the p-hat containment against last-bit rounding
    return min(lo, p), max(hi, p)


def binomial_sigma(p: float, trials: int) -> float:
    return math.sqrt(max(p * (1.0 - p), 0.0) / trials)
