"""Closed-form security bounds with exact integer combinatorics.

Every ``*_exact`` function returns a :class:`fractions.Fraction`; the plain
versions convert to ``float`` at the end. Parity requirements are enforced
rather than rounded.
"""
from __future__ import annotations

import math
from fractions import Fraction

# rational enclosure of pi, used for exact comparisons against 1/sqrt(pi l)
PI_LOWER = Fraction("3.14159265358979323846")
PI_UPPER = Fraction("3.14159265358979323847")


def _check_odd(n: int) -> int:
    if n < 1 or n % 2 == 0:
        raise ValueError(f"n must be an odd positive integer, got {n}")
    return (n - 1) // 2


def helstrom_gap_m1_exact(n: int) -> Fraction:
    """Optimal advantage over 1/2 for one signal among ``n`` slots, per unit ``lambda_+``."""
    l = _check_odd(n)
    return Fraction(math.comb(2 * l, l), 2**n)


def helstrom_gap_m1(n: int, lambda_plus: float = 1.0) -> float:
    if not 0.0 <= lambda_plus <= 1.0:
        raise ValueError("lambda_plus must lie in [0, 1]")
    return lambda_plus * float(helstrom_gap_m1_exact(n))


def structured_gap_exact(n: int) -> Fraction:
    """Same advantage obtained from the diagonal spectrum of ``rho_0 - rho_1``.

    The difference operator is diagonal in the product eigenbasis with entry
    ``(2k - n) / (n 2^(n-1))`` on each string with ``k`` positive outcomes,
    so the trace norm is a binomial sum. Returns a quarter of it.
    """
    if n < 1:
        raise ValueError("n must be positive")
    total = sum(math.comb(n, k) * abs(2 * k - n) for k in range(n + 1))
    return Fraction(total, n * 2 ** (n - 1)) / 4


def helstrom_gap_upper(l: int) -> float:
    if l < 1:
        raise ValueError("upper bound undefined for l < 1")
    return 1.0 / (2.0 * math.sqrt(math.pi * l))


def helstrom_gap_lower(l: int) -> float:
    if l < 1:
        raise ValueError("lower bound undefined for l < 1")
    return 1.0 / (4.0 * math.sqrt(l))


def below_upper_exact(gap: Fraction, l: int, scale: int = 1) -> bool:
    """Exact test of ``gap < scale / (2 sqrt(pi l))`` using a rational bound on pi."""
    # gap^2 * 4 pi l < scale^2, checked with pi rounded up
    return gap * gap * 4 * PI_UPPER * l < scale * scale


def above_lower_exact(gap: Fraction, l: int) -> bool:
    """Exact test of ``gap > 1 / (4 sqrt l)``."""
    return gap * gap * 16 * l > 1


def guess_baseline(n: int) -> float:
    if n < 1:
        raise ValueError("n must be positive")
    return 0.5 * (1.0 + 1.0 / n)


def _check_majority(n: int, m: int) -> tuple[int, int]:
    l = _check_odd(n)
    if not 1 <= m < n or (n - m) % 2:
        raise ValueError(f"need n > m >= 1 with n - m even, got n={n}, m={m}")
    return l, (n - m) // 2


def majority_gap_exact(n: int, m: int) -> Fraction:
    """Majority-vote advantage with ``m`` identical signals and ``n - m`` decoys.

    Binomials with ``k > n - m`` count as zero.
    """
    l, lp = _check_majority(n, m)
    d = n - m
    head = Fraction(math.comb(d, lp), 2 ** (d + 1))
    tail = Fraction(sum(math.comb(d, k) for k in range(lp + 1, l + 1)), 2**d)
    return head + tail


def majority_gap(n: int, m: int) -> float:
    return float(majority_gap_exact(n, m))


def majority_gap_enumerated(n: int, m: int) -> Fraction:
    """Brute-force the majority vote over all ``2^(n-m)`` decoy outcome strings.

    Each signal qubit reports the committed bit with certainty; each decoy
    reports a fair coin.
    """
    _check_majority(n, m)
    d = n - m
    wins = 0
    for word in range(2**d):
        plus = m + bin(word).count("1")
        wins += plus > n - plus
    return Fraction(wins, 2**d) - Fraction(1, 2)


def majority_gap_upper(n: int, m: int) -> float:
    _, lp = _check_majority(n, m)
    if lp < 1:
        raise ValueError("upper bound undefined for l' = 0")
    return (m + 1) / (2.0 * math.sqrt(math.pi * lp))


def hypergeom_miss_exact(n: int, m: int) -> Fraction:
    """Probability that ``m`` guessed positions avoid all ``m`` signal positions."""
    if m < 0 or n < m:
        raise ValueError(f"need 0 <= m <= n, got n={n}, m={m}")
    return Fraction(math.comb(n - m, m), math.comb(n, m))


def hypergeom_miss(n: int, m: int) -> float:
    return float(hypergeom_miss_exact(n, m))


def adam_decay(p_bar: float, m: int) -> float:
    if not 0.0 <= p_bar <= 1.0:
        raise ValueError("p_bar must lie in [0, 1]")
    if m < 0:
        raise ValueError("m must be non-negative")
    return p_bar**m


def ordered_placements(n: int, m: int) -> int:
    if m < 0 or n < 0:
        raise ValueError("n and m must be non-negative")
    if m > n:
        raise ValueError(f"cannot place m={m} qubits in n={n} slots")
    return math.perm(n, m)
