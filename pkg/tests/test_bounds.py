import math
from fractions import Fraction

import pytest

from qbc3 import bounds
from qbc3.attacks import babe_helstrom_exact
from qbc3.qubit import lambda_plus


class TestHelstromGap:
    @pytest.mark.parametrize("n, expected", [(1, 0.5), (3, 0.25), (5, 0.1875)])
    def test_values(self, n, expected):
        assert bounds.helstrom_gap_m1(n, 1.0) == expected

    def test_even_rejected(self):
        with pytest.raises(ValueError):
            bounds.helstrom_gap_m1(4)

    def test_lambda_scaling(self):
        assert bounds.helstrom_gap_m1(3, math.sqrt(2) / 2) == pytest.approx(0.25 * math.sqrt(2) / 2)

    @pytest.mark.parametrize("n", [1, 3, 5, 7, 9])
    @pytest.mark.parametrize("theta", [math.pi, math.pi / 2, math.pi / 4])
    def test_matches_dense_trace_norm(self, n, theta):
        dense = babe_helstrom_exact(n, 1, theta) - 0.5
        assert abs(dense - bounds.helstrom_gap_m1(n, lambda_plus(theta))) <= 1e-9

    @pytest.mark.parametrize("n", range(1, 22, 2))
    def test_structured_spectrum_identity(self, n):
        assert bounds.structured_gap_exact(n) == bounds.helstrom_gap_m1_exact(n)

    def test_strictly_decreasing(self):
        vals = [bounds.helstrom_gap_m1_exact(n) for n in range(1, 202, 2)]
        assert all(a > b for a, b in zip(vals, vals[1:]))


class TestHelstromBounds:
    def test_upper_values(self):
        assert bounds.helstrom_gap_upper(1) == pytest.approx(0.282095, abs=1e-6)
        assert bounds.helstrom_gap_m1(3) < bounds.helstrom_gap_upper(1)
        assert bounds.helstrom_gap_upper(100) == pytest.approx(0.0282, abs=1e-4)
        assert bounds.helstrom_gap_m1(201) < bounds.helstrom_gap_upper(100)

    def test_lower_values(self):
        assert bounds.helstrom_gap_lower(1) == 0.25
        assert bounds.helstrom_gap_m1(3) == 0.25  # boundary: the strict lower bound fails at l = 1
        assert not bounds.above_lower_exact(bounds.helstrom_gap_m1_exact(3), 1)
        assert bounds.helstrom_gap_lower(2) == pytest.approx(0.17678, abs=1e-5)
        assert bounds.helstrom_gap_lower(2) < bounds.helstrom_gap_m1(5)
        assert bounds.helstrom_gap_lower(10) == pytest.approx(0.0791, abs=1e-4)
        assert bounds.helstrom_gap_lower(10) < bounds.helstrom_gap_m1(21)

    @pytest.mark.parametrize("f", [bounds.helstrom_gap_upper, bounds.helstrom_gap_lower])
    def test_l_zero_rejected(self, f):
        with pytest.raises(ValueError):
            f(0)

    def test_sandwich(self):
        for l in range(2, 1001):
            gap = bounds.helstrom_gap_m1_exact(2 * l + 1)
            assert bounds.above_lower_exact(gap, l)
            assert bounds.below_upper_exact(gap, l)

    def test_exact_comparisons_agree_with_floats_away_from_ties(self):
        for l in (2, 7, 50):
            gap = bounds.helstrom_gap_m1_exact(2 * l + 1)
            assert float(gap) < bounds.helstrom_gap_upper(l)
            assert float(gap) > bounds.helstrom_gap_lower(l)

    def test_pi_enclosure(self):
        mpmath = pytest.importorskip("mpmath")
        mpmath.mp.dps = 40
        assert mpmath.mpf(bounds.PI_LOWER.numerator) / bounds.PI_LOWER.denominator < mpmath.pi
        assert mpmath.mpf(bounds.PI_UPPER.numerator) / bounds.PI_UPPER.denominator > mpmath.pi


class TestGuessBaseline:
    @pytest.mark.parametrize("n, expected", [(1, 1.0), (5, 0.6), (9, 5 / 9)])
    def test_values(self, n, expected):
        assert bounds.guess_baseline(n) == pytest.approx(expected, abs=1e-15)


class TestMajority:
    def test_m1_n3(self):
        assert bounds.majority_gap_exact(3, 1) == Fraction(math.comb(2, 1), 2**3) == Fraction(1, 4)

    def test_m1_n5(self):
        assert bounds.majority_gap_exact(5, 1) == Fraction(6, 32)

    @pytest.mark.parametrize("n, m", [(9, 3), (5, 1), (7, 3), (11, 5), (5, 3), (13, 11)])
    def test_matches_enumeration(self, n, m):
        assert bounds.majority_gap_exact(n, m) == bounds.majority_gap_enumerated(n, m)

    @pytest.mark.parametrize("n", range(3, 22, 2))
    def test_reduces_to_single_signal(self, n):
        assert bounds.majority_gap_exact(n, 1) == bounds.helstrom_gap_m1_exact(n)

    @pytest.mark.parametrize("n, m", [(4, 1), (5, 2), (5, 5), (3, 0)])
    def test_parity_rejected(self, n, m):
        with pytest.raises(ValueError):
            bounds.majority_gap(n, m)

    def test_upper(self):
        assert bounds.majority_gap_upper(3, 1) == pytest.approx(0.5642, abs=1e-4)
        assert bounds.majority_gap_upper(3, 1) >= bounds.majority_gap(3, 1)
        assert bounds.majority_gap_upper(9, 3) == pytest.approx(0.6515, abs=1e-4)
        assert bounds.majority_gap_upper(9, 3) >= bounds.majority_gap(9, 3)
        vals = [bounds.majority_gap_upper(2 * lp + 3, 3) for lp in range(1, 2000, 100)]
        assert all(a > b for a, b in zip(vals, vals[1:])) and vals[-1] < 0.05

    def test_upper_holds_everywhere(self):
        for n in range(3, 42, 2):
            for m in range(1, n, 2):
                assert bounds.below_upper_exact(bounds.majority_gap_exact(n, m), (n - m) // 2, scale=m + 1)


class TestHypergeom:
    def test_values(self):
        assert bounds.hypergeom_miss(7, 0) == 1
        assert bounds.hypergeom_miss(2, 1) == 0.5
        exact = bounds.hypergeom_miss_exact(100, 5)
        assert exact == Fraction(math.comb(95, 5), math.comb(100, 5))
        assert float(exact) == pytest.approx(0.7696, abs=5e-5)

    def test_zero_when_too_crowded(self):
        assert bounds.hypergeom_miss(5, 3) == 0

    def test_monotone_to_one(self):
        vals = [bounds.hypergeom_miss_exact(n, 3) for n in range(6, 3000)]
        assert all(a < b for a, b in zip(vals, vals[1:]))
        assert 0.99 < vals[-1] < 1


class TestCounting:
    @pytest.mark.parametrize("n, m, expected", [(4, 0, 1), (5, 2, 20), (10, 3, 720)])
    def test_ordered_placements(self, n, m, expected):
        assert bounds.ordered_placements(n, m) == expected
        assert expected == math.factorial(n) // math.factorial(n - m)

    def test_too_many(self):
        with pytest.raises(ValueError):
            bounds.ordered_placements(2, 3)

    def test_decay(self):
        assert bounds.adam_decay(0.5, 1) == 0.5
        assert bounds.adam_decay(0.37, 0) == 1
        assert bounds.adam_decay(0.5, 10) == pytest.approx(9.766e-4, abs=1e-7)
        with pytest.raises(ValueError):
            bounds.adam_decay(1.5, 2)
