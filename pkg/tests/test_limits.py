import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.special import ndtr

from lacunary.errors import BudgetError, DomainError, RangeError
from lacunary.limits import (
    BernoulliSumLaw,
    DiscreteLaw,
    berry_esseen_rate_fit,
    binomial_law,
    exact_law,
    kolmogorov_distance,
    llt_statistic,
    moderate_deviation_check,
    monte_carlo_law,
    normal_tail,
    sign_sum_law,
    tail_ratio_extended_clt,
    walsh_law,
    window_length,
)
from lacunary.series import (
    CoefficientTriangle,
    DyadicStepFunction,
    bernoulli1,
    interleaved_sequence,
    power_sequence,
    trig_sum,
    walsh_partial_sum,
)


class TestDiscreteLaw:
    def test_exact_law_example(self):
        S = DyadicStepFunction(2, np.array([2.0, 0.0, 0.0, -2.0]))
        law = exact_law(S)
        assert law.atoms == [(-2.0, Fraction(1, 4)), (0.0, Fraction(1, 2)), (2.0, Fraction(1, 4))]
        assert law.cdf(0.0) == 0.75 and law.cdf_left(0.0) == 0.25
        assert law.interval_mass(-2.0, 2.0) == Fraction(3, 4)
        assert law.prob_ge(2.0) == 0.25
        assert law.mean() == 0 and law.variance() == 2

    def test_grouping_absorbs_rounding(self):
        S = DyadicStepFunction(1, np.array([0.1 + 0.2, 0.3]))
        assert len(exact_law(S).atoms) == 1

    def test_invariants(self):
        with pytest.raises(DomainError):
            DiscreteLaw(np.array([0.0, 1.0]), (1, 0), 1)
        with pytest.raises(DomainError):
            DiscreteLaw(np.array([1.0, 0.0]), (1, 1), 2)
        with pytest.raises(DomainError):
            DiscreteLaw(np.array([0.0, 1.0]), (1, 1), 3)

    @pytest.mark.parametrize("n", [1, 5, 17, 40])
    def test_binomial(self, n):
        law = binomial_law(n, 0.5)
        for (v, m), k in zip(law.atoms, range(n + 1)):
            assert v == pytest.approx(0.5 * (2 * k - n))
            assert m == Fraction(math.comb(n, k), 2**n)

    def test_sign_sum_matches_enumeration(self):
        a = [0.5, 0.25, 1.0, 0.75]
        dist = {}
        for signs in range(16):
            s = sum(x if (signs >> i) & 1 else -x for i, x in enumerate(a))
            dist[s] = dist.get(s, 0) + 1
        law = sign_sum_law(a)
        assert {v: m for v, m in law.atoms} == {k: Fraction(c, 16) for k, c in dist.items()}
        with pytest.raises(BudgetError):
            sign_sum_law([1.0, 2.0**-10, 2.0**-20, 2.0**-30], max_atoms=4)

    def test_walsh_law_both_paths(self):
        c = CoefficientTriangle.from_rows(np.linspace(0.2, 1.0, 8))
        seq = power_sequence(2, 8)
        a = walsh_law(seq, c, 8)
        b = exact_law(walsh_partial_sum(seq, c, 8))
        assert np.allclose(a.values, b.values)
        assert [m for _, m in a.atoms] == [m for _, m in b.atoms]
        law = walsh_law(interleaved_sequence(10), CoefficientTriangle.unit(), 10)
        assert sum(law.counts) == law.denominator

    @given(st.lists(st.integers(-4, 4), min_size=1, max_size=64), st.floats(-6, 6))
    @settings(max_examples=100, deadline=None)
    def test_cdf_properties(self, vals, x):
        L = max(1, (len(vals) - 1).bit_length())
        v = np.resize(np.array(vals, dtype=float), 1 << L)
        law = exact_law(DyadicStepFunction(L, v))
        assert law.cdf_left(x) <= law.cdf(x)
        assert law.cdf(x) <= law.cdf(x + 0.5)
        assert law.cdf(10.0) == 1.0 and law.cdf(-10.0) == 0.0
        assert law.prob_ge(x) + law.cdf_left(x) == pytest.approx(1.0)

    def test_monte_carlo(self):
        law = monte_carlo_law(lambda x: np.floor(4 * x), N=1 << 12)
        assert law.counts == (1024,) * 4
        assert law.source != "dyadic-cells"

    def test_monte_carlo_large_frequencies(self):
        h = trig_sum(power_sequence(2, 128), CoefficientTriangle.flat(0.5, "trig"), 128)
        law = monte_carlo_law(h, N=1 << 14)
        assert law.source.startswith("orbit-sample")
        assert kolmogorov_distance(law, scale=math.sqrt(0.5)) < 0.03


class TestKolmogorov:
    def test_single_sign(self):
        law = binomial_law(1, 1.0)
        assert kolmogorov_distance(law) == pytest.approx(0.3413447460685429, abs=1e-15)

    def test_discretised_normal(self):
        x = np.linspace(-8, 8, 4001)
        F = np.concatenate(([0.0], ndtr(0.5 * (x[1:] + x[:-1])), [1.0]))
        den = 1 << 40
        counts = np.diff(np.round(F * den)).astype(np.int64)
        keep = counts > 0
        law = DiscreteLaw(x[keep], tuple(int(c) for c in counts[keep]), int(sum(counts[keep])))
        assert kolmogorov_distance(law) <= law.masses.max()

    @given(st.floats(-5, 5))
    @settings(max_examples=50, deadline=None)
    def test_sup_over_atoms_covers_gaps(self, x):
        law = binomial_law(7, 0.4)
        d = kolmogorov_distance(law)
        assert abs(law.cdf(x) - ndtr(x)) <= d + 1e-15

    def test_rate_fit(self):
        A = np.array([2.0, 4.0, 8.0, 16.0])
        pts = list(zip(A, 0.3 * A**-1.2))
        assert berry_esseen_rate_fit(pts) == pytest.approx(-1.2, abs=1e-12)
        with pytest.raises(DomainError):
            berry_esseen_rate_fit(pts[:2])
        with pytest.raises(DomainError):
            berry_esseen_rate_fit([(1, 0.1), (2, 0.0), (3, 0.1)])

    def test_walsh_flat_rate(self):
        c = CoefficientTriangle.flat(0.25)
        pts = []
        for n in (2**8, 2**10, 2**12):
            law = binomial_law(n, n**-0.25)
            pts.append((c.A(n), kolmogorov_distance(law, scale=c.A(n))))
        assert berry_esseen_rate_fit(pts) == pytest.approx(-2, abs=0.1)


class TestBernoulliSumLaw:
    @pytest.mark.parametrize("n", [1, 3, 6])
    def test_against_fine_grid(self, n):
        L = 20
        x = (np.arange(1 << L) + 0.5) / (1 << L)
        S = sum(bernoulli1(np.ldexp(x, k)) for k in range(1, n + 1))
        S.sort()
        law = BernoulliSumLaw(n)
        pts = np.linspace(-n / 2 - 0.1, n / 2 + 0.1, 57)
        emp = np.searchsorted(S, pts, side="right") / S.size
        # S has slope 2**(n+1) - 2 on each cell, so one cell moves it by < 2**(n+1-L)
        assert np.max(np.abs(law.cdf(pts) - emp)) < 2.0 ** (n + 2 - L)

    def test_moments_and_symmetry(self):
        law = BernoulliSumLaw(10)
        assert law.variance == pytest.approx(10 / 4 - 1 / 3 + 1 / (3 * 2**10))
        assert law.cdf(0.0) == pytest.approx(0.5, abs=1e-12)
        assert law.prob_ge(0.7) == pytest.approx(1 - law.cdf(0.7), abs=1e-12)
        with pytest.raises(DomainError):
            BernoulliSumLaw(0)

    def test_kolmogorov_decreases(self):
        d = [BernoulliSumLaw(n).kolmogorov_distance() for n in (16, 64)]
        # rate A_n**-2 = 4/n: a factor 4 in n gives a factor 4 in d
        assert d[1] == pytest.approx(d[0] / 4, rel=0.1)


class TestLocalAndTails:
    def test_llt_gaussianish(self):
        n = 4096
        law = binomial_law(n, 1.0)
        A = math.sqrt(n)
        # lattice span 2: window of length 2 sees exactly one atom
        v = llt_statistic(law, A, 0.0, (-1.0, 1.0), delta=0.5)
        assert v == pytest.approx(2 / math.sqrt(2 * math.pi), rel=1e-3)
        assert window_length([(-1, 0), (2, 3)]) == 2
        with pytest.raises(DomainError):
            llt_statistic(law, A, 0.0, (1.0, 1.0))
        with pytest.raises(DomainError):
            llt_statistic(law, A, 0.0, (-1.0, 1.0), delta=0.9, gamma=0.25)

    def test_llt_walsh(self):
        n = 2**16
        law = binomial_law(n, n**-0.25)
        A = CoefficientTriangle.flat(0.25).A(n)
        v = llt_statistic(law, A, 0.0, (-0.5, 0.5))
        assert abs(v - 1 / math.sqrt(2 * math.pi)) < 1e-2

    def test_tail_ratio(self):
        law = binomial_law(2**14, 1.0)
        A = math.sqrt(2**14)
        assert tail_ratio_extended_clt(law, A, 0.0) == pytest.approx(1.0, abs=1e-2)
        assert tail_ratio_extended_clt(law, A, 1.0) == pytest.approx(1.0, abs=2e-2)
        with pytest.raises(DomainError):
            tail_ratio_extended_clt(law, A, -1.0)
        with pytest.raises(RangeError):
            tail_ratio_extended_clt(law, A, 40.0)
        assert normal_tail(0.0) == 0.5

    def test_moderate_deviation_mirror(self):
        law = binomial_law(2**12, 2**-3)
        A = math.sqrt(law.variance())
        psi = lambda y: 1.0  # noqa: E731
        up = moderate_deviation_check(law, A, 0.05, psi, t_n=A)
        down = moderate_deviation_check(law, A, -0.05, psi, t_n=A)
        assert up == down
        with pytest.raises(DomainError):
            moderate_deviation_check(law, A, 0.0, psi)
