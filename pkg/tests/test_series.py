import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lacunary.errors import ConstraintError, DomainError, IntegralityError, PrecisionError, SizeError
from lacunary.series import (
    BERNOULLI1,
    COS2PI,
    CoefficientTriangle,
    LacunarySequence,
    PeriodicFunction,
    bernoulli1,
    bernoulli_expansion_weights,
    bernoulli_variance,
    bernoulli_weight_fractions,
    big_gap_sequence,
    dyadic_xor,
    holder_partial_sum,
    interleaved_sequence,
    orbit_sample,
    parse_coefficients,
    parse_sequence,
    power_sequence,
    rademacher,
    step_approximation,
    trig_partial_sum,
    trig_sum,
    walsh,
    walsh_partial_sum,
)


def digit_oracle(x: float, d: int) -> int:
    """Binary digit d (1-based) of x, via exact rationals."""
    return int(Fraction(x) * 2**d) % 2


def walsh_oracle(m: int, x: float) -> int:
    out = 1
    i = 0
    while m:
        if m & 1:
            out *= 1 - 2 * digit_oracle(x, i + 1)
        m >>= 1
        i += 1
    return out


class TestRademacherWalsh:
    def test_examples(self):
        assert rademacher(0, 0.25) == 1
        assert rademacher(0, 0.75) == -1
        assert rademacher(1, 0.25) == -1
        assert walsh(0, 0.6) == 1
        assert walsh(1, 0.3) == 1
        assert walsh(3, 0.25) == -1

    def test_walsh_against_digit_table(self):
        rng = np.random.default_rng(1)
        for x in rng.random(200):
            for m in (1, 2, 3, 5, 12, 1023, 2**30 + 7):
                assert walsh(m, float(x)) == walsh_oracle(m, float(x))

    def test_domain(self):
        for bad in (-0.1, 1.0, 2.5, float("nan")):
            with pytest.raises(DomainError):
                rademacher(0, bad)
        with pytest.raises(DomainError):
            walsh(-1, 0.5)

    def test_vectorised(self):
        x = np.array([0.1, 0.3, 0.6, 0.9])
        assert list(rademacher(0, x)) == [1, 1, -1, -1]

    @given(st.integers(0, 2**20), st.integers(0, 2**20), st.integers(0, 2**22 - 1))
    @settings(max_examples=200, deadline=None)
    def test_product_is_xor(self, k, l, cell):
        x = (cell + 0.5) / 2**22
        assert walsh(k, x) * walsh(l, x) == walsh(dyadic_xor(k, l), x)

    @pytest.mark.parametrize("n", [0, 1, 5, 11])
    def test_rademacher_mean_zero_on_grid(self, n):
        L = n + 1 + 2
        x = np.arange(2**L) / 2**L
        assert int(np.sum(rademacher(n, x))) == 0

    def test_deep_digits_of_doubles_vanish(self):
        assert rademacher(2000, 0.5) == 1


class TestXor:
    def test_examples(self):
        assert dyadic_xor(5, 3) == 6
        assert dyadic_xor(9, 9) == 0
        assert dyadic_xor(9, 0) == 9

    @given(st.integers(0, 2**40), st.integers(0, 2**40), st.integers(0, 2**40))
    def test_group_laws(self, a, b, c):
        assert dyadic_xor(dyadic_xor(a, b), c) == dyadic_xor(a, dyadic_xor(b, c))
        p = dyadic_xor(a, b)
        assert a == dyadic_xor(b, p)


class TestSequences:
    def test_big_gap_examples(self):
        assert big_gap_sequence([2, 3, 4]).terms == (1, 2, 6, 24)
        assert big_gap_sequence([2, 2, 2]).terms == (1, 2, 4, 8)
        assert big_gap_sequence([k + 1 for k in range(1, 5)]).terms == (1, 2, 6, 24, 120)
        assert big_gap_sequence([2, 3]).kind == "big-gap"
        with pytest.raises(ConstraintError):
            big_gap_sequence([2, 1])

    def test_interleaved_certifies_four_thirds(self):
        seq = interleaved_sequence(40)
        assert seq.terms[:8] == (2, 3, 4, 6, 8, 12, 16, 24)
        assert seq.certifies(Fraction(4, 3))
        assert not seq.certifies(Fraction(4, 3) + Fraction(1, 10**9))
        with pytest.raises(ConstraintError):
            LacunarySequence(seq.terms, q=1.34, kind="interleaved-example")

    def test_invariants(self):
        with pytest.raises(ConstraintError):
            LacunarySequence((1, 2, 2), q=1.5)
        with pytest.raises(ConstraintError):
            LacunarySequence((1, 2, 3), q=2)
        s = LacunarySequence((1.0, 2.5, 7.0), q=2.5)
        assert not s.integral
        with pytest.raises(IntegralityError):
            s.require_integral()
        with pytest.raises(SizeError):
            power_sequence(2, 3).head(4)

    def test_power_huge(self):
        s = power_sequence(2, 4096)
        assert s.terms[-1] == 2**4096 and s.integral

    def test_parse(self, tmp_path):
        assert parse_sequence("pow:3", 4).terms == (3, 9, 27, 81)
        assert parse_sequence("example:interleaved", 3).terms == (2, 3, 4)
        assert parse_sequence("biggap:2,3,4", 4).terms == (1, 2, 6, 24)
        p = tmp_path / "m.txt"
        p.write_text("1\n3\n9\n")
        s = parse_sequence(f"file:{p}", 3)
        assert s.terms == (1, 3, 9) and s.certifies(3)
        with pytest.raises(DomainError):
            parse_sequence("nope:1", 3)


class TestCoefficients:
    def test_conventions(self):
        w = CoefficientTriangle.flat(0.25)
        t = CoefficientTriangle.flat(0.25, "trig")
        assert w.A(16) == pytest.approx(16**0.25)
        assert t.A(16) == pytest.approx(16**0.25 / math.sqrt(2))
        assert w.kappa4(16) == pytest.approx(1.0)
        assert CoefficientTriangle.unit().A(9) == pytest.approx(3.0)

    @given(st.lists(st.floats(-5, 5, allow_nan=False), min_size=1, max_size=30))
    def test_c_bounded_by_d_over_A(self, row):
        c = CoefficientTriangle.from_rows(row)
        n = len(row)
        if c.A(n) == 0:
            return
        assert np.all(np.abs(c.c(n)) <= c.d(n) / c.A(n) * (1 + 1e-12))

    def test_custom_rows_and_parse(self, tmp_path):
        c = CoefficientTriangle.from_rows({2: [1.0, 0.5]})
        assert list(c.row(2)) == [1.0, 0.5]
        with pytest.raises(SizeError):
            c.row(3)
        p = tmp_path / "a.txt"
        p.write_text("1 2 3")
        assert list(parse_coefficients(f"file:{p}").row(2)) == [1.0, 2.0]
        assert parse_coefficients("unit").scheme == "unit"
        with pytest.raises(DomainError):
            parse_coefficients("weird")


class TestPartialSums:
    def test_bernoulli1(self):
        assert bernoulli1(0) == -0.5
        assert bernoulli1(0.75) == 0.25
        assert bernoulli1(1.75) == 0.25

    def test_trig_examples(self):
        one = LacunarySequence((1,), q=2)
        u = CoefficientTriangle.unit("trig")
        assert trig_partial_sum(one, u, 1, 0.0) == 1.0
        assert abs(trig_partial_sum(one, u, 1, 0.25)) < 1e-15
        seq = LacunarySequence((2, 4, 8), q=2)
        ref = sum(math.cos(2 * math.pi * m * 0.1) for m in (2, 4, 8))
        assert trig_partial_sum(seq, u, 3, 0.1) == pytest.approx(ref, abs=1e-14)
        with pytest.raises(SizeError):
            trig_partial_sum(seq, u, 4, 0.1)

    def test_walsh_partial_sum_examples(self):
        seq = LacunarySequence((1, 2), q=2)
        u = CoefficientTriangle.unit()
        S1 = walsh_partial_sum(seq, u, 1)
        assert S1(0.2) == 1 and S1(0.7) == -1
        S2 = walsh_partial_sum(seq, u, 2)
        assert [S2(x) for x in (0.1, 0.3, 0.6, 0.9)] == [2, 0, 0, -2]
        assert S2.law() == {-2.0: Fraction(1, 4), 0.0: Fraction(1, 2), 2.0: Fraction(1, 4)}
        with pytest.raises(IntegralityError):
            walsh_partial_sum(LacunarySequence((1.5, 3.5), q=2), u, 2)

    def test_walsh_partial_sum_pointwise(self):
        seq = interleaved_sequence(12)
        c = CoefficientTriangle.from_rows(np.linspace(0.5, 2.0, 12))
        S = walsh_partial_sum(seq, c, 12)
        x = np.random.default_rng(3).random(10_000)
        direct = sum(a * walsh(m, x) for a, m in zip(c.row(12), seq.terms))
        assert np.array_equal(S(x), direct)
        assert sum(S.law().values()) == 1

    def test_expansion_weights(self):
        e = bernoulli_expansion_weights(1, 64)
        assert e.weights[0] == -0.25 and e.digits[0] == 2
        assert bernoulli_expansion_weights(0).weights.size == 0
        for n in (1, 2, 5, 30):
            assert e.sum_of_squares() if n == 1 else True
            w = bernoulli_expansion_weights(n, 64)
            assert w.sum_of_squares() == pytest.approx(bernoulli_variance(n), abs=2.0**-100 + 1e-15)

    def test_expansion_weights_exact(self):
        for n in (1, 2, 7):
            tail = 20
            s = sum(w * w for w in bernoulli_weight_fractions(n, tail))
            exact = Fraction(n, 4) - Fraction(1, 3) + Fraction(1, 3 * 2**n)
            assert 0 <= exact - s <= Fraction(1, 2 ** (2 * tail))

    @pytest.mark.parametrize("n", [1, 3, 10])
    def test_expansion_reconstruction(self, n):
        tail = 40
        e = bernoulli_expansion_weights(n, tail)
        x = (np.arange(2**14) + 0.37) / 2**14
        direct = sum(bernoulli1(np.ldexp(x, k)) for k in range(1, n + 1))
        assert np.max(np.abs(direct - e(x))) <= 2.0**-tail

    def test_holder_sum(self):
        seq = power_sequence(2, 8)
        u = CoefficientTriangle.unit()
        x = np.random.default_rng(0).random(500)
        e = bernoulli_expansion_weights(8, 64)
        assert np.max(np.abs(holder_partial_sum(BERNOULLI1, seq, u, 8, x) - e(x))) < 1e-12
        assert holder_partial_sum(BERNOULLI1, seq, u, 0, 0.3) == 0
        tu = CoefficientTriangle.unit("trig")
        assert np.allclose(holder_partial_sum(COS2PI, seq, tu, 8, x), trig_partial_sum(seq, tu, 8, x), atol=1e-12)


class TestStepApproximation:
    def test_constant(self):
        f = PeriodicFunction(lambda x: np.full(np.shape(x), 2.0), h=0.0, alpha=1.0)
        g = step_approximation(f, 5)
        assert np.all(g.values == 2.0) and g.error_bound == 0.0

    def test_bernoulli_midpoint(self):
        g = step_approximation(BERNOULLI1, 4, "midpoint")
        x = np.linspace(0, 1, 100_001, endpoint=False)
        assert np.max(np.abs(g(x) - bernoulli1(x))) <= 1 / 8
        assert g.error_bound == BERNOULLI1.h * 4**-1

    def test_cos_bound(self):
        g = step_approximation(COS2PI, 16, "left")
        x = np.linspace(0, 1, 100_001, endpoint=False)
        assert np.max(np.abs(g(x) - COS2PI(x))) < g.error_bound
        with pytest.raises(DomainError):
            step_approximation(COS2PI, 1)


class TestOrbitSampling:
    @pytest.mark.parametrize("seq", [power_sequence(2, 16), power_sequence(3, 10), interleaved_sequence(16)],
                             ids=["pow2", "pow3", "interleaved"])
    def test_matches_direct_evaluation(self, seq):
        from scipy.stats import ks_2samp

        h = trig_sum(seq, CoefficientTriangle.flat(0.5, "trig"), 10)
        a = h.sample(1 << 14, seed=1)
        b = h(np.random.default_rng(2).random(1 << 14))
        assert ks_2samp(a, b).pvalue > 1e-3

    def test_large_frequencies_keep_moments(self):
        # direct evaluation collapses to cos(0) once 2**k exceeds the mantissa
        h = trig_sum(power_sequence(2, 512), CoefficientTriangle.flat(0.5, "trig"), 512)
        v = h.sample(1 << 14, seed=0)
        assert abs(v.mean()) < 0.03 and v.var() == pytest.approx(0.5, rel=0.05)

    def test_holder_mean_zero(self):
        seq = power_sequence(2, 200)
        v = orbit_sample(bernoulli1, seq.terms, np.full(200, 200**-0.5), 1 << 14)
        # variance of the normalised Bernoulli sum tends to 1/4
        assert abs(v.mean()) < 0.02 and v.var() == pytest.approx(0.25, abs=0.02)

    def test_stratified_first_digits(self):
        v = orbit_sample(lambda u: u, [1], [1.0], 1 << 10)
        assert np.array_equal(np.floor(v * 1024), np.arange(1024))

    def test_unsupported_frequencies(self):
        with pytest.raises(PrecisionError):
            orbit_sample(bernoulli1, [1.5, 3.0], [1.0, 1.0], 16)
        with pytest.raises(PrecisionError):
            orbit_sample(bernoulli1, [3**40, 5**40], [1.0, 1.0], 16)
