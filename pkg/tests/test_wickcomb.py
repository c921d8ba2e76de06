import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from uhfqft import wickcomb as wc
from uhfqft.errors import BudgetError, EmptyWindowError, MissingChannelError, SizeMismatchError
from uhfqft.wickcomb import PairingMatrix, WickSeries


def rand_t(rng, n, scale=1.0):
    k = n * (n - 1) // 2
    return PairingMatrix.from_upper(scale * (rng.normal(size=k) + 1j * rng.normal(size=k)), n)


def all_t(n, value):
    return PairingMatrix.from_upper([value] * (n * (n - 1) // 2), n)


class TestSeries:
    def test_prefix_and_zero_extension(self):
        s = WickSeries((1, 2, 3))
        assert s[2] == 3 and s[7] == 0 and s[-1] == 0

    def test_constructors(self):
        assert WickSeries.monomial(3)[3] == 6
        assert WickSeries.exp_linear(0.5, 4)[4] == 0.5**4
        sq = WickSeries.exp_square(0.3, 6)
        assert sq[1] == 0 and sq[4] == pytest.approx((0.3j) ** 2 * 24 / 2)


class TestPairingMatrix:
    def test_rejects_asymmetric(self):
        with pytest.raises(ValueError):
            PairingMatrix([[0, 1], [2, 0]])

    def test_rejects_diagonal(self):
        with pytest.raises(ValueError):
            PairingMatrix([[1, 0], [0, 0]])

    def test_translation_invariant_channels(self):
        dt = np.zeros((2, 2, 4), complex)
        dt[0, 1] = [1, 2, 3, 4]
        p = PairingMatrix.translation_invariant([[0, 1], [1, 0]], dt)
        assert np.all(p.dt[1, 0] == -p.dt[0, 1])


class TestJaffe:
    def test_zero_pairing_gives_constant_terms(self):
        series = [WickSeries((2, 5)), WickSeries((3, 1, 1))]
        assert wc.jaffe_vev(series, all_t(2, 0), 6) == 6

    def test_phi_squared_two_point(self):
        t = 0.7 - 0.2j
        v = wc.jaffe_vev([WickSeries.monomial(2)] * 2, all_t(2, t), 4)
        assert abs(v - 2 * t * t) < 1e-15

    def test_exponential_closed_form_two_points(self):
        g1, g2, t = 0.5, -0.6j, 0.9
        v = wc.jaffe_vev([WickSeries.exp_linear(g1, 30), WickSeries.exp_linear(g2, 30)], all_t(2, t), 30)
        assert abs(v - np.exp(g1 * g2 * t)) < 1e-10

    def test_size_mismatch(self):
        with pytest.raises(SizeMismatchError):
            wc.jaffe_vev([WickSeries.monomial(1)], all_t(2, 1), 2)

    def test_enumeration_order(self):
        idx = list(wc.contraction_indices(3, 2))
        degrees = [sum(r) for r in idx]
        assert degrees == sorted(degrees)
        for d in range(3):
            block = [r for r in idx if sum(r) == d]
            assert block == sorted(block, reverse=True) or block == sorted(block)

    @pytest.mark.parametrize("k", [1, 2, 3, 4])
    def test_matches_oracle_exhaustively(self, k):
        rng = np.random.default_rng(k)
        for degs in itertools.product(range(9), repeat=k):
            if sum(degs) > 8:
                continue
            t = rand_t(rng, k)
            j = wc.jaffe_vev([WickSeries.monomial(n) for n in degs], t, sum(degs) // 2)
            o = wc.monomial_vev_oracle(degs, t)
            scale = abs(wc.monomial_vev_oracle(degs, PairingMatrix(np.abs(t.t))))
            assert abs(j - o) <= 1e-12 * max(scale, 1e-300)

    @settings(max_examples=30, deadline=None)
    @given(st.lists(st.integers(0, 3), min_size=3, max_size=3), st.integers(0, 2**31))
    def test_permutation_symmetry(self, degs, seed):
        rng = np.random.default_rng(seed)
        t = rand_t(rng, 3)
        series = [WickSeries.exp_linear(complex(*rng.normal(size=2)), 8) for _ in degs]
        perm = list(rng.permutation(3))
        tp = PairingMatrix(t.t[np.ix_(perm, perm)])
        a = wc.jaffe_vev(series, t, 6)
        b = wc.jaffe_vev([series[p] for p in perm], tp, 6)
        assert abs(a - b) <= 1e-12 * max(1, abs(a))

    @settings(max_examples=30, deadline=None)
    @given(st.integers(0, 2**31))
    def test_partial_sums_monotone_for_positive_data(self, seed):
        rng = np.random.default_rng(seed)
        t = PairingMatrix.from_upper(rng.uniform(0, 0.5, 3), 3)
        series = [WickSeries(rng.uniform(0, 1, 10)) for _ in range(3)]
        ps = wc.jaffe_partial_sums(series, t, 8).real
        assert np.all(np.diff(ps) >= -1e-15)


class TestOracle:
    def test_simple_cases(self):
        t = all_t(2, 0.3 + 0.1j)
        assert wc.monomial_vev_oracle((1, 1), t) == 0.3 + 0.1j
        assert wc.monomial_vev_oracle((1, 2), t) == 0

    def test_three_phi_squared(self):
        t = 0.4 - 0.3j
        assert abs(wc.monomial_vev_oracle((2, 2, 2), all_t(3, t)) - 8 * t**3) < 1e-15

    def test_budget(self):
        with pytest.raises(BudgetError):
            wc.monomial_vev_oracle((9, 9), all_t(2, 1.0))

    def test_mixed_single_pair(self):
        dt = np.zeros((2, 2, 4), complex)
        dt[0, 1, 2] = 0.25 - 1j
        t = PairingMatrix.translation_invariant([[0, 0.5], [0.5, 0]], dt)
        assert wc.mixed_monomial_vev_oracle((1, 1), (2, None), t) == 0.25 - 1j

    def test_mixed_derivative_pair_rejected(self):
        dt = np.ones((2, 2, 4), complex)
        t = PairingMatrix([[0, 0.5], [0.5, 0]], dt)
        with pytest.raises(MissingChannelError):
            wc.mixed_monomial_vev_oracle((1, 1), (0, 0), t)

    def test_mixed_requires_channels(self):
        with pytest.raises(MissingChannelError):
            wc.mixed_monomial_vev_oracle((1, 1), (0, None), all_t(2, 1.0))

    @pytest.mark.parametrize("degs,count", [((3, 2), 0), ((3, 3), 6), ((2, 4), 0)])
    def test_mixed_label_invariance(self, degs, count):
        rng = np.random.default_rng(3)
        t = rand_t(rng, 2).t
        dt_up = np.zeros((2, 2, 4), complex)
        dt_up[0, 1] = rng.normal(size=4) + 1j * rng.normal(size=4)
        p = PairingMatrix.translation_invariant(t, dt_up)
        a = wc.mixed_monomial_vev_oracle(degs, (1, None), p)
        swapped = PairingMatrix(t[::-1, ::-1], p.dt[::-1, ::-1])
        b = wc.mixed_monomial_vev_oracle(degs[::-1], (None, 1), swapped)
        assert abs(a - b) < 1e-14
        # equal leg counts: n! matchings, each using the tagged leg once
        expected = count * p.dt[0, 1, 1] * t[0, 1] ** (degs[0] - 1) if count else 0
        assert abs(a - expected) < 1e-13

    def test_mixed_jaffe_agrees_with_oracle(self):
        rng = np.random.default_rng(11)
        for degs in [(1, 1), (3, 1), (2, 2, 2), (3, 2, 1), (4, 2, 2)]:
            n = len(degs)
            t = rand_t(rng, n).t
            dt_up = rng.normal(size=(n, n, 4)) + 1j * rng.normal(size=(n, n, 4))
            p = PairingMatrix.translation_invariant(t, dt_up)
            flags = [None] * n
            flags[0] = 2
            oracle = wc.mixed_monomial_vev_oracle(degs, flags, p)
            series = [WickSeries.monomial(d) for d in degs]
            # derivative field :(d phi) phi^(n-1): comes from a_n = (n-1)! at degree n
            series[0] = WickSeries([0] * degs[0] + [math.factorial(degs[0] - 1)])
            val = wc.mixed_jaffe_vev(series, p, 0, 2, sum(degs) // 2)
            assert abs(val - oracle) <= 1e-12 * max(1, abs(oracle))


class TestClosedForms:
    def test_exp_closed_examples(self):
        assert wc.exp_vev_closed([1, 2], all_t(2, 0)) == 1
        assert abs(wc.exp_vev_closed([1, 1, 1], all_t(3, math.log(2))) - 8) < 1e-14

    @settings(max_examples=25, deadline=None)
    @given(st.integers(2, 3), st.integers(0, 2**31))
    def test_truncated_exponential(self, n, seed):
        rng = np.random.default_rng(seed)
        g = rng.normal(size=n) + 1j * rng.normal(size=n)
        t = rand_t(rng, n)
        s = sum(abs(g[i] * g[j] * t.t[i, j]) for i, j in t.pairs())
        t = PairingMatrix(t.t * 0.3 / s)
        v = wc.jaffe_vev([WickSeries.exp_linear(x, 30) for x in g], t, 30)
        assert abs(v - wc.exp_vev_closed(g, t)) < 1e-10


class TestSigma:
    def test_finitely_supported(self):
        assert wc.sigma_growth(WickSeries.monomial(1), (20, 60)).sigma == 0

    @pytest.mark.parametrize("l", [0.3, 0.5, 1.0, 1.5])
    def test_exp_square_growth(self, l):
        est = wc.sigma_growth(WickSeries.exp_square(l * l, 64), (20, 60))
        assert abs(est.sigma / (2 * l * l) - 1) < 0.05
        assert abs(est.ell / (l / (math.sqrt(2) * math.pi)) - 1) < 0.05

    def test_exp_linear_decays(self):
        s = WickSeries.exp_linear(2.0, 200)
        a = wc.sigma_growth(s, (20, 60)).sigma
        b = wc.sigma_growth(s, (100, 200)).sigma
        assert b < a

    def test_empty_window(self):
        with pytest.raises(EmptyWindowError):
            wc.sigma_growth(WickSeries.monomial(1), (20, 10))


class TestMargin:
    def test_examples(self):
        assert wc.convergence_margin(2.0, all_t(3, 0)) == 0.25
        t = PairingMatrix.from_upper([0.1, 0.1, 0.2], 3)
        assert abs(wc.convergence_margin(1.0, t) - 0.1) < 1e-15

    def test_positive_margin_gives_geometric_cauchy_tail(self):
        l2 = 0.5
        t = PairingMatrix.from_upper([0.3, 0.2j, -0.25], 3)
        assert wc.convergence_margin(l2, t) > 0
        ps = wc.jaffe_partial_sums([WickSeries.exp_square(-l2, 80)] * 3, t, 40)
        gaps = [abs(ps[n + 10] - ps[n]) for n in (5, 15, 25)]
        assert gaps[0] > gaps[1] > gaps[2]
