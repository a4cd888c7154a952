import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.testing import assert_allclose

from bayesdrift import ConfigError, DomainError, Gaussian, PI_MIN, pi_posterior, x_of_pi
from bayesdrift.kernel import (
    KernelQuery,
    normal_kernel,
    posterior_functional,
    terminal_payoff,
    transition_prob,
    transition_prob_x,
)

from conftest import BATTERY, MIXTURE, THREE_POINT

STD = Gaussian(0.0, 1.0)


def _mc_terminal_pi(prior, n, seed):
    # B from the prior, X_1 = B + Z, Pi_1 = pi(1, X_1); start at t = 0, x = 0
    rng = np.random.default_rng(seed)
    b = prior.sample(rng, n)
    return pi_posterior(prior, 1.0, b + rng.standard_normal(n))


class TestQuery:
    @pytest.mark.parametrize(
        "kw",
        [
            dict(t=-1.0, u=1.0, q=0.5, lo=0.2, hi=0.8),
            dict(t=0.0, u=-1.0, q=0.5, lo=0.2, hi=0.8),
            dict(t=0.0, u=1.0, q=1.0, lo=0.2, hi=0.8),
            dict(t=0.0, u=1.0, q=0.5, lo=0.8, hi=0.2),
            dict(t=0.0, u=1.0, q=0.5, lo=0.0, hi=0.8),
            dict(t=np.nan, u=1.0, q=0.5, lo=0.2, hi=0.8),
        ],
    )
    def test_rejects(self, kw):
        with pytest.raises(DomainError):
            KernelQuery(**kw)


class TestTransitionProb:
    def test_zero_lookahead_indicator(self):
        assert transition_prob(STD, KernelQuery(0.0, 0.0, 0.5, 0.2, 0.8)) == 1.0
        assert transition_prob(STD, KernelQuery(0.0, 0.0, 0.9, 0.2, 0.8)) == 0.0
        assert transition_prob(STD, KernelQuery(0.0, 0.0, 0.2, 0.2, 0.8)) == 0.5
        assert transition_prob(STD, KernelQuery(0.0, 0.0, 0.8, 0.2, 0.8)) == 0.5

    @pytest.mark.parametrize("u", [0.01, 1.0, 50.0])
    def test_null_interval(self, u):
        assert transition_prob(STD, KernelQuery(0.0, u, 0.5, 0.4, 0.4)) == 0.0

    def test_uniform_case_exact(self):
        # X_1 ~ N(0, 2) and pi(1, x) = Phi(x / sqrt 2), so Pi_1 is uniform
        for order in (None, 64):
            got = transition_prob(STD, KernelQuery(0.0, 1.0, 0.5, 0.3, 0.7), order=order)
            assert_allclose(got, 0.4, atol=1e-10)

    def test_against_monte_carlo(self):
        n = 1_000_000
        p1 = _mc_terminal_pi(STD, n, seed=11)
        hit = (p1 > 0.3) & (p1 < 0.7)
        se = hit.std(ddof=1) / np.sqrt(n)
        got = transition_prob(STD, KernelQuery(0.0, 1.0, 0.5, 0.3, 0.7))
        assert abs(got - hit.mean()) <= 3.0 * se

    def test_three_point_against_monte_carlo(self):
        n = 1_000_000
        p1 = _mc_terminal_pi(THREE_POINT, n, seed=12)
        q0 = float(pi_posterior(THREE_POINT, 0.0, 0.0))
        hit = (p1 > 0.25) & (p1 < 0.9)
        se = hit.std(ddof=1) / np.sqrt(n)
        got = transition_prob(THREE_POINT, KernelQuery(0.0, 1.0, q0, 0.25, 0.9))
        assert abs(got - hit.mean()) <= 3.0 * se

    @pytest.mark.parametrize("u", [1e-3, 0.1, 1.0, 10.0, 100.0])
    def test_total_mass(self, battery_prior, u):
        for t, q in [(0.0, 0.5), (2.0, 0.2), (10.0, 0.9)]:
            got = transition_prob(battery_prior, KernelQuery(t, u, q, PI_MIN, 1.0 - PI_MIN))
            assert_allclose(got, 1.0, atol=1e-8)

    @given(
        lo=st.floats(0.01, 0.49),
        hi=st.floats(0.51, 0.99),
        d=st.floats(0.0, 0.2),
    )
    @settings(max_examples=40, deadline=None)
    def test_monotone_in_endpoints(self, lo, hi, d):
        base = transition_prob(MIXTURE, KernelQuery(1.0, 0.5, 0.4, lo, hi))
        wider_hi = transition_prob(MIXTURE, KernelQuery(1.0, 0.5, 0.4, lo, min(hi + d, 0.999)))
        wider_lo = transition_prob(MIXTURE, KernelQuery(1.0, 0.5, 0.4, max(lo - d, 0.001), hi))
        assert wider_hi >= base - 1e-14
        assert wider_lo >= base - 1e-14

    def test_low_order_rejected(self):
        with pytest.raises(ConfigError):
            transition_prob(STD, KernelQuery(0.0, 1.0, 0.5, 0.3, 0.7), order=1)

    def test_hermite_matches_exact_convolution(self):
        t = np.array([0.0, 1.0, 10.0])[:, None]
        x = np.array([-3.0, 0.0, 2.0])[None, :]
        for u in (1e-3, 0.1, 5.0):
            a = transition_prob_x(MIXTURE, t, x, u, x - 0.5, x + 1.5, order=64)
            b = transition_prob_x(MIXTURE, t, x, u, x - 0.5, x + 1.5, order=None)
            assert_allclose(a, b, atol=1e-8)

    def test_matches_quadrature_oracle(self, battery_prior):
        q, lo, hi = 0.45, 0.2, 0.85
        for t, u in [(0.0, 0.3), (3.0, 2.0)]:
            got = transition_prob(battery_prior, KernelQuery(t, u, q, lo, hi))
            jumps = x_of_pi(battery_prior, t + u, [lo, hi])
            ref = posterior_functional(battery_prior, t, q, u, lambda p: float(lo < p < hi), breaks=jumps)
            assert_allclose(got, ref, atol=1e-7)


class TestNormalKernel:
    def test_example(self):
        got = normal_kernel(1.0, 0.0, 1.0, 0.4, 0.4)
        ref = transition_prob(STD, KernelQuery(0.0, 1.0, 0.4, 0.4, 0.6))
        assert_allclose(got, ref, atol=1e-6)

    def test_full_interval_limit(self):
        assert_allclose(normal_kernel(1.0, 0.5, 2.0, 0.3, 1e-300), 1.0, atol=1e-12)

    def test_independent_of_mean(self):
        for m in (-2.0, 3.0):
            got = transition_prob(Gaussian(m, 1.0), KernelQuery(1.0, 0.5, 0.35, 0.3, 0.7))
            assert_allclose(got, normal_kernel(1.0, 1.0, 0.5, 0.35, 0.3), atol=1e-12)

    @pytest.mark.parametrize("gamma", [0.5, 1.0, 2.0])
    def test_grid_consistency(self, gamma):
        prior = Gaussian(0.0, gamma)
        worst = 0.0
        for t, s, b in itertools.product([0.0, 0.3, 1.0, 5.0, 20.0], [0.01, 0.1, 0.5, 1.0, 4.0], [0.05, 0.15, 0.3, 0.4, 0.5]):
            ref = transition_prob(prior, KernelQuery(t, s, b, b, 1.0 - b))
            worst = max(worst, abs(normal_kernel(gamma, t, s, b, b) - ref))
        assert worst <= 1e-6

    @pytest.mark.parametrize(
        "args",
        [(0.0, 0.0, 1.0, 0.4, 0.4), (1.0, 0.0, 0.0, 0.4, 0.4), (1.0, 0.0, 1.0, 1.0, 0.4), (1.0, 0.0, 1.0, 0.4, 0.6)],
    )
    def test_domain(self, args):
        with pytest.raises(DomainError):
            normal_kernel(*args)


class TestTerminalPayoff:
    def test_no_lookahead(self):
        assert terminal_payoff(STD, 2.0, 0.3, 2.0) == 0.3

    def test_backwards_rejected(self):
        with pytest.raises(DomainError):
            terminal_payoff(STD, 2.0, 0.3, 1.0)

    def test_uniform_case_exact(self):
        # Pi_1 uniform: E[min(U, 1 - U)] = 1/4
        assert_allclose(terminal_payoff(STD, 0.0, 0.5, 1.0), 0.25, atol=1e-13)

    def test_against_monte_carlo(self):
        n = 1_000_000
        p1 = _mc_terminal_pi(STD, n, seed=13)
        g = np.minimum(p1, 1.0 - p1)
        se = g.std(ddof=1) / np.sqrt(n)
        assert abs(terminal_payoff(STD, 0.0, 0.5, 1.0) - g.mean()) <= 3.0 * se

    def test_matches_quadrature_oracle(self, battery_prior):
        for t, q, T in [(0.0, 0.5, 1.0), (1.0, 0.2, 4.0), (5.0, 0.7, 5.5)]:
            got = terminal_payoff(battery_prior, t, q, T)
            kink = [float(x_of_pi(battery_prior, T, 0.5))]
            ref = posterior_functional(battery_prior, t, q, T - t, lambda p: min(p, 1.0 - p), breaks=kink)
            assert_allclose(got, ref, atol=1e-10)


class TestMartingale:
    def test_expected_future_probability(self, battery_prior):
        worst = 0.0
        for t, u, q in itertools.product([0.0, 1.0, 10.0], [0.1, 1.0], [0.1, 0.5, 0.9]):
            worst = max(worst, abs(posterior_functional(battery_prior, t, q, u, lambda p: p) - q))
        assert worst <= 1e-6
