import mpmath as mp
import numpy as np
import pytest
from numpy.testing import assert_allclose
from scipy.stats import multivariate_normal

from bayesdrift import _normal


def _mp_psi(a, k):
    # E[(Z + a)^k 1{Z > -a}] in closed form at high precision
    if k == 1:
        return a * mp.ncdf(a) + mp.npdf(a)
    return (1 + a * a) * mp.ncdf(a) + a * mp.npdf(a)


class TestLogPsi:
    @pytest.mark.parametrize("a", [-40.0, -8.0, -1.5, 0.0, 0.7, 5.0, 29.0, 31.0, 60.0])
    def test_against_mpmath(self, a):
        mp.mp.dps = 80
        ref1 = float(mp.log(_mp_psi(mp.mpf(a), 1)))
        assert_allclose(_normal.log_psi1(np.array(a)), ref1, rtol=1e-13, atol=1e-13)

    def test_series_branch_is_continuous(self):
        u = -np.array([29.999999, 30.0, 30.000001])
        v = _normal.log_psi1(u)
        assert np.all(np.diff(v) < 0.0)
        assert_allclose(np.diff(v), np.diff(v)[0], rtol=1e-4)

    def test_psi2_against_mpmath(self):
        mp.mp.dps = 80
        for a in [-45.0, -12.0, -3.0, 0.0, 2.0, 12.0]:
            ref = float(mp.log(_mp_psi(mp.mpf(a), 2)))
            assert_allclose(_normal.log_psi2(np.array(a)), ref, rtol=1e-12, atol=1e-12)


class TestHelpers:
    def test_interval_prob_far_tail(self):
        # both ends far in the upper tail: direct differences would round to 0
        mp.mp.dps = 40
        ref = float(mp.ncdf(-mp.mpf(20)) - mp.ncdf(-mp.mpf(21)))
        assert_allclose(_normal.interval_prob(np.array(20.0), np.array(21.0)), ref, rtol=1e-12)

    def test_logsumexp_matches_naive(self, rng):
        a = rng.normal(size=(4, 7))
        assert_allclose(_normal.logsumexp(a, axis=-1), np.log(np.exp(a).sum(-1)), rtol=1e-14)

    def test_logsumexp_all_minus_inf(self):
        assert _normal.logsumexp(np.full(3, -np.inf)) == -np.inf

    @pytest.mark.parametrize("h,k,rho", [(0.3, -0.2, -0.6), (1.5, 2.0, 0.4), (-1.0, 0.5, -0.95)])
    def test_bvn_against_scipy(self, h, k, rho):
        ref = multivariate_normal(mean=[0, 0], cov=[[1, rho], [rho, 1]]).cdf([h, k])
        assert_allclose(_normal.bvn_cdf(np.array(h), np.array(k), np.array(rho)), ref, atol=1e-7)

    def test_hermite_rule_moments(self):
        z, w = _normal.hermite_rule(32)
        assert_allclose([w.sum(), w @ z, w @ z**2, w @ z**4], [1.0, 0.0, 1.0, 3.0], atol=1e-13)

    def test_legendre_rule_on_unit_interval(self):
        s, w = _normal.legendre_rule(16)
        assert np.all((s > 0) & (s < 1))
        assert_allclose(w @ s**3, 0.25, rtol=1e-14)
