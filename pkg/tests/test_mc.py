import math

import numpy as np
import pytest
from numpy.testing import assert_allclose
from scipy.stats import norm

from bayesdrift import ConfigError, DomainError, Gaussian, mass_nonneg
from bayesdrift.mc import BLOCK_SIZE, SimConfig, evaluate_policy, terminal_distribution_probe
from bayesdrift.solver import BoundaryCurve, SolverConfig, solve_finite, value_at

from conftest import TWO_POINT

STD = Gaussian(0.0, 1.0)


@pytest.fixture(scope="module")
def curve():
    return solve_finite(STD, 0.5, SolverConfig(T=1.0, n_time=48))


def _flat(level, T=1.0, kind="perpetual_approx"):
    return BoundaryCurve([0.0, T], [level, level], [1 - level, 1 - level], kind)


class TestSimConfig:
    @pytest.mark.parametrize(
        "kw",
        [dict(n_paths=0), dict(n_paths=2.5), dict(dt=0.0), dict(horizon_cap=-1.0), dict(seed=-1), dict(n_paths=3, antithetic=True)],
    )
    def test_rejects(self, kw):
        with pytest.raises(ConfigError):
            SimConfig(**kw)

    def test_negative_cost(self, curve):
        with pytest.raises(ConfigError):
            evaluate_policy(STD, -0.1, curve, SimConfig(n_paths=10))


class TestEvaluate:
    def test_deterministic(self, curve):
        sim = SimConfig(n_paths=20_000, dt=1e-2, seed=5)
        assert evaluate_policy(STD, 0.5, curve, sim) == evaluate_policy(STD, 0.5, curve, sim)

    def test_workers_do_not_change_results(self, curve):
        sim = SimConfig(n_paths=3 * BLOCK_SIZE + 17, dt=1e-2, seed=2)
        assert evaluate_policy(STD, 0.5, curve, sim, workers=3) == evaluate_policy(STD, 0.5, curve, sim)

    def test_prefix_property(self, curve):
        # paths are drawn in fixed blocks, so a smaller run is a prefix of a larger one
        a = evaluate_policy(STD, 0.5, curve, SimConfig(n_paths=BLOCK_SIZE, dt=1e-2, seed=9))
        b = evaluate_policy(STD, 0.5, curve, SimConfig(n_paths=BLOCK_SIZE + 100, dt=1e-2, seed=9))
        assert a.risk_mean != b.risk_mean
        assert abs(a.risk_mean - b.risk_mean) < 0.05

    def test_risk_identity(self, curve):
        for antithetic in (False, True):
            est = evaluate_policy(STD, 0.5, curve, SimConfig(n_paths=10_000, dt=1e-2, seed=3, antithetic=antithetic))
            assert abs(est.risk_mean - (est.error_prob + 0.5 * est.expected_tau)) <= 1e-12
            assert est.risk_stderr > 0 and est.error_prob_stderr > 0 and est.expected_tau_stderr > 0

    def test_immediate_stop(self):
        prior = Gaussian(0.5, 1.0)
        pi0 = mass_nonneg(prior)
        flat = BoundaryCurve([0.0, 1.0], [0.5, 0.5], [0.5, 0.5])
        est = evaluate_policy(prior, 1e-9, flat, SimConfig(n_paths=50_000, seed=4))
        assert est.expected_tau == 0.0
        assert abs(est.risk_mean - min(pi0, 1.0 - pi0)) <= 3.0 * est.risk_stderr

    def test_single_path_has_no_stderr(self, curve):
        est = evaluate_policy(STD, 0.5, curve, SimConfig(n_paths=1, dt=1e-2))
        assert est.risk_stderr is None and est.error_prob_stderr is None and est.expected_tau_stderr is None
        assert est.n_paths == 1

    def test_matches_value_function(self, curve):
        est = evaluate_policy(STD, 0.5, curve, SimConfig(n_paths=40_000, dt=1e-3, seed=21))
        v0 = float(value_at(STD, 0.5, curve, 0.0, 0.5)[0])
        assert abs(est.risk_mean - v0) <= 3.0 * est.risk_stderr + 5e-3

    def test_dt_halving(self, curve):
        a = evaluate_policy(STD, 0.5, curve, SimConfig(n_paths=100_000, dt=1e-2, seed=7))
        b = evaluate_policy(STD, 0.5, curve, SimConfig(n_paths=100_000, dt=5e-3, seed=8))
        pooled = math.hypot(a.risk_stderr, b.risk_stderr)
        assert abs(a.risk_mean - b.risk_mean) < 2.0 * pooled

    def test_antithetic(self, curve):
        plain = evaluate_policy(STD, 0.5, curve, SimConfig(n_paths=40_000, dt=1e-2, seed=11))
        anti = evaluate_policy(STD, 0.5, curve, SimConfig(n_paths=40_000, dt=1e-2, seed=11, antithetic=True))
        assert abs(anti.risk_mean - plain.risk_mean) <= 3.0 * plain.risk_stderr
        assert anti.risk_stderr <= plain.risk_stderr

    def test_finite_curve_forces_stop_at_horizon(self):
        wide = BoundaryCurve([0.0, 1.0 - 1e-9, 1.0], [1e-9, 1e-9, 0.5], [1 - 1e-9, 1 - 1e-9, 0.5])
        est = evaluate_policy(STD, 0.5, wide, SimConfig(n_paths=2_000, dt=1e-2))
        assert_allclose(est.expected_tau, 1.0, rtol=0, atol=1e-12)
        assert est.censored_frac == 0.0 and not est.censored_warning

    def test_perpetual_censoring_flag(self):
        curve = _flat(1e-6)
        est = evaluate_policy(STD, 0.5, curve, SimConfig(n_paths=2_000, dt=1e-2, horizon_cap=0.5))
        assert est.censored_frac > 0.1 and est.censored_warning

    def test_to_dict_round_trip(self, curve):
        est = evaluate_policy(STD, 0.5, curve, SimConfig(n_paths=100, dt=1e-2))
        d = est.to_dict()
        assert set(d) >= {"risk_mean", "risk_stderr", "error_prob", "expected_tau", "n_paths", "censored_frac"}
        assert d["risk_mean"] == est.risk_mean


class TestProbe:
    def test_two_point_concentrates(self):
        r = terminal_distribution_probe(TWO_POINT, 100.0, SimConfig(n_paths=50_000, seed=1))
        assert r.mean_terminal_loss < 0.01
        assert abs(r.frac_above_half - 0.5) <= 3.0 * r.frac_above_half_stderr

    def test_gaussian_fraction(self):
        r = terminal_distribution_probe(Gaussian(1.0, 1.0), 200.0, SimConfig(n_paths=50_000, seed=2))
        assert abs(r.frac_above_half - norm.cdf(1.0)) <= 3.0 * r.frac_above_half_stderr

    def test_horizon_too_short(self):
        with pytest.raises(DomainError):
            terminal_distribution_probe(TWO_POINT, 50.0, SimConfig(n_paths=10))

    def test_deterministic(self):
        sim = SimConfig(n_paths=5_000, seed=3)
        assert terminal_distribution_probe(TWO_POINT, 100.0, sim) == terminal_distribution_probe(TWO_POINT, 100.0, sim)
