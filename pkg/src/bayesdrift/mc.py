"""Monte Carlo evaluation of stopping rules.

Paths are simulated under the physical measure: draw B from the prior, then
X on a time grid with exact Gaussian increments.  Since Pi_t = pi(t, X_t)
is increasing in X_t, the rule "stop once Pi leaves (b1, b2)" becomes a
pair of precomputed thresholds in observation space.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass

import numpy as np

from .errors import ConfigError, DomainError
from .posterior import pi_posterior, x_of_pi
from .prior import Prior
from .solver import BoundaryCurve

__all__ = ["SimConfig", "RiskEstimate", "ProbeResult", "evaluate_policy", "terminal_distribution_probe", "BLOCK_SIZE"]

#: paths per RNG block; each block has its own counter-based stream
BLOCK_SIZE = 8192
_CENSOR_WARN = 0.10
_DEFAULT_PERPETUAL_CAP = 100.0


@dataclass(frozen=True)
class SimConfig:
    """Simulation settings.

    ``horizon_cap`` bounds the simulated time.  Finite curves stop at
    ``min(T, horizon_cap)``; perpetual curves run to ``horizon_cap``
    (default 100) and paths still running there count as censored.
    """

    n_paths: int = 100_000
    dt: float = 1e-3
    horizon_cap: float | None = None
    seed: int = 0
    antithetic: bool = False

    def __post_init__(self):
        if int(self.n_paths) != self.n_paths or self.n_paths < 1:
            raise ConfigError(f"n_paths must be a positive integer (got {self.n_paths!r})")
        if not (math.isfinite(self.dt) and self.dt > 0.0):
            raise ConfigError(f"dt must be positive (got {self.dt!r})")
        if self.horizon_cap is not None and not (math.isfinite(self.horizon_cap) and self.horizon_cap > 0.0):
            raise ConfigError(f"horizon_cap must be positive (got {self.horizon_cap!r})")
        if int(self.seed) != self.seed or not (0 <= self.seed < 2**64):
            raise ConfigError(f"seed must be an integer in [0, 2^64) (got {self.seed!r})")
        if self.antithetic and self.n_paths % 2:
            raise ConfigError("antithetic sampling needs an even n_paths")


@dataclass(frozen=True)
class RiskEstimate:
    """Bayes risk of a stopping rule and its decomposition.

    Standard errors are ``None`` when ``n_paths == 1``.  In antithetic mode
    they are computed from pair averages.
    """

    risk_mean: float
    risk_stderr: float | None
    error_prob: float
    error_prob_stderr: float | None
    expected_tau: float
    expected_tau_stderr: float | None
    n_paths: int
    censored_frac: float
    censored_warning: bool

    def to_dict(self) -> dict:
        return asdict(self)


def _rng(seed: int, block: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=(block,))))


def _stderr(values: np.ndarray, antithetic: bool) -> float | None:
    if antithetic:
        half = values.size // 2
        values = 0.5 * (values[:half] + values[half:])
    if values.size < 2:
        return None
    return float(np.std(values, ddof=1) / math.sqrt(values.size))


def _time_grid(H: float, dt: float) -> np.ndarray:
    k = max(1, int(math.ceil(H / dt - 1e-9)))
    t = np.linspace(0.0, H, k + 1)
    t[-1] = H
    return t


def _simulate_block(prior, seed, block, n_use, antithetic, times, xlo, xhi, xmid, forced_end):
    rng = _rng(seed, block)
    if antithetic:
        half = BLOCK_SIZE // 2
        b_half = prior.sample(rng, half)
        b = np.concatenate([b_half, b_half])
    else:
        b = prior.sample(rng, BLOCK_SIZE)
    x = np.zeros(BLOCK_SIZE)
    tau = np.full(BLOCK_SIZE, times[-1])
    x_stop = np.zeros(BLOCK_SIZE)
    k_stop = np.full(BLOCK_SIZE, times.size - 1)
    active = np.ones(BLOCK_SIZE, dtype=bool)
    # stop at t = 0 if the start already lies outside
    now = (x <= xlo[0]) | (x >= xhi[0])
    tau[now], x_stop[now], k_stop[now] = 0.0, x[now], 0
    active &= ~now
    dts = np.diff(times)
    for k in range(1, times.size):
        if not active.any():
            break
        if antithetic:
            zh = rng.standard_normal(BLOCK_SIZE // 2)
            z = np.concatenate([zh, -zh])
        else:
            z = rng.standard_normal(BLOCK_SIZE)
        h = dts[k - 1]
        x = x + b * h + math.sqrt(h) * z
        hit = active & ((x <= xlo[k]) | (x >= xhi[k]))
        tau[hit] = times[k]
        x_stop[hit] = x[hit]
        k_stop[hit] = k
        active &= ~hit
    x_stop[active] = x[active]
    censored = active if not forced_end else np.zeros_like(active)
    decide_up = x_stop >= xmid[k_stop]
    wrong = np.where(decide_up, b < 0.0, b >= 0.0)
    if antithetic:
        # first members of the used pairs, then their partners
        half, m = BLOCK_SIZE // 2, n_use // 2
        sl = np.r_[0:m, half : half + m]
    else:
        sl = slice(0, n_use)
    return wrong[sl].astype(float), tau[sl], censored[sl]


def evaluate_policy(prior: Prior, c: float, curve: BoundaryCurve, sim: SimConfig, workers: int = 1) -> RiskEstimate:
    """Monte Carlo Bayes risk of the rule "stop when Pi leaves (b1, b2)".

    The decision at the stopping time is d = 1 iff Pi_tau >= 1/2.  Each path
    loses 1{wrong decision} + c tau.  Results depend only on ``sim.seed``,
    not on ``workers``.
    """
    if not (math.isfinite(c) and c >= 0.0):
        raise ConfigError(f"cost c must be non-negative (got {c!r})")
    if curve.horizon_kind == "finite":
        H = curve.T if sim.horizon_cap is None else min(curve.T, sim.horizon_cap)
        forced_end = H >= curve.T
    else:
        H = sim.horizon_cap if sim.horizon_cap is not None else max(_DEFAULT_PERPETUAL_CAP, curve.T)
        forced_end = False
    times = _time_grid(H, sim.dt)
    lo = np.clip(curve.b1_at(times), 1e-12, 0.5)
    hi = np.clip(curve.b2_at(times), 0.5, 1.0 - 1e-12)
    xlo = x_of_pi(prior, times, lo)
    xhi = x_of_pi(prior, times, hi)
    xmid = x_of_pi(prior, times, 0.5)

    n = int(sim.n_paths)
    n_blocks = -(-n // BLOCK_SIZE)
    sizes = [min(BLOCK_SIZE, n - j * BLOCK_SIZE) for j in range(n_blocks)]

    def run(j):
        return _simulate_block(prior, sim.seed, j, sizes[j], sim.antithetic, times, xlo, xhi, xmid, forced_end)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(run, range(n_blocks)))
    else:
        parts = [run(j) for j in range(n_blocks)]

    if sim.antithetic:
        # keep each antithetic pair adjacent across the two halves
        def halves(arrs):
            first = np.concatenate([a[: a.size // 2] for a in arrs])
            second = np.concatenate([a[a.size // 2 :] for a in arrs])
            return np.concatenate([first, second])

        wrong = halves([p[0] for p in parts])
        tau = halves([p[1] for p in parts])
    else:
        wrong = np.concatenate([p[0] for p in parts])
        tau = np.concatenate([p[1] for p in parts])
    censored = np.concatenate([p[2] for p in parts])
    loss = wrong + c * tau

    err = math.fsum(wrong.tolist()) / n
    etau = math.fsum(tau.tolist()) / n
    cens = float(np.count_nonzero(censored)) / n
    return RiskEstimate(
        risk_mean=err + c * etau,
        risk_stderr=_stderr(loss, sim.antithetic),
        error_prob=err,
        error_prob_stderr=_stderr(wrong, sim.antithetic),
        expected_tau=etau,
        expected_tau_stderr=_stderr(tau, sim.antithetic),
        n_paths=n,
        censored_frac=cens,
        censored_warning=cens > _CENSOR_WARN,
    )


@dataclass(frozen=True)
class ProbeResult:
    """Long-horizon behaviour of the posterior probability."""

    T: float
    mean_terminal_loss: float
    mean_terminal_loss_stderr: float | None
    frac_above_half: float
    frac_above_half_stderr: float | None
    n_paths: int

    def to_dict(self) -> dict:
        return asdict(self)


def terminal_distribution_probe(prior: Prior, T_large: float, sim: SimConfig) -> ProbeResult:
    """Sample Pi_T at a large T and report E[min(Pi_T, 1 - Pi_T)] together
    with the fraction of paths where Pi_T > 1/2.

    X_T is drawn directly as B T + sqrt(T) Z.
    """
    if not T_large >= 100.0:
        raise DomainError("T_large must be at least 100")
    n = int(sim.n_paths)
    n_blocks = -(-n // BLOCK_SIZE)
    g_parts, up_parts = [], []
    for j in range(n_blocks):
        rng = _rng(sim.seed, j)
        b = prior.sample(rng, BLOCK_SIZE)
        z = rng.standard_normal(BLOCK_SIZE)
        if sim.antithetic:
            z[BLOCK_SIZE // 2 :] = -z[: BLOCK_SIZE // 2]
            b[BLOCK_SIZE // 2 :] = b[: BLOCK_SIZE // 2]
        p = pi_posterior(prior, T_large, b * T_large + math.sqrt(T_large) * z)
        m = min(BLOCK_SIZE, n - j * BLOCK_SIZE)
        g_parts.append(np.minimum(p, 1.0 - p)[:m])
        up_parts.append((p > 0.5)[:m].astype(float))
    g = np.concatenate(g_parts)
    up = np.concatenate(up_parts)
    return ProbeResult(
        T=float(T_large),
        mean_terminal_loss=math.fsum(g.tolist()) / n,
        mean_terminal_loss_stderr=_stderr(g, False),
        frac_above_half=math.fsum(up.tolist()) / n,
        frac_above_half_stderr=_stderr(up, False),
        n_paths=n,
    )
