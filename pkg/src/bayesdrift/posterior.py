"""The posterior map pi(t, x) = P(B >= 0 | X_t = x) and its geometry."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import expit, logit, ndtr, ndtri

from .errors import ConvergenceError, DomainError
from .prior import Discrete, Gaussian, Prior, log_half_moments, posterior_law

__all__ = [
    "PI_MIN",
    "PosteriorPoint",
    "pi_posterior",
    "x_of_pi",
    "conditional_mean",
    "sigma_vol",
    "tail_prob",
    "posterior_point",
    "log_odds",
]

PI_MIN = 1e-12
_X_CAP = 1e9
_MAX_ITER = 200


def log_odds(prior: Prior, t, x):
    """log P(B >= 0 | X_t = x) - log P(B < 0 | X_t = x), unclamped.

    Returns the log-odds and its x-derivative, which equals the gap between
    the conditional means on the two half-lines.
    """
    lg = log_half_moments(prior, t, x, max_order=1)
    f = lg["z_pos"] - lg["z_neg"]
    with np.errstate(over="ignore", invalid="ignore"):
        gap = np.exp(lg["m1_pos"] - lg["z_pos"]) + np.exp(lg["m1_neg"] - lg["z_neg"])
    return f, gap


def pi_posterior(prior: Prior, t, x):
    """Posterior probability that the drift is non-negative.

    Clamped to ``[PI_MIN, 1 - PI_MIN]``.
    """
    lg = log_half_moments(prior, t, x, max_order=0)
    return np.clip(expit(lg["z_pos"] - lg["z_neg"]), PI_MIN, 1.0 - PI_MIN)


def _check_q(q):
    q = np.asarray(q, dtype=float)
    if not np.all(np.isfinite(q)) or np.any(q <= 0.0) or np.any(q >= 1.0):
        raise DomainError("probability argument must lie strictly inside (0, 1)")
    return np.clip(q, PI_MIN, 1.0 - PI_MIN)


def x_of_pi(prior: Prior, t, q):
    """Observation level at which the posterior equals ``q``.

    Gaussian priors use the closed-form inverse.  Otherwise the level is
    bracketed by doubling from [-1, 1] and refined with Newton steps
    safeguarded by bisection.

    Raises
    ------
    DomainError
        If ``q`` is outside (0, 1).
    ConvergenceError
        If the bracket would need to exceed |x| = 1e9.
    """
    q = _check_q(q)
    t = np.asarray(t, dtype=float)
    if not np.all(np.isfinite(t)) or np.any(t < 0.0):
        raise DomainError("t must be finite and non-negative")
    t, q = np.broadcast_arrays(t, q)
    if isinstance(prior, Gaussian):
        g, m = prior.sd, prior.mean
        return (ndtri(q) * g * np.sqrt(1.0 + t * g * g) - m) / (g * g)
    return _invert(prior, t, q)


def _invert(prior, t, q):
    target = logit(q)
    shape = target.shape
    t = t.ravel()
    target = target.ravel()
    lo = np.full(target.shape, -1.0)
    hi = np.full(target.shape, 1.0)

    def resid(tt, xx, tg):
        f, d = log_odds(prior, tt, xx)
        return f - tg, d

    flo, _ = resid(t, lo, target)
    fhi, _ = resid(t, hi, target)
    while True:
        bad_lo = flo > 0.0
        bad_hi = fhi < 0.0
        if not (bad_lo.any() or bad_hi.any()):
            break
        if np.any(np.abs(lo[bad_lo]) >= _X_CAP) or np.any(hi[bad_hi] >= _X_CAP):
            raise ConvergenceError("x_of_pi: bracket expansion passed |x| = 1e9")
        if bad_lo.any():
            hi[bad_lo] = np.minimum(hi[bad_lo], lo[bad_lo])
            fhi[bad_lo] = np.minimum(fhi[bad_lo], flo[bad_lo])
            lo[bad_lo] *= 2.0
            flo[bad_lo], _ = resid(t[bad_lo], lo[bad_lo], target[bad_lo])
        if bad_hi.any():
            lo[bad_hi] = np.maximum(lo[bad_hi], hi[bad_hi])
            flo[bad_hi] = np.maximum(flo[bad_hi], fhi[bad_hi])
            hi[bad_hi] *= 2.0
            fhi[bad_hi], _ = resid(t[bad_hi], hi[bad_hi], target[bad_hi])

    x = 0.5 * (lo + hi)
    active = np.ones(x.shape, dtype=bool)
    for _ in range(_MAX_ITER):
        idx = np.nonzero(active)[0]
        if idx.size == 0:
            break
        xa = x[idx]
        f, d = resid(t[idx], xa, target[idx])
        done = (f == 0.0) | (np.abs(f) <= 4e-16 * np.maximum(1.0, np.abs(target[idx])))
        neg = f < 0.0
        lo[idx] = np.where(neg, xa, lo[idx])
        hi[idx] = np.where(neg, hi[idx], xa)
        with np.errstate(divide="ignore", invalid="ignore"):
            step = xa - f / d
        mid = 0.5 * (lo[idx] + hi[idx])
        ok = np.isfinite(step) & (step > lo[idx]) & (step < hi[idx])
        xn = np.where(ok, step, mid)
        width = hi[idx] - lo[idx]
        done |= width <= 2e-16 * np.maximum(1.0, np.abs(xa))
        done |= np.abs(xn - xa) <= 1e-15 * np.maximum(1.0, np.abs(xa))
        x[idx] = np.where(done, xa, xn)
        active[idx[done]] = False
    else:
        raise ConvergenceError("x_of_pi: root refinement did not converge")
    return x.reshape(shape)


def conditional_mean(prior: Prior, t, x):
    """Posterior mean of the drift given X_t = x."""
    lg = log_half_moments(prior, t, x, max_order=1)
    scale = np.maximum(lg["z_neg"], lg["z_pos"])
    num = np.exp(lg["m1_pos"] - scale) - np.exp(lg["m1_neg"] - scale)
    den = np.exp(lg["z_pos"] - scale) + np.exp(lg["z_neg"] - scale)
    return num / den


def sigma_vol(prior: Prior, t, q):
    """Volatility of the posterior-probability process at level ``q``.

    Computed as ``q (1 - q) (E[B | B >= 0] - E[B | B < 0])`` under the
    conditional law at ``x = x_of_pi(t, q)``, which is the same quantity as
    ``(1 - q) I_1^+ / Z - q I_1^- / Z``.
    """
    q = _check_q(q)
    x = x_of_pi(prior, t, q)
    _, gap = log_odds(prior, t, x)
    return q * (1.0 - q) * gap


def tail_prob(prior: Prior, t, x, a, side: str = "above"):
    """P(B > a | X_t = x) (``side='above'``) or P(B < a | X_t = x)."""
    if side not in ("above", "below"):
        raise ValueError("side must be 'above' or 'below'")
    law = posterior_law(prior, t, x)
    a = np.asarray(a, dtype=float)[..., None]
    if isinstance(prior, Discrete):
        hit = law.loc > a if side == "above" else law.loc < a
        return np.sum(law.weight * hit, axis=-1)
    with np.errstate(invalid="ignore"):
        z = (law.loc - a) / law.scale
    if side == "below":
        z = -z
    return np.sum(law.weight * ndtr(z), axis=-1)


@dataclass(frozen=True)
class PosteriorPoint:
    t: float
    x: float
    pi: float
    mean: float
    sigma: float


def posterior_point(prior: Prior, t: float, x: float) -> PosteriorPoint:
    """Bundle the posterior summaries at a single ``(t, x)``."""
    f, gap = log_odds(prior, t, x)
    p = float(np.clip(expit(f), PI_MIN, 1.0 - PI_MIN))
    return PosteriorPoint(
        t=float(t),
        x=float(x),
        pi=p,
        mean=float(conditional_mean(prior, t, x)),
        sigma=float(p * (1.0 - p) * gap),
    )
