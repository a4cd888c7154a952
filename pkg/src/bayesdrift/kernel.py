"""Transition functionals of the posterior-probability process.

All computations move to observation space: given X_t = x the future level
X_{t+u} is a location mixture ``x + B u + sqrt(u) Z`` over the conditional
drift law, and Pi_{t+u} = pi(t+u, X_{t+u}) is increasing in X_{t+u}.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import integrate
from scipy.special import ndtr, ndtri

from . import _normal
from .errors import ConfigError, DomainError
from .posterior import PI_MIN, _check_q, pi_posterior, x_of_pi
from .prior import Discrete, Prior, posterior_law

__all__ = [
    "KernelQuery",
    "transition_prob",
    "transition_prob_x",
    "normal_kernel",
    "terminal_payoff",
    "terminal_payoff_x",
    "posterior_functional",
    "DEFAULT_ORDER",
]

DEFAULT_ORDER = 64
MAX_ORDER = 512
ORDER_TOL = 1e-8


@dataclass(frozen=True)
class KernelQuery:
    """Start at Pi_t = q and ask whether lo < Pi_{t+u} < hi."""

    t: float
    u: float
    q: float
    lo: float
    hi: float

    def __post_init__(self):
        vals = (self.t, self.u, self.q, self.lo, self.hi)
        if not all(np.isfinite(v) for v in vals):
            raise DomainError("kernel query fields must be finite")
        if self.t < 0.0 or self.u < 0.0:
            raise DomainError("t and u must be non-negative")
        if not (0.0 < self.q < 1.0):
            raise DomainError("q must lie in (0, 1)")
        if not (0.0 < self.lo <= self.hi < 1.0):
            raise DomainError("need 0 < lo <= hi < 1")


# ---------------------------------------------------------------------------
# Interval probability in observation space
# ---------------------------------------------------------------------------


def _interval_discrete(law, x, u, y_lo, y_hi):
    su = np.sqrt(u)[..., None]
    centre = x[..., None] + law.loc * u[..., None]
    p = _normal.interval_prob((y_lo[..., None] - centre) / su, (y_hi[..., None] - centre) / su)
    return np.sum(law.weight * p, axis=-1)


def _interval_exact(law, x, u, y_lo, y_hi):
    uu = u[..., None]
    sd = np.sqrt(uu + law.scale**2 * uu * uu)
    centre = x[..., None] + law.loc * uu
    p = _normal.interval_prob((y_lo[..., None] - centre) / sd, (y_hi[..., None] - centre) / sd)
    return np.sum(law.weight * p, axis=-1)


def _interval_hermite(law, x, u, y_lo, y_hi, order):
    z, w = _normal.hermite_rule(order)
    uu = u[..., None, None]
    su = np.sqrt(uu)
    loc = law.loc[..., None]
    sc = law.scale[..., None]
    dlo = (y_lo - x)[..., None, None]
    dhi = (y_hi - x)[..., None, None]
    # integrate over whichever variable gives the smoother integrand
    over_b = sc * su <= 1.0
    with np.errstate(divide="ignore", invalid="ignore"):
        b = loc + sc * z
        pb = _normal.interval_prob((dlo - b * uu) / su, (dhi - b * uu) / su)
        blo = (dlo - su * z) / uu
        bhi = (dhi - su * z) / uu
        pz = _normal.interval_prob((blo - loc) / sc, (bhi - loc) / sc)
    p = np.where(over_b, pb, pz)
    return np.sum(law.weight * np.sum(w * p, axis=-1), axis=-1)


def transition_prob_x(prior: Prior, t, x, u, y_lo, y_hi, order: int | None = DEFAULT_ORDER):
    """P(y_lo < X_{t+u} < y_hi | X_t = x) for u > 0.

    Parameters
    ----------
    order : int or None
        Gauss-Hermite order for Gaussian components, doubled until two
        successive orders agree to 1e-8 (cap 512).  ``None`` uses the exact
        Gaussian convolution instead.  Ignored for discrete priors.
    """
    t, x, u, y_lo, y_hi = np.broadcast_arrays(*(np.asarray(a, dtype=float) for a in (t, x, u, y_lo, y_hi)))
    if np.any(u <= 0.0):
        raise DomainError("transition_prob_x needs u > 0")
    law = posterior_law(prior, t, x)
    if isinstance(prior, Discrete):
        return _interval_discrete(law, x, u, y_lo, y_hi)
    if order is None:
        return _interval_exact(law, x, u, y_lo, y_hi)
    if order < 2:
        raise ConfigError("quadrature order must be at least 2")
    prev = _interval_hermite(law, x, u, y_lo, y_hi, order)
    while order < MAX_ORDER:
        order *= 2
        cur = _interval_hermite(law, x, u, y_lo, y_hi, min(order, MAX_ORDER))
        if np.max(np.abs(cur - prev), initial=0.0) <= ORDER_TOL:
            return cur
        prev = cur
    return prev


def _indicator(q, lo, hi):
    inside = (lo < q) & (q < hi)
    edge = ((q == lo) | (q == hi)) & (lo < hi)
    return np.where(inside, 1.0, np.where(edge, 0.5, 0.0))


def transition_prob(prior: Prior, query: KernelQuery, order: int | None = DEFAULT_ORDER) -> float:
    """P(lo < Pi_{t+u} < hi | Pi_t = q).

    At ``u = 0`` returns the indicator of ``lo < q < hi``, with the value
    1/2 when ``q`` sits exactly on ``lo`` or ``hi``.

    Raises
    ------
    ConfigError
        If ``order`` is below 2.
    """
    if order is not None and order < 2:
        raise ConfigError("quadrature order must be at least 2")
    if query.u == 0.0:
        return float(_indicator(query.q, query.lo, query.hi))
    if query.lo == query.hi:
        return 0.0
    x = x_of_pi(prior, query.t, query.q)
    tu = query.t + query.u
    # targets at the clamp stand for the open ends 0 and 1
    y_lo = -np.inf if query.lo <= PI_MIN else x_of_pi(prior, tu, query.lo)
    y_hi = np.inf if query.hi >= 1.0 - PI_MIN else x_of_pi(prior, tu, query.hi)
    return float(transition_prob_x(prior, query.t, x, query.u, y_lo, y_hi, order))


# ---------------------------------------------------------------------------
# Closed-form kernel for normal priors
# ---------------------------------------------------------------------------


def normal_kernel(gamma: float, t, s, b_now, b_next):
    """P(b_next < Pi_{t+s} < 1 - b_next | Pi_t = b_now) for a N(m, gamma^2) prior.

    The answer does not depend on m.  With gamma_t = gamma / sqrt(1 + t gamma^2)
    and m_t = Phi^{-1}(b_now) gamma_t the result is Phi(d2) - Phi(d1) where

        d1 = (Phi^{-1}(b_next) gamma_t sqrt(1 + s gamma_t^2) - m_t (1 + s gamma_t^2))
             / (gamma_t^2 sqrt(s + s^2 gamma_t^2))

    and d2 is the same with Phi^{-1}(b_next) negated.
    """
    if not gamma > 0.0:
        raise DomainError("gamma must be positive")
    t, s, b_now, b_next = np.broadcast_arrays(*(np.asarray(a, dtype=float) for a in (t, s, b_now, b_next)))
    if np.any(s <= 0.0) or np.any(t < 0.0):
        raise DomainError("need t >= 0 and s > 0")
    if np.any(~((b_now > 0.0) & (b_now < 1.0))):
        raise DomainError("b_now must lie in (0, 1)")
    if np.any(~((b_next > 0.0) & (b_next <= 0.5))):
        raise DomainError("b_next must lie in (0, 1/2]")
    gt = gamma / np.sqrt(1.0 + t * gamma * gamma)
    mt = ndtri(b_now) * gt
    k = 1.0 + s * gt * gt
    den = gt * gt * np.sqrt(s + s * s * gt * gt)
    a = ndtri(b_next) * gt * np.sqrt(k)
    d1 = (a - mt * k) / den
    d2 = (-a - mt * k) / den
    return _normal.interval_prob(d1, d2)


# ---------------------------------------------------------------------------
# Terminal loss
# ---------------------------------------------------------------------------


def terminal_payoff_x(prior: Prior, t, x, u, y_star):
    """E[g(Pi_{t+u}) | X_t = x] with g(p) = min(p, 1 - p), for u > 0.

    ``y_star`` is the level where pi(t+u, .) = 1/2.  The expectation equals
    P(B >= 0, X_{t+u} < y*) + P(B < 0, X_{t+u} >= y*).
    """
    t, x, u, y_star = np.broadcast_arrays(*(np.asarray(a, dtype=float) for a in (t, x, u, y_star)))
    law = posterior_law(prior, t, x)
    uu = u[..., None]
    d = (y_star - x)[..., None]
    if isinstance(prior, Discrete):
        k = (d - law.loc * uu) / np.sqrt(uu)
        pos = law.loc >= 0.0
        p = np.where(pos, ndtr(k), ndtr(-k))
        return np.sum(law.weight * p, axis=-1)
    s = law.scale
    h = law.loc / s
    k = (d - law.loc * uu) / np.sqrt(uu * uu * s * s + uu)
    rho = -s * np.sqrt(uu) / np.sqrt(1.0 + s * s * uu)
    p = _normal.bvn_cdf(h, k, rho) + _normal.bvn_cdf(-h, -k, rho)
    return np.sum(law.weight * p, axis=-1)


def terminal_payoff(prior: Prior, t: float, q: float, T: float) -> float:
    """Expected terminal loss E[min(Pi_T, 1 - Pi_T) | Pi_t = q].

    Raises
    ------
    DomainError
        If ``T < t``.
    """
    if T < t:
        raise DomainError("terminal time T must not precede t")
    q = float(_check_q(q))
    if T == t:
        return min(q, 1.0 - q)
    x = x_of_pi(prior, t, q)
    y_star = x_of_pi(prior, T, 0.5)
    return float(terminal_payoff_x(prior, t, x, T - t, y_star))


# ---------------------------------------------------------------------------
# Quadrature oracle
# ---------------------------------------------------------------------------


def posterior_functional(prior: Prior, t: float, q: float, u: float, func, breaks=()) -> float:
    """E[func(Pi_{t+u}) | Pi_t = q] by adaptive quadrature over X_{t+u}.

    The density of X_{t+u} is the Gaussian location mixture over the
    conditional drift law.  ``breaks`` are extra observation-space points
    where ``func(pi(t+u, .))`` has kinks.
    """
    if u <= 0.0:
        return float(func(q))
    x = float(x_of_pi(prior, t, q))
    law = posterior_law(prior, t, x)
    w = law.weight
    centre = x + law.loc * u
    sd = np.sqrt(u + law.scale**2 * u * u)
    keep = w > 1e-300
    w, centre, sd = w[keep], centre[keep], sd[keep]

    def dens(y):
        return float(np.sum(w * np.exp(-0.5 * ((y - centre) / sd) ** 2) / (sd * np.sqrt(2.0 * np.pi))))

    def integrand(y):
        return func(float(pi_posterior(prior, t + u, y))) * dens(y)

    lo = float(np.min(centre - 12.0 * sd))
    hi = float(np.max(centre + 12.0 * sd))
    pts = sorted({lo, hi, *centre.tolist(), *[float(b) for b in breaks if lo < b < hi]})
    total = 0.0
    for a, b in zip(pts[:-1], pts[1:]):
        val, _ = integrate.quad(integrand, a, b, epsabs=1e-13, epsrel=1e-12, limit=200)
        total += val
    return total
