"""Standard-normal helpers that stay accurate far into the tails.

The half-line moment engine works with ``a = mean / sd`` values that can be
in the thousands, so every quantity here is returned either in log form or
as a difference that avoids subtracting two numbers close to one.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np
from scipy.special import erfcx, log_ndtr, ndtr, owens_t

LOG_SQRT_2PI = 0.5 * np.log(2.0 * np.pi)
SQRT_HALF_PI = np.sqrt(0.5 * np.pi)

# beyond this the asymptotic Mills-ratio series is used (truncation < 1e-13)
_SERIES_CUTOFF = 30.0


def mills_ratio(u):
    """Phi(-u) / phi(u), evaluated through the scaled complementary erf."""
    return SQRT_HALF_PI * erfcx(np.asarray(u, dtype=float) / np.sqrt(2.0))


def _one_minus_u_mills(u):
    # 1 - u R(u) for u >= 0; tends to 1/u^2 and cancels badly, hence the series
    u = np.asarray(u, dtype=float)
    out = np.empty_like(u)
    big = u > _SERIES_CUTOFF
    small = ~big
    us = u[small]
    out[small] = 1.0 - us * mills_ratio(us)
    e = 1.0 / u[big] ** 2
    out[big] = e * (1.0 + e * (-3.0 + e * (15.0 + e * (-105.0 + e * (945.0 + e * (-10395.0 + e * 135135.0))))))
    return out


def _second_tail_factor(u):
    # (1 + u^2) R(u) - u for u >= 0; tends to 2/u^3
    u = np.asarray(u, dtype=float)
    out = np.empty_like(u)
    big = u > _SERIES_CUTOFF
    small = ~big
    us = u[small]
    out[small] = (1.0 + us * us) * mills_ratio(us) - us
    ub = u[big]
    e = 1.0 / ub**2
    poly = 1.0 + e * (-6.0 + e * (45.0 + e * (-420.0 + e * (4725.0 + e * (-62370.0 + e * 945945.0)))))
    out[big] = 2.0 / ub**3 * poly
    return out


def logsumexp(a, axis=-1, keepdims=False):
    """log(sum(exp(a))) along ``axis``; all -inf gives -inf."""
    a = np.asarray(a, dtype=float)
    m = np.max(a, axis=axis, keepdims=True)
    m = np.where(np.isfinite(m), m, 0.0)
    with np.errstate(divide="ignore"):
        out = np.log(np.sum(np.exp(a - m), axis=axis, keepdims=True)) + m
    return out if keepdims else np.squeeze(out, axis=axis)


def log_pdf(a):
    a = np.asarray(a, dtype=float)
    return -0.5 * a * a - LOG_SQRT_2PI


def log_psi1(a):
    """log E[(Z + a) 1{Z > -a}] = log(a Phi(a) + phi(a))."""
    a = np.asarray(a, dtype=float)
    out = np.empty(np.broadcast(a).shape)
    a = np.broadcast_to(a, out.shape)
    pos = a >= 0.0
    ap = a[pos]
    out[pos] = np.log(ap * ndtr(ap) + np.exp(log_pdf(ap)))
    un = -a[~pos]
    out[~pos] = log_pdf(un) + np.log(_one_minus_u_mills(un))
    return out


def log_psi2(a):
    """log E[(Z + a)^2 1{Z > -a}] = log((1 + a^2) Phi(a) + a phi(a))."""
    a = np.asarray(a, dtype=float)
    out = np.empty(np.broadcast(a).shape)
    a = np.broadcast_to(a, out.shape)
    pos = a >= 0.0
    ap = a[pos]
    out[pos] = np.log((1.0 + ap * ap) * ndtr(ap) + ap * np.exp(log_pdf(ap)))
    un = -a[~pos]
    out[~pos] = log_pdf(un) + np.log(_second_tail_factor(un))
    return out


def log_cdf(a):
    return log_ndtr(np.asarray(a, dtype=float))


def interval_prob(lo, hi):
    """P(lo < Z < hi) for standard normal Z, accurate when both ends sit in
    the same tail."""
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    upper = lo > 0.0
    out = np.where(upper, ndtr(-lo) - ndtr(-hi), ndtr(hi) - ndtr(lo))
    return np.maximum(out, 0.0)


def bvn_cdf(h, k, rho):
    """P(Z1 < h, Z2 < k) for a standard bivariate normal with correlation rho.

    Uses Owen's T decomposition; |rho| must be strictly below one.
    """
    h, k, rho = np.broadcast_arrays(
        np.asarray(h, dtype=float), np.asarray(k, dtype=float), np.asarray(rho, dtype=float)
    )
    root = np.sqrt(1.0 - rho * rho)
    with np.errstate(divide="ignore", invalid="ignore"):
        ah = (k - rho * h) / (h * root)
        ak = (h - rho * k) / (k * root)
        th = np.where(h == 0.0, 0.25 * np.sign(k), owens_t(h, ah))
        tk = np.where(k == 0.0, 0.25 * np.sign(h), owens_t(k, ak))
    beta = np.where((h * k > 0.0) | ((h * k == 0.0) & (h + k >= 0.0)), 0.0, 0.5)
    out = 0.5 * ndtr(h) + 0.5 * ndtr(k) - th - tk - beta
    both_zero = (h == 0.0) & (k == 0.0)
    out = np.where(both_zero, 0.25 + np.arcsin(rho) / (2.0 * np.pi), out)
    return np.clip(out, 0.0, 1.0)


@lru_cache(maxsize=16)
def hermite_rule(order: int) -> tuple[np.ndarray, np.ndarray]:
    """Nodes and weights with sum(w * f(z)) ~= E[f(Z)], Z ~ N(0, 1)."""
    z, w = np.polynomial.hermite_e.hermegauss(order)
    w = w / np.sqrt(2.0 * np.pi)
    z.setflags(write=False)
    w.setflags(write=False)
    return z, w


@lru_cache(maxsize=8)
def legendre_rule(order: int) -> tuple[np.ndarray, np.ndarray]:
    """Gauss-Legendre nodes and weights on (0, 1)."""
    s, w = np.polynomial.legendre.leggauss(order)
    s = 0.5 * (s + 1.0)
    w = 0.5 * w
    s.setflags(write=False)
    w.setflags(write=False)
    return s, w
