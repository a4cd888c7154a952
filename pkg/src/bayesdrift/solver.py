"""Optimal stopping boundaries by backward induction on the integral equations.

At each time node t_i the lower boundary solves

    b = E[g(Pi_T) | Pi_{t_i} = b] + c * int_0^{T - t_i} P(b1(t_i+u) < Pi_{t_i+u} < b2(t_i+u)) du

and the upper boundary solves the same equation with ``1 - b`` on the left.
The time integral uses the trapezoid rule on the solver grid.  Its u = 0
term takes the kernel value 1/2 because the start sits on the boundary.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field, replace

import numpy as np

from . import _normal
from .errors import ConfigError, ConvergenceError, DomainError, SolverError
from .kernel import terminal_payoff_x, transition_prob_x
from .posterior import PI_MIN, pi_posterior, x_of_pi
from .prior import Prior, support_gap

__all__ = [
    "SolverConfig",
    "BoundaryCurve",
    "ValueSurface",
    "solve_finite",
    "solve_perpetual",
    "value_surface",
    "value_at",
    "integral_residual",
    "smooth_fit_quotients",
    "pde_residual",
    "two_point_perpetual",
    "asymptote",
    "time_grid",
]

_GL_ORDER = 16
# trapezoid pieces per solver cell when reconstructing the value
_VALUE_SUB = 8


# ---------------------------------------------------------------------------
# Data types
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SolverConfig:
    """Numerical settings for the boundary solver.

    Parameters
    ----------
    T : float
        Horizon.  For :func:`solve_perpetual` this is the first horizon and
        the length of the comparison window.
    n_time : int
        Number of time nodes including both ends.
    quad_order : int or None
        Gauss-Hermite order for Gaussian components.  ``None`` uses the exact
        Gaussian convolution, which is faster and has no quadrature error.
    root_tol : float
        Bisection tolerance on each boundary value.
    fixed_point_tol : float
        Sweeps stop once no node moves by more than this.
    max_sweeps : int
    perpetual_tol : float
        Horizon doubling stops once the window values change by less than this.
    perpetual_T_cap : float or None
        Largest horizon tried by :func:`solve_perpetual`; defaults to 64 T.
    grid : {"uniform", "clustered"}
        ``"clustered"`` puts ``cluster_frac`` of the nodes into the final 10%
        of the horizon with square-root spacing towards T.
    cluster_frac : float
    """

    T: float = 1.0
    n_time: int = 128
    quad_order: int | None = None
    root_tol: float = 1e-9
    fixed_point_tol: float = 1e-7
    max_sweeps: int = 50
    perpetual_tol: float = 1e-4
    perpetual_T_cap: float | None = None
    grid: str = "uniform"
    cluster_frac: float = 0.25

    def __post_init__(self):
        if not (math.isfinite(self.T) and self.T > 0.0):
            raise ConfigError(f"T must be a positive number (got {self.T!r})")
        if int(self.n_time) != self.n_time or self.n_time < 16:
            raise ConfigError(f"n_time must be an integer >= 16 (got {self.n_time!r})")
        if self.quad_order is not None and (int(self.quad_order) != self.quad_order or self.quad_order < 2):
            raise ConfigError(f"quad_order must be an integer >= 2 or null (got {self.quad_order!r})")
        for name in ("root_tol", "fixed_point_tol", "perpetual_tol"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0.0):
                raise ConfigError(f"{name} must be positive (got {v!r})")
        if int(self.max_sweeps) != self.max_sweeps or self.max_sweeps < 1:
            raise ConfigError(f"max_sweeps must be a positive integer (got {self.max_sweeps!r})")
        if self.perpetual_T_cap is not None and not self.perpetual_T_cap >= self.T:
            raise ConfigError("perpetual_T_cap must be at least T")
        if self.grid not in ("uniform", "clustered"):
            raise ConfigError(f"grid must be 'uniform' or 'clustered' (got {self.grid!r})")
        if not (0.0 < self.cluster_frac < 1.0):
            raise ConfigError("cluster_frac must lie in (0, 1)")


@dataclass(frozen=True)
class BoundaryCurve:
    """Stopping boundaries on a time grid, linear between nodes.

    ``horizon_kind`` is ``"finite"`` (``horizon`` = T) or
    ``"perpetual_approx"`` (``horizon`` = the last horizon solved).
    Outside the grid the end values are held constant.
    """

    times: np.ndarray
    b1: np.ndarray
    b2: np.ndarray
    horizon_kind: str = "finite"
    horizon: float = float("nan")
    info: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        for name in ("times", "b1", "b2"):
            arr = np.array(getattr(self, name), dtype=float)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        if not (self.times.ndim == 1 and self.times.shape == self.b1.shape == self.b2.shape):
            raise DomainError("times, b1 and b2 must be 1-d arrays of equal length")
        if self.times.size < 2:
            raise DomainError("a boundary curve needs at least two nodes")
        if self.horizon_kind not in ("finite", "perpetual_approx"):
            raise DomainError(f"unknown horizon kind {self.horizon_kind!r}")
        if math.isnan(self.horizon):
            object.__setattr__(self, "horizon", float(self.times[-1]))

    @property
    def T(self) -> float:
        return float(self.times[-1])

    def b1_at(self, t):
        return np.interp(t, self.times, self.b1)

    def b2_at(self, t):
        return np.interp(t, self.times, self.b2)

    def violations(self, tol: float = 1e-9) -> list[str]:
        """Messages for every broken curve invariant (empty when valid)."""
        out = []
        t, b1, b2 = self.times, self.b1, self.b2
        if not np.all(np.isfinite(t)) or not np.all(np.diff(t) > 0.0) or t[0] != 0.0:
            out.append("times must start at 0 and increase strictly")
        if not (np.all(np.isfinite(b1)) and np.all(np.isfinite(b2))):
            out.append("boundary values must be finite")
            return out
        if np.any(b1 <= 0.0) or np.any(b1 > 0.5):
            out.append("b1 must lie in (0, 1/2]")
        if np.any(b2 < 0.5) or np.any(b2 >= 1.0):
            out.append("b2 must lie in [1/2, 1)")
        if np.any(np.diff(b1) < -tol):
            i = int(np.argmin(np.diff(b1)))
            out.append(f"b1 decreases between nodes {i} and {i + 1}")
        if np.any(np.diff(b2) > tol):
            i = int(np.argmax(np.diff(b2)))
            out.append(f"b2 increases between nodes {i} and {i + 1}")
        if self.horizon_kind == "finite" and not (b1[-1] == 0.5 and b2[-1] == 0.5):
            out.append("finite-horizon curves must end at b1 = b2 = 1/2")
        return out


@dataclass(frozen=True)
class ValueSurface:
    """Value function on a (time, probability) grid; ``values[i, k]`` is
    v(times[i], pi[k])."""

    times: np.ndarray
    pi: np.ndarray
    values: np.ndarray
    formula: np.ndarray = field(repr=False)
    inside: np.ndarray = field(repr=False)


# ---------------------------------------------------------------------------
# Grid
# ---------------------------------------------------------------------------


def time_grid(config: SolverConfig) -> np.ndarray:
    T, n = config.T, int(config.n_time)
    if config.grid == "uniform":
        t = np.linspace(0.0, T, n)
    else:
        nc = max(4, int(round(config.cluster_frac * n)))
        head = np.linspace(0.0, 0.9 * T, n - nc)
        k = np.arange(1, nc + 1) / nc
        tail = T - 0.1 * T * (1.0 - k) ** 2
        t = np.concatenate([head, tail])
    t[-1] = T
    return t


def _trapezoid_weights(times: np.ndarray, i: int) -> np.ndarray:
    h = np.diff(times[i:])
    w = np.zeros(times.size - i)
    w[:-1] += 0.5 * h
    w[1:] += 0.5 * h
    return w


# ---------------------------------------------------------------------------
# Finite horizon
# ---------------------------------------------------------------------------


class _NodeEquation:
    """Right-hand side of the boundary equation at one node, in x-space."""

    def __init__(self, prior, c, times, i, y_lo, y_hi, y_star, order):
        self.prior = prior
        self.c = c
        self.t = times[i]
        self.tau = times[-1] - times[i]
        self.u = times[i + 1 :] - times[i]
        self.w = _trapezoid_weights(times, i)
        self.y_lo = y_lo[i + 1 :]
        self.y_hi = y_hi[i + 1 :]
        self.y_star = y_star
        self.order = order

    def rhs(self, x):
        x = np.atleast_1d(np.asarray(x, dtype=float))
        term = terminal_payoff_x(self.prior, self.t, x, self.tau, self.y_star)
        k = transition_prob_x(self.prior, self.t, x[:, None], self.u, self.y_lo, self.y_hi, self.order)
        q = self.w[0] * 0.5 + k @ self.w[1:]
        return term + self.c * q

    def residual(self, x, side):
        q = pi_posterior(self.prior, self.t, x)
        r = self.rhs(x)
        return r - q if side == "lower" else r - (1.0 - q)


def _solve_node(eq: _NodeEquation, side: str, guess: float, width: float, tol: float, node: int) -> float:
    """Bisection for one boundary value; the bracket starts at ``guess``
    +/- ``width`` and grows towards the admissible end points."""
    prior, t = eq.prior, eq.t
    if side == "lower":
        lo_lim, hi_lim = PI_MIN, 0.5
    else:
        lo_lim, hi_lim = 0.5, 1.0 - PI_MIN

    # residual > 0 on the stopping side; the sign flips across the boundary
    def sgn(q):
        x = float(x_of_pi(prior, t, q))
        r = float(eq.residual(x, side)[0])
        return r if side == "lower" else -r

    a = max(lo_lim, guess - width)
    b = min(hi_lim, guess + width)
    fa, fb = sgn(a), sgn(b)
    w = width
    while fa <= 0.0 and a > lo_lim:
        b, fb = a, fa
        w *= 4.0
        a = max(lo_lim, a - w)
        fa = sgn(a)
    w = width
    while fb > 0.0 and b < hi_lim:
        a, fa = b, fb
        w *= 4.0
        b = min(hi_lim, b + w)
        fb = sgn(b)
    if fb > 0.0:
        return b  # stop immediately at the midline
    if fa <= 0.0:
        raise SolverError(
            f"no sign change for the {side} boundary at node {node} (t = {t!r}); "
            "try a finer grid or check the cost and prior",
            node=node,
        )
    xa = float(x_of_pi(prior, t, a))
    xb = float(x_of_pi(prior, t, b))
    qa, qb = a, b
    while qb - qa > tol:
        xm = 0.5 * (xa + xb)
        if xm <= xa or xm >= xb:
            break
        qm = float(pi_posterior(prior, t, xm))
        r = float(eq.residual(xm, side)[0])
        if side == "upper":
            r = -r
        if r > 0.0:
            xa, qa = xm, qm
        else:
            xb, qb = xm, qm
    return 0.5 * (qa + qb)


def _backward_pass(prior, c, times, b1, b2, symmetric, config, first, sweep_width):
    n = times.size
    y_star = float(x_of_pi(prior, times[-1], 0.5))
    y_lo = np.empty(n)
    y_hi = np.empty(n)
    y_lo[-1] = y_hi[-1] = y_star
    moved = 0.0
    for i in range(n - 2, -1, -1):
        eq = _NodeEquation(prior, c, times, i, y_lo, y_hi, y_star, config.quad_order)
        if first:
            # extrapolate from the two later nodes and search around it
            nxt1, nxt2 = b1[i + 1], b1[min(i + 2, n - 1)]
            guess = nxt1 - (nxt2 - nxt1) if i + 2 < n else 0.5
            width = max(2.0 * abs(nxt2 - nxt1), 1e-3)
        else:
            guess, width = b1[i], sweep_width
        new1 = _solve_node(eq, "lower", min(guess, 0.5), width, config.root_tol, i)
        if symmetric:
            new2 = 1.0 - new1
        else:
            if first:
                nxt1, nxt2 = b2[i + 1], b2[min(i + 2, n - 1)]
                guess = nxt1 - (nxt2 - nxt1) if i + 2 < n else 0.5
                width = max(2.0 * abs(nxt2 - nxt1), 1e-3)
            else:
                guess = b2[i]
            new2 = _solve_node(eq, "upper", max(guess, 0.5), width, config.root_tol, i)
        if not first:
            moved = max(moved, abs(new1 - b1[i]), abs(new2 - b2[i]))
        b1[i], b2[i] = new1, new2
        y_lo[i] = x_of_pi(prior, times[i], new1)
        y_hi[i] = x_of_pi(prior, times[i], new2)
    return moved


def solve_finite(prior: Prior, c: float, config: SolverConfig, times: np.ndarray | None = None) -> BoundaryCurve:
    """Finite-horizon stopping boundaries by backward induction.

    Parameters
    ----------
    prior : Prior
    c : float
        Observation cost per unit time, > 0.
    config : SolverConfig
    times : array, optional
        Explicit time grid overriding ``config.T``/``n_time``/``grid``.

    Returns
    -------
    BoundaryCurve
        ``info`` records the sweep count and final sweep movement.

    Raises
    ------
    SolverError
        When a node equation has no sign change in its bracket.
    ConvergenceError
        When ``max_sweeps`` passes do not settle.
    """
    if not (math.isfinite(c) and c > 0.0):
        raise ConfigError(f"cost c must be positive (got {c!r})")
    times = time_grid(config) if times is None else np.asarray(times, dtype=float)
    n = times.size
    b1 = np.full(n, 0.5)
    b2 = np.full(n, 0.5)
    symmetric = prior.symmetric_volatility
    _backward_pass(prior, c, times, b1, b2, symmetric, config, True, 0.0)
    moved = math.nan
    sweeps = 1
    while sweeps < config.max_sweeps:
        sweeps += 1
        moved = _backward_pass(prior, c, times, b1, b2, symmetric, config, False, 8.0 * config.root_tol)
        if moved < config.fixed_point_tol:
            break
    else:
        if config.max_sweeps > 1:
            raise ConvergenceError(f"boundary sweeps did not settle within {config.max_sweeps} passes (last move {moved!r})")
    b1[-1] = b2[-1] = 0.5
    return BoundaryCurve(
        times,
        b1,
        b2,
        "finite",
        float(times[-1]),
        {"sweeps": sweeps, "sweep_movement": moved, "symmetric": symmetric, "root_tol": config.root_tol},
    )


# ---------------------------------------------------------------------------
# Reconstruction of the right-hand side at arbitrary (t, pi)
# ---------------------------------------------------------------------------


def _rhs_at(prior, c, curve: BoundaryCurve, t: float, q: np.ndarray, order=None, sub: int = _VALUE_SUB, gl_order: int = _GL_ORDER):
    """terminal_payoff + c * Q at time ``t`` for start values ``q``.

    The first time cell uses Gauss-Legendre in s = sqrt(u / h), which
    resolves the square-root behaviour of the kernel near u = 0.  Later
    cells use the trapezoid rule, each split into ``sub`` pieces with the
    boundaries interpolated linearly.
    """
    times = curve.times
    T = curve.T
    q = np.atleast_1d(np.asarray(q, dtype=float))
    if t >= T:
        return np.minimum(q, 1.0 - q)
    x = x_of_pi(prior, t, q)
    y_star = float(x_of_pi(prior, T, 0.5))
    term = terminal_payoff_x(prior, t, x, T - t, y_star)

    j0 = int(np.searchsorted(times, t, side="right"))
    h1 = times[j0] - t
    s, ws = _normal.legendre_rule(gl_order)
    u1 = h1 * s * s
    w1 = 2.0 * h1 * s * ws
    nodes_t = [t + u1]
    weights = [w1]
    rest = times[j0:]
    if sub > 1 and rest.size > 1:
        frac = np.arange(sub) / sub
        fine = (rest[:-1, None] + np.diff(rest)[:, None] * frac).ravel()
        rest = np.concatenate([fine, rest[-1:]])
    if rest.size > 1:
        h = np.diff(rest)
        w = np.zeros(rest.size)
        w[:-1] += 0.5 * h
        w[1:] += 0.5 * h
        nodes_t.append(rest)
        weights.append(w)
    tt = np.concatenate(nodes_t)
    ww = np.concatenate(weights)
    lo = curve.b1_at(tt)
    hi = curve.b2_at(tt)
    y_lo = x_of_pi(prior, tt, lo)
    y_hi = x_of_pi(prior, tt, hi)
    k = transition_prob_x(prior, t, x[:, None], tt - t, y_lo, y_hi, order)
    return term + c * (k @ ww)


def value_at(prior: Prior, c: float, curve: BoundaryCurve, t: float, q) -> np.ndarray:
    """v(t, q) reconstructed from the boundaries.

    Equal to g outside the continuation region and to
    ``min(g, terminal + c Q)`` inside it.
    """
    q = np.atleast_1d(np.asarray(q, dtype=float))
    g = np.minimum(q, 1.0 - q)
    inside = (q > curve.b1_at(t)) & (q < curve.b2_at(t))
    out = g.copy()
    if np.any(inside) and t < curve.T:
        out[inside] = np.minimum(g[inside], _rhs_at(prior, c, curve, t, q[inside]))
    return out


def value_surface(
    prior: Prior, c: float, curve: BoundaryCurve, config: SolverConfig | None = None, n_pi: int = 512, sub: int = _VALUE_SUB
) -> ValueSurface:
    """Value function on the curve's time grid and ``n_pi`` interior
    probabilities k / (n_pi + 1).

    Each solver cell is split into ``sub`` trapezoid pieces; one piece per
    cell leaves an O(h) error close to the boundaries.
    """
    order = None if config is None else config.quad_order
    pi = np.arange(1, n_pi + 1) / (n_pi + 1)
    g = np.minimum(pi, 1.0 - pi)
    times = curve.times
    values = np.tile(g, (times.size, 1))
    formula = np.full_like(values, np.nan)
    inside = (pi[None, :] > curve.b1[:, None]) & (pi[None, :] < curve.b2[:, None])
    for i, t in enumerate(times[:-1]):
        sel = inside[i]
        if np.any(sel):
            f = _rhs_at(prior, c, curve, float(t), pi[sel], order, sub=sub)
            formula[i, sel] = f
            values[i, sel] = np.minimum(g[sel], f)
    inside[-1] = False
    return ValueSurface(times, pi, values, formula, inside)


# ---------------------------------------------------------------------------
# Diagnostics
# ---------------------------------------------------------------------------


def integral_residual(prior: Prior, c: float, curve: BoundaryCurve, sub: int = 8, order=None) -> np.ndarray:
    """Per-node residual of the boundary equations under a fine quadrature.

    The right-hand side is recomputed with a Gauss-Legendre first cell and
    ``sub`` trapezoid pieces per later cell, using the linearly
    interpolated curve.  Returns ``max(|b1 - rhs1|, |1 - b2 - rhs2|)`` per
    node (zero at the final node).
    """
    n = curve.times.size
    res = np.zeros(n)
    for i in range(n - 1):
        t = float(curve.times[i])
        r = _rhs_at(prior, c, curve, t, np.array([curve.b1[i], curve.b2[i]]), order, sub=sub)
        res[i] = max(abs(curve.b1[i] - r[0]), abs(1.0 - curve.b2[i] - r[1]))
    return res


def smooth_fit_quotients(prior: Prior, c: float, curve: BoundaryCurve, t: float, delta: float) -> tuple[float, float]:
    """One-sided difference quotients of the reconstructed value at the
    boundaries: (v(b1 + d) - v(b1)) / d and (v(b2) - v(b2 - d)) / d.

    Both values use the same reconstruction formula so that its
    discretization error largely cancels.
    """
    b1 = float(curve.b1_at(t))
    b2 = float(curve.b2_at(t))
    r = _rhs_at(prior, c, curve, t, np.array([b1, b1 + delta, b2 - delta, b2]))
    return (r[1] - r[0]) / delta, (r[3] - r[2]) / delta


def pde_residual(prior: Prior, c: float, surface: ValueSurface, margin: int = 2, t_frac: float = 0.9) -> np.ndarray:
    """Central-difference residual of v_t + sigma^2 / 2 v_pipi + c.

    Evaluated where the stencil and ``margin`` neighbours on each side lie
    in the continuation region, for times up to ``t_frac`` of the horizon.
    Other entries are NaN.
    """
    from .posterior import sigma_vol

    t, p, v = surface.times, surface.pi, surface.formula
    res = np.full(v.shape, np.nan)
    dp = p[1] - p[0]
    T = t[-1]
    for i in range(1, t.size - 1):
        if t[i] > t_frac * T:
            break
        ok = surface.inside[i - 1] & surface.inside[i] & surface.inside[i + 1]
        for _ in range(margin):
            ok[1:-1] = ok[1:-1] & ok[:-2] & ok[2:]
        ok[0] = ok[-1] = False
        idx = np.nonzero(ok)[0]
        if idx.size == 0:
            continue
        vt = (v[i + 1, idx] - v[i - 1, idx]) / (t[i + 1] - t[i - 1])
        vpp = (v[i, idx + 1] - 2.0 * v[i, idx] + v[i, idx - 1]) / dp**2
        sig = sigma_vol(prior, t[i], p[idx])
        res[i, idx] = vt + 0.5 * sig**2 * vpp + c
    return res


# ---------------------------------------------------------------------------
# Perpetual problem
# ---------------------------------------------------------------------------


def solve_perpetual(prior: Prior, c: float, config: SolverConfig) -> BoundaryCurve:
    """Approximate perpetual boundaries by doubling the horizon.

    Horizons T, 2T, 4T, ... are solved with a fixed step T / (n_time - 1)
    until the boundaries on the window [0, T] change by less than
    ``perpetual_tol``, or ``perpetual_T_cap`` is reached.  The returned
    curve covers the window only.  ``info`` holds the effective horizon,
    the achieved change, a ``converged`` flag and ``b1_at_0`` for every
    horizon tried.  ``monotone`` checks that b1 fell and b2 rose with the
    horizon at every window node and ``max_rise`` is the worst breach;
    ``monotone_at_0`` checks b1 at t = 0 only.  Breaches concentrate at the
    window end, where the shortest horizon's final cell is coarse.
    ``final_curve`` is the full finite-horizon curve of the last horizon.
    """
    T0 = config.T
    cap = config.perpetual_T_cap if config.perpetual_T_cap is not None else 64.0 * T0
    m = int(config.n_time) - 1
    window = np.linspace(0.0, T0, m + 1)
    prev = None
    history = []
    max_rise = 0.0
    change = math.inf
    k = 0
    while True:
        T = T0 * 2**k
        times = np.linspace(0.0, T, m * 2**k + 1)
        cur = solve_finite(prior, c, replace(config, T=T), times=times)
        w1, w2 = cur.b1[: m + 1], cur.b2[: m + 1]
        history.append(float(cur.b1[0]))
        if prev is not None:
            change = float(max(np.max(np.abs(w1 - prev[0])), np.max(np.abs(w2 - prev[1]))))
            max_rise = max(max_rise, float(np.max(w1 - prev[0])), float(np.max(prev[1] - w2)))
        prev = (w1, w2)
        if change < config.perpetual_tol or 2.0 * T > cap * (1 + 1e-12):
            break
        k += 1
    converged = change < config.perpetual_tol
    if not converged:
        warnings.warn(
            f"perpetual approximation stopped at T = {T!r} with change {change!r} > {config.perpetual_tol!r}",
            RuntimeWarning,
            stacklevel=2,
        )
    return BoundaryCurve(
        window,
        prev[0],
        prev[1],
        "perpetual_approx",
        float(T),
        {
            "T_effective": float(T),
            "achieved_tol": change,
            "converged": bool(converged),
            "monotone": bool(max_rise <= 1e-10),
            "monotone_at_0": bool(np.all(np.diff(history) <= 1e-10)),
            "max_rise": max_rise,
            "b1_at_0": history,
            "symmetric": prior.symmetric_volatility,
            "final_curve": cur,
        },
    )


def _psi_prime(p):
    L = np.log((1.0 - p) / p)
    return -2.0 * L - (1.0 - 2.0 * p) / (p * (1.0 - p))


def two_point_perpetual(mu_gap: float, c: float, tol: float = 1e-15) -> float:
    """Lower perpetual boundary A for volatility mu_gap * pi * (1 - pi).

    A is the root in (0, 1/2) of -(2 c / mu_gap^2) Psi'(A) = 1 where
    Psi(p) = (1 - 2p) log((1 - p) / p).  The upper boundary is 1 - A.
    """
    if not (mu_gap > 0.0 and c > 0.0):
        raise DomainError("mu_gap and c must be positive")
    k = 2.0 * c / mu_gap**2

    def f(p):
        return -k * _psi_prime(p) - 1.0

    a, b = 0.25, 0.5
    while f(a) <= 0.0:
        b = a
        a *= 0.5
        if a < 1e-300:
            raise ConvergenceError("two_point_perpetual: no bracket")
    while b - a > tol * b:
        m = 0.5 * (a + b)
        if m <= a or m >= b:
            break
        if f(m) > 0.0:
            a = m
        else:
            b = m
    return 0.5 * (a + b)


def asymptote(prior: Prior, c: float) -> tuple[float, float]:
    """Long-run limits (b1(inf), b2(inf)) of the perpetual boundaries."""
    l, r = support_gap(prior)
    if l == 0.0 and r == 0.0:
        return 0.5, 0.5
    a = two_point_perpetual(r - l, c)
    return a, 1.0 - a
