"""Prior laws for the unknown drift and their exponentially tilted moments.

Everything downstream is built from integrals of the form

    I_k^{+/-}(t, x) = int_{b >= 0 / b < 0} b^k exp(b x - b^2 t / 2) mu(db)

for k = 0, 1, 2.  For discrete priors these are finite sums.  For Gaussian
components they reduce to truncated-normal moments of the conjugate
posterior N(mp, s^2) with mp = (m + gamma^2 x) / (1 + t gamma^2) and
s^2 = gamma^2 / (1 + t gamma^2).  All work is done in log space.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import ndtr

from . import _normal
from ._normal import logsumexp
from .errors import DomainError, PriorError

__all__ = [
    "Prior",
    "Discrete",
    "Gaussian",
    "GaussianMixture",
    "HalfMoments",
    "PosteriorLaw",
    "half_moments",
    "log_half_moments",
    "mass_nonneg",
    "support_gap",
    "posterior_law",
    "prior_from_dict",
    "prior_to_dict",
]

_WEIGHT_TOL = 1e-12


# ---------------------------------------------------------------------------
# Prior types
# ---------------------------------------------------------------------------


class Prior:
    """Base class; use :class:`Discrete`, :class:`Gaussian` or
    :class:`GaussianMixture`."""

    #: sup of eps with int exp(eps b^2) mu(db) < inf
    eps_bound: float

    @property
    def symmetric_volatility(self) -> bool:
        """True when the stopping problem is invariant under pi -> 1 - pi."""
        raise NotImplementedError

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        raise NotImplementedError


def _check_weights(w: np.ndarray) -> np.ndarray:
    if w.size == 0:
        raise PriorError("prior needs at least one atom or component")
    if not np.all(np.isfinite(w)) or np.any(w <= 0.0):
        raise PriorError("prior weights must be finite and strictly positive")
    total = math.fsum(w.tolist())
    if abs(total - 1.0) > _WEIGHT_TOL:
        raise PriorError(f"prior weights must sum to 1 (got {total!r}); use normalized=True to rescale")
    return w


def _check_mass(p_pos: float) -> None:
    if not (0.0 < p_pos < 1.0):
        raise PriorError(
            "degenerate prior: the mass condition 0 < mu([0, inf)) < 1 fails "
            f"(mu([0, inf)) = {p_pos!r}); the test is trivial when one hypothesis has no mass"
        )


@dataclass(frozen=True)
class Discrete(Prior):
    """Finitely many drift values ``b`` with probabilities ``w``.

    Parameters
    ----------
    atoms : sequence of (b, w)
        Drift values and weights.  Repeated drift values are merged.
    normalized : bool
        If True, rescale the weights to sum to one.
    """

    atoms: tuple
    normalized: bool = field(default=False, compare=False, repr=False)
    b: np.ndarray = field(init=False, repr=False, compare=False)
    w: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        arr = np.asarray(self.atoms, dtype=float)
        if arr.ndim != 2 or arr.shape[1] != 2:
            raise PriorError("discrete atoms must be a list of (b, w) pairs")
        b, w = arr[:, 0], arr[:, 1]
        if not np.all(np.isfinite(b)):
            raise PriorError("atom locations must be finite")
        if self.normalized:
            if np.any(w <= 0.0) or not np.all(np.isfinite(w)):
                raise PriorError("prior weights must be finite and strictly positive")
            w = w / math.fsum(w.tolist())
        _check_weights(w)
        ub, inv = np.unique(b, return_inverse=True)
        uw = np.zeros_like(ub)
        np.add.at(uw, inv, w)
        object.__setattr__(self, "atoms", tuple((float(x), float(y)) for x, y in zip(ub, uw)))
        object.__setattr__(self, "b", ub)
        object.__setattr__(self, "w", uw)
        for arr_ in (ub, uw):
            arr_.setflags(write=False)
        _check_mass(math.fsum(uw[ub >= 0.0].tolist()))

    eps_bound = math.inf

    @property
    def symmetric_volatility(self) -> bool:
        if self.b.size == 2:
            return True
        if np.any(self.b == 0.0):
            return False
        return bool(np.allclose(self.b, -self.b[::-1], rtol=0, atol=1e-14)
                    and np.allclose(self.w, self.w[::-1], rtol=0, atol=1e-14))

    def sample(self, rng, size):
        return self.b[rng.choice(self.b.size, size=size, p=self.w)]


@dataclass(frozen=True)
class GaussianMixture(Prior):
    """Finite mixture of normal laws.

    Parameters
    ----------
    components : sequence of (weight, m, gamma)
        Mixture weights, means and standard deviations.
    normalized : bool
        If True, rescale the weights to sum to one.
    """

    components: tuple
    normalized: bool = field(default=False, compare=False, repr=False)
    w: np.ndarray = field(init=False, repr=False, compare=False)
    m: np.ndarray = field(init=False, repr=False, compare=False)
    gamma: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        arr = np.asarray(self.components, dtype=float)
        if arr.ndim != 2 or arr.shape[1] != 3:
            raise PriorError("mixture components must be a list of (weight, m, gamma) triples")
        w, m, g = arr[:, 0].copy(), arr[:, 1].copy(), arr[:, 2].copy()
        if not (np.all(np.isfinite(m)) and np.all(np.isfinite(g))) or np.any(g <= 0.0):
            raise PriorError("component means must be finite and standard deviations positive")
        if self.normalized:
            if np.any(w <= 0.0) or not np.all(np.isfinite(w)):
                raise PriorError("prior weights must be finite and strictly positive")
            w = w / math.fsum(w.tolist())
        _check_weights(w)
        object.__setattr__(self, "components", tuple((float(a), float(b), float(c)) for a, b, c in zip(w, m, g)))
        for name, arr_ in (("w", w), ("m", m), ("gamma", g)):
            arr_.setflags(write=False)
            object.__setattr__(self, name, arr_)

    @property
    def eps_bound(self) -> float:
        return 1.0 / (2.0 * float(np.max(self.gamma)) ** 2)

    @property
    def symmetric_volatility(self) -> bool:
        if self.w.size == 1:
            return True
        order = np.lexsort((self.gamma, self.w, self.m))
        mirror = np.lexsort((self.gamma, self.w, -self.m))
        return bool(
            np.allclose(self.m[order], -self.m[mirror], rtol=0, atol=1e-14)
            and np.allclose(self.w[order], self.w[mirror], rtol=0, atol=1e-14)
            and np.allclose(self.gamma[order], self.gamma[mirror], rtol=0, atol=1e-14)
        )

    def sample(self, rng, size):
        k = rng.choice(self.w.size, size=size, p=self.w)
        return self.m[k] + self.gamma[k] * rng.standard_normal(size)


class Gaussian(GaussianMixture):
    """Normal prior N(m, gamma^2)."""

    def __init__(self, m: float, gamma: float):
        super().__init__(((1.0, m, gamma),))

    @property
    def mean(self) -> float:
        return float(self.m[0])

    @property
    def sd(self) -> float:
        return float(self.gamma[0])

    def __repr__(self):
        return f"Gaussian(m={self.mean!r}, gamma={self.sd!r})"


# ---------------------------------------------------------------------------
# Tilted half-line moments
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class HalfMoments:
    """Tilted half-line integrals, each scaled by ``exp(-log_scale)``.

    ``*_neg`` integrate over b < 0 and ``*_pos`` over b >= 0.  The suffix
    gives the power of b in the integrand.  Fields broadcast like the
    ``(t, x)`` inputs.
    """

    log_scale: np.ndarray
    z_neg: np.ndarray
    z_pos: np.ndarray
    m1_neg: np.ndarray
    m1_pos: np.ndarray
    m2_neg: np.ndarray
    m2_pos: np.ndarray


def _validate_tx(t, x):
    t = np.asarray(t, dtype=float)
    x = np.asarray(x, dtype=float)
    if not (np.all(np.isfinite(t)) and np.all(np.isfinite(x))):
        raise DomainError("t and x must be finite")
    if np.any(t < 0.0):
        raise DomainError("t must be non-negative")
    return np.broadcast_arrays(t, x)


def _discrete_exponent(prior: Discrete, t, x):
    b = prior.b
    with np.errstate(divide="ignore"):
        logw = np.log(prior.w)
    return logw + x[..., None] * b - 0.5 * t[..., None] * b * b


def _masked_lse(e, mask, logfac):
    # logsumexp over atoms selected by mask, with an extra log-factor
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(mask, e + logfac, -np.inf)
        return logsumexp(terms, axis=-1)


def _component_params(prior: GaussianMixture, t, x):
    g2 = prior.gamma**2
    denom = 1.0 + t[..., None] * g2
    mp = (prior.m + g2 * x[..., None]) / denom
    s = prior.gamma / np.sqrt(denom)
    logc = np.log(prior.w) + np.log(s / prior.gamma) + 0.5 * (mp / s) ** 2 - 0.5 * (prior.m / prior.gamma) ** 2
    return logc, mp, s


def log_half_moments(prior: Prior, t, x, max_order: int = 2) -> dict:
    """Logs of the tilted integrals up to power ``max_order`` of b.

    Returns a dict with keys ``z_neg, z_pos`` plus ``m1_neg, m1_pos`` and
    ``m2_neg, m2_pos`` as requested.  ``m1_neg`` holds ``log|I_1^-|`` since
    that integral is negative.
    """
    t, x = _validate_tx(t, x)
    out = {}
    if isinstance(prior, Discrete):
        e = _discrete_exponent(prior, t, x)
        b = prior.b
        pos = b >= 0.0
        neg = ~pos
        strict = b > 0.0
        with np.errstate(divide="ignore"):
            lb = np.log(np.abs(b))
        out["z_neg"] = _masked_lse(e, neg, 0.0)
        out["z_pos"] = _masked_lse(e, pos, 0.0)
        for k in range(1, max_order + 1):
            out[f"m{k}_neg"] = _masked_lse(e, neg, k * lb)
            out[f"m{k}_pos"] = _masked_lse(e, strict, k * lb)
        return out
    if isinstance(prior, GaussianMixture):
        logc, mp, s = _component_params(prior, t, x)
        a = mp / s
        ls = np.log(s)
        out["z_neg"] = logsumexp(logc + _normal.log_cdf(-a), axis=-1)
        out["z_pos"] = logsumexp(logc + _normal.log_cdf(a), axis=-1)
        if max_order >= 1:
            out["m1_neg"] = logsumexp(logc + ls + _normal.log_psi1(-a), axis=-1)
            out["m1_pos"] = logsumexp(logc + ls + _normal.log_psi1(a), axis=-1)
        if max_order >= 2:
            out["m2_neg"] = logsumexp(logc + 2.0 * ls + _normal.log_psi2(-a), axis=-1)
            out["m2_pos"] = logsumexp(logc + 2.0 * ls + _normal.log_psi2(a), axis=-1)
        return out
    raise TypeError(f"unsupported prior type {type(prior).__name__}")


def half_moments(prior: Prior, t, x) -> HalfMoments:
    """Tilted half-line integrals of ``b^k exp(b x - b^2 t / 2)``, k = 0, 1, 2.

    Parameters
    ----------
    prior : Prior
    t : float or array
        Time, non-negative.
    x : float or array
        Observation level.

    Returns
    -------
    HalfMoments
        Values scaled by ``exp(-log_scale)`` where ``log_scale`` is the larger
        of the two zeroth-order logs, so ``max(z_neg, z_pos) == 1``.
    """
    lg = log_half_moments(prior, t, x)
    scale = np.maximum(lg["z_neg"], lg["z_pos"])

    def sc(key, sign=1.0):
        return sign * np.exp(lg[key] - scale)

    return HalfMoments(
        log_scale=scale,
        z_neg=sc("z_neg"),
        z_pos=sc("z_pos"),
        m1_neg=sc("m1_neg", -1.0),
        m1_pos=sc("m1_pos"),
        m2_neg=sc("m2_neg"),
        m2_pos=sc("m2_pos"),
    )


# ---------------------------------------------------------------------------
# Scalar summaries
# ---------------------------------------------------------------------------


def mass_nonneg(prior: Prior) -> float:
    """Prior probability that the drift is non-negative."""
    if isinstance(prior, Discrete):
        return math.fsum(prior.w[prior.b >= 0.0].tolist())
    if isinstance(prior, GaussianMixture):
        return math.fsum((prior.w * ndtr(prior.m / prior.gamma)).tolist())
    raise TypeError(f"unsupported prior type {type(prior).__name__}")


def support_gap(prior: Prior) -> tuple[float, float]:
    """Innermost support points ``(l, r)`` on either side of zero.

    ``r`` is the smallest support point >= 0 and ``l`` the largest support
    point < 0.  Any Gaussian component has full support, giving (0, 0).
    """
    if isinstance(prior, Discrete):
        b = prior.b
        nonneg = b[b >= 0.0]
        negative = b[b < 0.0]
        r = float(nonneg.min()) if nonneg.size else math.inf
        l = float(negative.max()) if negative.size else -math.inf
        return l, r
    if isinstance(prior, GaussianMixture):
        return 0.0, 0.0
    raise TypeError(f"unsupported prior type {type(prior).__name__}")


@dataclass(frozen=True)
class PosteriorLaw:
    """Conditional law of the drift given X_t = x.

    For discrete priors ``loc`` holds the atoms and ``scale`` is zero; for
    mixtures ``loc`` and ``scale`` are the component posterior means and
    standard deviations.  ``weight`` is normalized along the last axis.
    """

    weight: np.ndarray
    loc: np.ndarray
    scale: np.ndarray

    @property
    def is_discrete(self) -> bool:
        return not np.any(self.scale > 0.0)


def posterior_law(prior: Prior, t, x) -> PosteriorLaw:
    """Posterior mixture weights and parameters at ``(t, x)``."""
    t, x = _validate_tx(t, x)
    if isinstance(prior, Discrete):
        e = _discrete_exponent(prior, t, x)
        w = np.exp(e - logsumexp(e, axis=-1, keepdims=True))
        loc = np.broadcast_to(prior.b, w.shape)
        return PosteriorLaw(w, loc, np.zeros_like(w))
    if isinstance(prior, GaussianMixture):
        logc, mp, s = _component_params(prior, t, x)
        w = np.exp(logc - logsumexp(logc, axis=-1, keepdims=True))
        return PosteriorLaw(w, mp, np.broadcast_to(s, w.shape))
    raise TypeError(f"unsupported prior type {type(prior).__name__}")


# ---------------------------------------------------------------------------
# Wire format
# ---------------------------------------------------------------------------


def prior_from_dict(spec: dict) -> Prior:
    """Build a prior from its JSON form.

    Accepted shapes::

        {"kind": "discrete", "atoms": [[b, w], ...]}
        {"kind": "gaussian", "m": m, "gamma": gamma}
        {"kind": "mixture", "components": [[w, m, gamma], ...]}
    """
    if not isinstance(spec, dict) or "kind" not in spec:
        raise PriorError("prior must be an object with a 'kind' field")
    kind = spec["kind"]
    try:
        if kind == "discrete":
            return Discrete(tuple(tuple(a) for a in spec["atoms"]))
        if kind == "gaussian":
            return Gaussian(float(spec["m"]), float(spec["gamma"]))
        if kind == "mixture":
            return GaussianMixture(tuple(tuple(c) for c in spec["components"]))
    except KeyError as exc:
        raise PriorError(f"prior of kind {kind!r} is missing field {exc.args[0]!r}") from None
    except (TypeError, ValueError) as exc:
        if isinstance(exc, PriorError):
            raise
        raise PriorError(f"malformed {kind} prior: {exc}") from None
    raise PriorError(f"unknown prior kind {kind!r}; expected discrete, gaussian or mixture")


def prior_to_dict(prior: Prior) -> dict:
    if isinstance(prior, Discrete):
        return {"kind": "discrete", "atoms": [list(a) for a in prior.atoms]}
    if isinstance(prior, Gaussian):
        return {"kind": "gaussian", "m": prior.mean, "gamma": prior.sd}
    if isinstance(prior, GaussianMixture):
        return {"kind": "mixture", "components": [list(c) for c in prior.components]}
    raise TypeError(f"unsupported prior type {type(prior).__name__}")
