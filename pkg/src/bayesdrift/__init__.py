"""Bayesian sequential testing of the sign of a Brownian drift."""

from .errors import ConfigError, ConvergenceError, DomainError, PriorError, SolverError
from .prior import (
    Discrete,
    Gaussian,
    GaussianMixture,
    HalfMoments,
    Prior,
    half_moments,
    mass_nonneg,
    prior_from_dict,
    prior_to_dict,
    support_gap,
)
from .posterior import (
    PI_MIN,
    conditional_mean,
    pi_posterior,
    posterior_point,
    sigma_vol,
    tail_prob,
    x_of_pi,
)

__version__ = "0.1.0"
