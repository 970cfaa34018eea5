"""Improper priors realized as Poisson point processes."""

from . import errors, measure, quadrature, rng, verify  # noqa: F401
from . import bernoulli, cauchy, conditional, gaussian, paradox  # noqa: F401
