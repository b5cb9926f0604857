"""Log-densities of the parametric families used by the models and demos.

All functions broadcast over their arguments and return ``-inf`` outside the
support.  Scale-type arguments are assumed valid; callers check them.
"""

import math

import numpy as np
from scipy.special import gammaln, xlogy

from .measure import CountingSet, Density, LebesgueBox

LOG_SQRT_2PI = 0.5 * math.log(2.0 * math.pi)


def normal_logpdf(x, mean, sd):
    z = (np.asarray(x, dtype=float) - mean) / sd
    return -0.5 * z * z - np.log(sd) - LOG_SQRT_2PI


def gamma_logpdf(x, shape, rate):
    """Gamma density with the rate parametrization, ``rate**shape x**(shape-1) e^{-rate x} / Gamma(shape)``."""
    x = np.asarray(x, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = xlogy(shape, rate) + xlogy(shape - 1.0, x) - rate * x - gammaln(shape)
    return np.where(x >= 0, out, -np.inf)


def exponential_logpdf(x, rate):
    x = np.asarray(x, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.log(rate) - rate * x
    return np.where(x >= 0, out, -np.inf)


def uniform_logpdf(x, lo, hi):
    x = np.asarray(x, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = -np.log(np.asarray(hi, dtype=float) - lo) + 0.0 * x
    return np.where((x >= lo) & (x <= hi), out, -np.inf)


def poisson_logpmf(k, rate):
    k = np.asarray(k, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = xlogy(k, rate) - rate - gammaln(k + 1.0)
    valid = (k >= 0) & (k == np.floor(k))
    return np.where(valid, out, -np.inf)


def normal_density(mean=0.0, sd=1.0, space=None):
    return Density(space or LebesgueBox.real_line(),
                   logpdf=lambda x: normal_logpdf(x, mean, sd),
                   normalized=True, name=f"Normal({mean}, {sd}^2)")


def gamma_density(shape, rate, space=None):
    return Density(space or LebesgueBox.half_line(),
                   logpdf=lambda x: gamma_logpdf(x, shape, rate),
                   normalized=True, name=f"Gamma({shape}, {rate})")


def exponential_density(rate=1.0, space=None):
    return Density(space or LebesgueBox.half_line(),
                   logpdf=lambda x: exponential_logpdf(x, rate),
                   normalized=True, name=f"Exp({rate})")


def uniform_density(lo, hi):
    return Density(LebesgueBox.interval(lo, hi),
                   logpdf=lambda x: uniform_logpdf(x, lo, hi),
                   normalized=True, name=f"Uniform({lo}, {hi})")


def poisson_mass(rate, kmax):
    return Density(CountingSet.range(0, kmax),
                   logpdf=lambda k: poisson_logpmf(k, rate),
                   normalized=True, name=f"Poisson({rate})")
