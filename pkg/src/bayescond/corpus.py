"""Reference models and joint densities shared by the demos, CLI and tests."""

import math

import numpy as np

from .bayes import BayesModel
from .conditional import JointDensity
from .distributions import (
    exponential_logpdf,
    gamma_density,
    gamma_logpdf,
    normal_density,
    normal_logpdf,
    poisson_logpmf,
    uniform_density,
)
from .measure import CountingSet, Density, LebesgueBox
from .reparam import ForwardModel

HALF_LINE = LebesgueBox.half_line()
REAL_LINE = LebesgueBox.real_line()


def waiting_times_model() -> BayesModel:
    """theta ~ Gamma(2, 2), Y | theta ~ Exp(theta)."""
    return BayesModel(
        prior=gamma_density(2.0, 2.0),
        data_space=HALF_LINE,
        log_likelihood=lambda y, t: exponential_logpdf(y, t),
        name="waiting-times",
    )


def fixed_rate_model(theta: int = 1) -> BayesModel:
    """Y ~ Exp(theta) with theta known: a prior putting all mass on one point."""
    prior = Density(CountingSet((theta,)), pdf=lambda t: np.ones_like(t), normalized=True,
                    name=f"point mass at {theta}")
    return BayesModel(prior=prior, data_space=HALF_LINE,
                      log_likelihood=lambda y, t: exponential_logpdf(y, t),
                      name=f"fixed rate {theta}")


def normal_normal_model(prior_sd: float = 10.0, noise_sd: float = 1.0, prior_mean: float = 0.0,
                        half_width: float = 60.0) -> BayesModel:
    """m ~ Normal(prior_mean, prior_sd^2), y | m ~ Normal(m, noise_sd^2)."""
    space = LebesgueBox.interval(prior_mean - half_width, prior_mean + half_width)
    return BayesModel(
        prior=normal_density(prior_mean, prior_sd, space=space),
        data_space=REAL_LINE,
        log_likelihood=lambda y, m: normal_logpdf(y, m, noise_sd),
        name=f"normal-normal(sd={prior_sd}, noise={noise_sd})",
    )


def uniform_rate_model(lo: float = 0.1, hi: float = 5.0) -> BayesModel:
    return BayesModel(prior=uniform_density(lo, hi), data_space=HALF_LINE,
                      log_likelihood=lambda y, t: exponential_logpdf(y, t),
                      name=f"uniform({lo}, {hi}) rate")


def waiting_times_joint() -> JointDensity:
    return JointDensity.from_function(
        HALF_LINE, HALF_LINE,
        logpdf=lambda t, y: gamma_logpdf(t, 2.0, 2.0) + exponential_logpdf(y, t),
        name="waiting-times joint")


def _quadrant(f):
    def pdf(x, y):
        x, y = np.asarray(x, dtype=float), np.asarray(y, dtype=float)
        inside = (x >= 0) & (y >= 0)
        with np.errstate(over="ignore", invalid="ignore"):
            return np.where(inside, f(x, y), 0.0)
    return pdf


def independent_exp_joint() -> JointDensity:
    return JointDensity.from_function(HALF_LINE, HALF_LINE, pdf=_quadrant(lambda x, y: np.exp(-x - y)),
                                      name="Exp(1) x Exp(1)")


def correlated_exp_joint() -> JointDensity:
    """(x + y) e^{-x-y} / 2 on the positive quadrant."""
    return JointDensity.from_function(HALF_LINE, HALF_LINE,
                                      pdf=_quadrant(lambda x, y: (x + y) * np.exp(-x - y) / 2.0),
                                      name="correlated exponential")


def narrow_gaussian_joint(width: float, center: float = 1.0) -> JointDensity:
    """Product of two Normal(center, width^2) densities restricted to the quadrant (unnormalized there)."""
    return JointDensity.from_function(
        HALF_LINE, HALF_LINE,
        pdf=_quadrant(lambda x, y: np.exp(normal_logpdf(x, center, width) + normal_logpdf(y, center, width))),
        name=f"narrow Gaussian {width}")


def gamma_poisson_joint(shape: float = 2.0, rate: float = 1.0, kmax: int = 60) -> JointDensity:
    """Continuous rate theta ~ Gamma(shape, rate) with a Poisson(theta) count."""
    return JointDensity.from_function(
        HALF_LINE, CountingSet.range(0, kmax),
        logpdf=lambda t, k: gamma_logpdf(t, shape, rate) + poisson_logpmf(k, t),
        name="gamma-poisson joint")


def additive_normal_forward_model() -> ForwardModel:
    """y = m + eps with eps ~ Normal(0, 1)."""
    return ForwardModel(g=lambda m: m, noise_logpdf=lambda r: normal_logpdf(r, 0.0, 1.0),
                        name="y = m + eps, eps ~ Normal(0, 1)")


def shrinkage_prior(positive: bool = False) -> Density:
    """Normal(0, 10^2) on [-60, 60], or its half on [0, 60] when the data must stay positive."""
    if positive:
        return Density(LebesgueBox.interval(0.0, 60.0),
                       logpdf=lambda m: normal_logpdf(m, 0.0, 10.0) + math.log(2.0),
                       normalized=True, name="half Normal(0, 10^2)")
    return Density(LebesgueBox.interval(-60.0, 60.0), logpdf=lambda m: normal_logpdf(m, 0.0, 10.0),
                   normalized=True, name="Normal(0, 10^2)")
