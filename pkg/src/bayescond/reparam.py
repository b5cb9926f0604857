"""Changes of variables on the data and parameter spaces.

A data transform ``x = phi(y)`` changes the likelihood by the factor
``1 / |J(y)|`` evaluated at the observed data.  That factor does not involve
the parameters, so the normalized posterior is unchanged.  The
``wrong_jacobian_*`` functions build the erroneous variant in which the
Jacobian is evaluated at the forward-model prediction ``g(m)`` instead; it is
kept here only to show the resulting shift of the MAP, and every report that
uses it is labelled as erroneous by construction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .bayes import BayesModel, PosteriorResult, posterior
from .errors import DomainError, SingularTransform
from .measure import BaseMeasure, Density, GridSpec, LebesgueBox, grid_points

ERRONEOUS = "erroneous-by-construction"


@dataclass(frozen=True, eq=False)
class Transform:
    """Monotone bijection of an open interval with its absolute Jacobian.

    ``domain`` is the open interval on which ``forward`` is defined.
    """

    name: str
    forward: Callable
    inverse: Callable
    jacobian_det: Callable
    domain: tuple = (-math.inf, math.inf)

    def in_domain(self, y) -> np.ndarray:
        y = np.asarray(y, dtype=float)
        lo, hi = self.domain
        return (y > lo) & (y < hi)

    def image_bounds(self, lo: float, hi: float) -> tuple[float, float]:
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            a, b = float(self.forward(np.float64(lo))), float(self.forward(np.float64(hi)))
        return (a, b) if a <= b else (b, a)

    def map_space(self, space: BaseMeasure) -> LebesgueBox:
        if not (isinstance(space, LebesgueBox) and space.ndim == 1):
            raise TypeError("transforms act on one-dimensional interval spaces")
        (lo, hi), = space.bounds
        lo, hi = max(lo, self.domain[0]), min(hi, self.domain[1])
        return LebesgueBox.interval(*self.image_bounds(lo, hi))

    def preimage_space(self, space: BaseMeasure) -> LebesgueBox:
        """Interval mapped onto ``space`` by ``forward``."""
        (lo, hi), = space.bounds
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            a, b = float(self.inverse(np.float64(lo))), float(self.inverse(np.float64(hi)))
        a, b = (a, b) if a <= b else (b, a)
        return LebesgueBox.interval(max(a, self.domain[0]), min(b, self.domain[1]))


def identity() -> Transform:
    return Transform("identity", lambda y: np.asarray(y, dtype=float) * 1.0,
                     lambda x: np.asarray(x, dtype=float) * 1.0,
                     lambda y: np.ones_like(np.asarray(y, dtype=float)))


def cube() -> Transform:
    return Transform("cube", lambda y: np.asarray(y, dtype=float) ** 3, np.cbrt,
                     lambda y: 3.0 * np.asarray(y, dtype=float) ** 2)


def log() -> Transform:
    return Transform("log", np.log, np.exp, lambda y: 1.0 / np.asarray(y, dtype=float),
                     domain=(0.0, math.inf))


def reciprocal() -> Transform:
    return Transform("reciprocal", lambda y: 1.0 / np.asarray(y, dtype=float),
                     lambda x: 1.0 / np.asarray(x, dtype=float),
                     lambda y: 1.0 / np.asarray(y, dtype=float) ** 2,
                     domain=(0.0, math.inf))


def affine(a: float = 2.0, b: float = 1.0) -> Transform:
    if a == 0:
        raise SingularTransform("affine transform with zero slope")
    return Transform(f"affine({a}y+{b})", lambda y: a * np.asarray(y, dtype=float) + b,
                     lambda x: (np.asarray(x, dtype=float) - b) / a,
                     lambda y: np.full_like(np.asarray(y, dtype=float), abs(a)))


TRANSFORMS = {"identity": identity, "cube": cube, "log": log,
              "reciprocal": reciprocal, "affine": affine}


def get_transform(name: str, **kw) -> Transform:
    try:
        return TRANSFORMS[name](**kw)
    except KeyError:
        raise KeyError(f"unknown transform {name!r}; available: {sorted(TRANSFORMS)}") from None


def finite_difference_jacobian(t: Transform, y, step: float = 1e-6):
    y = np.asarray(y, dtype=float)
    return np.abs(t.forward(y + step) - t.forward(y - step)) / (2 * step)


@dataclass(frozen=True, eq=False)
class Likelihood:
    """Likelihood as a function of ``(x, *theta)`` with its logarithm."""

    logpdf: Callable
    label: str = ""
    normalized: bool = True

    def __call__(self, *args):
        return np.exp(self.logpdf(*args))


def _nonsingular_log_jacobian(t: Transform, y):
    jac = np.asarray(t.jacobian_det(y), dtype=float)
    if np.any(jac == 0):
        raise SingularTransform(f"{t.name} has zero Jacobian at {np.asarray(y)[jac == 0].ravel()[:3]}")
    return np.log(jac)


def pushforward_likelihood(log_f: Callable, t: Transform) -> Likelihood:
    """Likelihood of ``x = phi(y)``: ``f(phi^{-1}(x) | theta) / |J(phi^{-1}(x))|``.

    ``log_f`` is the log-likelihood on the original data space, called as
    ``log_f(y, *theta)``.
    """

    def logpdf(x, *theta):
        y = t.inverse(x)
        return log_f(y, *theta) - _nonsingular_log_jacobian(t, y)

    return Likelihood(logpdf, label=f"pushforward through {t.name}")


def pushforward_model(m: BayesModel, t: Transform) -> BayesModel:
    lik = pushforward_likelihood(m.loglik, t)
    return BayesModel(prior=m.prior, data_space=t.map_space(m.data_space),
                      log_likelihood=lik.logpdf, name=f"{m.name} [{t.name}]")


def _sup_on_grid(a: Density, b: Density, space: BaseMeasure, g: GridSpec) -> float:
    pts = grid_points(space, g)
    cols = [pts[:, i] for i in range(pts.shape[1])]
    return float(np.max(np.abs(a.eval(*cols) - b.eval(*cols))))


@dataclass
class InvarianceReport:
    transform: str
    posterior_supdiff: float
    map_original: list
    map_transformed: list
    map_index_equal: bool
    log_marginal_shift: float
    expected_log_marginal_shift: float
    jacobian_at_obs: float

    def to_dict(self) -> dict:
        return {
            "transform": self.transform,
            "posterior_supdiff": self.posterior_supdiff,
            "map_correct": self.map_original,
            "map_transformed": self.map_transformed,
            "map_wrong": None,
            "map_index_equal": self.map_index_equal,
            "log_marginal_shift": self.log_marginal_shift,
            "expected_log_marginal_shift": self.expected_log_marginal_shift,
            "jacobian_at_obs": self.jacobian_at_obs,
        }


def posterior_invariance_report(m: BayesModel, t: Transform, y_obs: float,
                                g: GridSpec | None = None) -> InvarianceReport:
    """Compare the posterior from ``y_obs`` with the one from ``phi(y_obs)``."""
    g = g or GridSpec()
    if not t.in_domain(y_obs):
        raise DomainError(f"y_obs={y_obs} is outside the domain of {t.name}")
    x_obs = float(t.forward(y_obs))
    py = posterior(m, y_obs, g, refine=False)
    px = posterior(pushforward_model(m, t), x_obs, g, refine=False)
    jac = float(t.jacobian_det(y_obs))
    return InvarianceReport(
        transform=t.name,
        posterior_supdiff=_sup_on_grid(py.posterior, px.posterior, m.param_space, g),
        map_original=list(py.map_point),
        map_transformed=list(px.map_point),
        map_index_equal=py.map_index == px.map_index,
        log_marginal_shift=px.log_marginal_likelihood - py.log_marginal_likelihood,
        expected_log_marginal_shift=-math.log(jac),
        jacobian_at_obs=jac,
    )


@dataclass(frozen=True, eq=False)
class ForwardModel:
    """Data ``y = g(m) + eps`` with ``eps`` symmetric about zero.

    ``noise_logpdf(residual, *theta_eps)`` is the log-density of the noise.
    """

    g: Callable
    noise_logpdf: Callable
    name: str = ""

    def noise_density(self, residual, *theta_eps):
        return np.exp(self.noise_logpdf(residual, *theta_eps))

    def h(self, y, center, *theta_eps):
        """Density of the data at ``y`` when the noise is centred on ``center``."""
        return self.noise_density(np.asarray(y, dtype=float) - center, *theta_eps)

    def log_likelihood(self, y, m, *theta_eps):
        return self.noise_logpdf(np.asarray(y, dtype=float) - self.g(m), *theta_eps)


def wrong_jacobian_likelihood(fm: ForwardModel, t: Transform) -> Likelihood:
    """The erroneous likelihood ``h(g(m); phi^{-1}(x)) / |J(g(m))|``.

    Its slices do not integrate to one over the transformed data space.
    """

    def logpdf(x, m, *theta_eps):
        gm = np.asarray(fm.g(m), dtype=float)
        if not np.all(t.in_domain(gm)):
            raise DomainError(f"forward-model prediction leaves the domain of {t.name}")
        y = t.inverse(x)
        return fm.noise_logpdf(gm - y, *theta_eps) - _nonsingular_log_jacobian(t, gm)

    return Likelihood(logpdf, label=ERRONEOUS, normalized=False)


def _axis_step(space: BaseMeasure, g: GridSpec) -> float:
    ax = space.axes(g)[0]
    return float(ax.weights.max())


@dataclass
class AcausalityReport:
    transform: str
    map_correct: list
    map_wrong: list
    map_shift: float
    map_shift_steps: float
    grid_step: float
    posterior_supdiff: float
    log_marginal_shift: float
    jacobian_at_obs: float
    correct: PosteriorResult = field(repr=False)
    wrong: PosteriorResult = field(repr=False)

    def to_dict(self) -> dict:
        return {
            "transform": self.transform,
            "posterior_supdiff": self.posterior_supdiff,
            "map_correct": self.map_correct,
            "map_wrong": self.map_wrong,
            "map_wrong_label": ERRONEOUS,
            "map_shift": self.map_shift,
            "map_shift_steps": self.map_shift_steps,
            "grid_step": self.grid_step,
            "log_marginal_shift": self.log_marginal_shift,
            "jacobian_at_obs": self.jacobian_at_obs,
        }


def acausality_demo(fm: ForwardModel, prior: Density, t: Transform, y_obs: float,
                    g: GridSpec | None = None) -> AcausalityReport:
    """Posterior MAP under the correct pushforward and under the wrong Jacobian."""
    g = g or GridSpec()
    data_space = LebesgueBox.interval(*t.domain)
    x_obs = float(t.forward(y_obs))
    base = BayesModel(prior=prior, data_space=data_space, log_likelihood=fm.log_likelihood,
                      name=fm.name)
    correct = posterior(pushforward_model(base, t), x_obs, g, refine=False)
    wrong_model = BayesModel(prior=prior, data_space=t.map_space(data_space),
                             log_likelihood=wrong_jacobian_likelihood(fm, t).logpdf,
                             name=f"{fm.name} [{ERRONEOUS}]")
    wrong = posterior(wrong_model, x_obs, g, refine=False)
    direct = posterior(base, y_obs, g, refine=False)
    step = _axis_step(prior.space, g)
    shift = abs(wrong.map_point[0] - correct.map_point[0])
    return AcausalityReport(
        transform=t.name,
        map_correct=list(correct.map_point),
        map_wrong=list(wrong.map_point),
        map_shift=shift,
        map_shift_steps=shift / step,
        grid_step=step,
        posterior_supdiff=float(np.max(np.abs(np.exp(correct.log_density) - np.exp(wrong.log_density)))),
        log_marginal_shift=correct.log_marginal_likelihood - direct.log_marginal_likelihood,
        jacobian_at_obs=float(t.jacobian_det(y_obs)),
        correct=correct,
        wrong=wrong,
    )


@dataclass
class ParamReparamReport:
    transform: str
    posterior_supdiff: float
    prior_supdiff: float
    priors_equivalent: bool

    def to_dict(self) -> dict:
        return {"transform": self.transform, "posterior_supdiff": self.posterior_supdiff,
                "prior_supdiff": self.prior_supdiff, "priors_equivalent": self.priors_equivalent}


def param_reparam_check(prior: Density, psi: Transform, m: BayesModel, y_obs,
                        g: GridSpec | None = None, *, eta_grid: GridSpec | None = None,
                        eta_prior: Density | None = None, tol: float = 1e-4) -> ParamReparamReport:
    """Posterior computed in ``eta`` (with ``theta = psi(eta)``) and mapped back to ``theta``.

    Without ``eta_prior`` the prior ``pi(psi(eta)) |K(eta)|`` induced by
    ``prior`` is used and the two posteriors should agree.  With an explicit
    ``eta_prior`` the report also says whether it matches the induced one.
    """
    g = g or GridSpec()
    eta_grid = eta_grid or g
    eta_space = psi.preimage_space(prior.space)

    def induced_log(eta):
        return prior.log_eval(psi.forward(eta)) + _nonsingular_log_jacobian(psi, eta)

    induced = Density(eta_space, logpdf=induced_log, normalized=True, name="induced prior")
    prior_diff = 0.0
    if eta_prior is not None:
        prior_diff = _sup_on_grid(eta_prior, induced, eta_space, eta_grid)
    used = eta_prior or induced

    eta_model = BayesModel(prior=used, data_space=m.data_space,
                           log_likelihood=lambda y, eta: m.loglik(y, psi.forward(eta)),
                           name=f"{m.name} in eta")
    post_eta = posterior(eta_model, y_obs, eta_grid, refine=False).posterior
    pulled = Density(prior.space,
                     logpdf=lambda th: post_eta.log_eval(psi.inverse(th))
                     - _nonsingular_log_jacobian(psi, psi.inverse(th)))
    direct = posterior(m, y_obs, g, refine=False).posterior
    diff = _sup_on_grid(direct, pulled, prior.space, g)
    return ParamReparamReport(psi.name, diff, prior_diff, prior_diff <= tol)
