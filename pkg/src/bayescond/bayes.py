"""Grid posteriors, marginal likelihoods, MAP estimates and Bayes factors."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .conditional import JointDensity
from .distributions import gamma_logpdf
from .errors import (
    BoundaryMaximum,
    DataImpossibleUnderModel,
    DivergentMass,
    DomainError,
    ImproperPosterior,
)
from .measure import (
    BaseMeasure,
    Density,
    GridSpec,
    LebesgueBox,
    evaluate_on_grid,
    log_integrate,
    log_sum_grid,
    product_measure,
)
from .optimize import golden_section_max


@dataclass(frozen=True, eq=False)
class BayesModel:
    """Prior over the parameters and a likelihood over the data.

    The likelihood is called as ``likelihood(*y, *theta)``.  Either the
    likelihood or its logarithm may be supplied; posterior work uses the log.
    """

    prior: Density
    data_space: BaseMeasure
    likelihood: Callable | None = None
    log_likelihood: Callable | None = None
    name: str = ""

    def __post_init__(self):
        if self.likelihood is None and self.log_likelihood is None:
            raise TypeError("BayesModel needs likelihood or log_likelihood")

    @property
    def param_space(self) -> BaseMeasure:
        return self.prior.space

    def lik(self, *args):
        if self.likelihood is None:
            return np.exp(self.log_likelihood(*args))
        return np.asarray(self.likelihood(*args), dtype=float)

    def loglik(self, *args):
        if self.log_likelihood is None:
            with np.errstate(divide="ignore"):
                return np.log(np.asarray(self.likelihood(*args), dtype=float))
        return np.asarray(self.log_likelihood(*args), dtype=float)


@dataclass(frozen=True, eq=False)
class PosteriorResult:
    posterior: Density
    log_marginal_likelihood: float
    map_point: tuple
    map_index: tuple
    grid: GridSpec
    points: np.ndarray  # (npoints, ndim) grid nodes in C order
    log_density: np.ndarray  # normalized log posterior at ``points``
    map_refined: tuple

    def to_dict(self) -> dict:
        logd = [None if not math.isfinite(v) else v for v in self.log_density.tolist()]
        return {
            "grid": self.points.tolist(),
            "log_density": logd,
            "log_marginal_likelihood": self.log_marginal_likelihood,
            "map": list(self.map_point),
        }


def joint_density(m: BayesModel) -> JointDensity:
    """Joint density ``prior(theta) * f(y | theta)`` with parameters first."""
    p = m.param_space.ndim

    def logpdf(*c):
        th, y = c[:p], c[p:]
        return m.prior.log_eval(*th) + m.loglik(*y, *th)

    d = Density(product_measure(m.param_space, m.data_space), logpdf=logpdf,
                normalized=True, name=f"joint of {m.name or 'model'}")
    return JointDensity(m.param_space, m.data_space, d)


def _data_tuple(y_obs) -> tuple:
    return tuple(float(v) for v in np.atleast_1d(np.asarray(y_obs, dtype=float)))


def _refine_map(logf, axes, idx):
    point = [float(c[i]) for ax, i in zip(axes, idx) for c in ax.coords]
    pos = 0
    for ax, i in zip(axes, idx):
        k = len(ax.coords)
        if k == 1 and not ax.atomic[i] and ax.size > 1:
            nodes = ax.coords[0]
            lo = nodes[max(i - 1, 0)]
            hi = nodes[min(i + 1, ax.size - 1)]

            def along(t, pos=pos):
                q = list(point)
                q[pos] = t
                return float(logf(*q))

            best, _ = golden_section_max(along, lo, hi, tol=1e-10 * max(1.0, abs(hi - lo)))
            if along(best) >= along(point[pos]):
                point[pos] = best
        pos += k
    return tuple(point)


def posterior(m: BayesModel, y_obs, g: GridSpec | None = None, *, workers=None,
              refine: bool = True) -> PosteriorResult:
    """Grid posterior of ``m`` at the observed data ``y_obs``.

    The MAP is the first grid node (C order) attaining the maximum of the
    unnormalized log posterior; ``map_refined`` adds one golden-section pass
    per continuous axis within a grid step of it.
    """
    g = g or GridSpec()
    y = _data_tuple(y_obs)

    def logf(*th):
        return m.prior.log_eval(*th) + m.loglik(*y, *th)

    axes = m.param_space.axes(g)
    try:
        values = evaluate_on_grid(logf, axes, log=True, workers=workers)
        logz = log_sum_grid(values, axes)
    except DivergentMass as exc:
        raise ImproperPosterior(str(exc)) from exc
    if logz == -math.inf:
        raise DataImpossibleUnderModel(f"observed data {y} has zero density under every grid parameter")

    flat = int(np.argmax(values))
    idx = tuple(int(i) for i in np.unravel_index(flat, values.shape))
    map_point = tuple(float(c[i]) for ax, i in zip(axes, idx) for c in ax.coords)
    refined = _refine_map(logf, axes, idx) if refine else map_point

    mesh = np.meshgrid(*[np.arange(ax.size) for ax in axes], indexing="ij")
    cols = [c[ix.ravel()] for ax, ix in zip(axes, mesh) for c in ax.coords]
    points = np.stack(cols, axis=1)

    post = Density(m.param_space, logpdf=lambda *th: logf(*th) - logz,
                   normalized=True, log_normalizer=logz, name="posterior")
    return PosteriorResult(post, logz, map_point, idx, g, points,
                           (values - logz).ravel(), refined)


def posterior_conjugate_gamma_exp(shape: float, rate: float, y_obs: float) -> tuple[float, float]:
    """Gamma(shape, rate) prior with one Exp(theta) observation gives Gamma(shape + 1, rate + y)."""
    for label, v in (("shape", shape), ("rate", rate), ("y_obs", y_obs)):
        if not v > 0:
            raise DomainError(f"{label} must be positive, got {v!r}")
    return shape + 1.0, rate + y_obs


def bayes_factor(m1: BayesModel, m2: BayesModel, y_obs, g: GridSpec | None = None) -> float:
    """Ratio of the marginal likelihoods of ``m1`` and ``m2`` at ``y_obs``."""
    if m1 is m2:
        return 1.0
    l1 = posterior(m1, y_obs, g, refine=False).log_marginal_likelihood
    l2 = posterior(m2, y_obs, g, refine=False).log_marginal_likelihood
    return math.exp(l1 - l2)


@dataclass(frozen=True)
class EmpiricalBayesResult:
    rate: float
    log_marginal: float
    boundary_maximum: bool


def gamma_exp_log_marginal(shape: float, rate: float, y_obs: float, g: GridSpec | None = None) -> float:
    """Log marginal likelihood of one Exp(theta) observation under a Gamma(shape, rate) prior, by quadrature."""
    g = g or GridSpec(nodes=20000)
    space = LebesgueBox.half_line()
    return log_integrate(lambda t: gamma_logpdf(t, shape, rate) + np.log(t) - t * y_obs, space, g)


def empirical_bayes_rate(shape: float, y_obs: float, search=(0.05, 20.0, 400),
                         g: GridSpec | None = None, tol: float = 1e-6) -> EmpiricalBayesResult:
    """Rate hyperparameter maximizing the marginal likelihood of ``y_obs``.

    A grid scan over ``search = (lo, hi, steps)`` is followed by one
    golden-section pass on the bracket around the best grid value.
    """
    lo, hi, steps = search
    if not (lo > 0 and hi >= lo and shape > 0 and y_obs > 0):
        raise DomainError("need shape > 0, y_obs > 0 and 0 < lo <= hi")
    g = g or GridSpec(nodes=20000)

    def logml(b):
        return gamma_exp_log_marginal(shape, b, y_obs, g)

    if hi - lo < tol:
        warnings.warn(f"degenerate search interval [{lo}, {hi}]", BoundaryMaximum, stacklevel=2)
        return EmpiricalBayesResult(float(lo), logml(lo), True)
    rates = np.linspace(lo, hi, max(int(steps), 3))
    vals = np.array([logml(b) for b in rates])
    i = int(np.argmax(vals))
    if i == 0 or i == len(rates) - 1:
        warnings.warn(f"marginal likelihood is largest at the search boundary {rates[i]}",
                      BoundaryMaximum, stacklevel=2)
        return EmpiricalBayesResult(float(rates[i]), float(vals[i]), True)
    b, v = golden_section_max(logml, rates[i - 1], rates[i + 1], tol=tol)
    return EmpiricalBayesResult(b, v, False)
