"""Marginal and conditional densities built from joint densities.

A conditional density here is a function of ``(x, y)`` that, for each fixed
``y``, is a normalized density in ``x``.  It is obtained as the ratio of the
joint density to the marginal of ``y`` wherever that marginal is positive and
finite, and falls back to the marginal of ``x`` elsewhere.  Different
versions of a conditional may be produced with :func:`tweak_version`; they
are compared with :func:`ae_equal`, which ignores differences on sets of
``y`` that the marginal of ``y`` does not charge.
"""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass, replace
from typing import Callable

import numpy as np

from .errors import NotADensity, ZeroProbabilityEvent
from .measure import (
    Axis,
    BaseMeasure,
    CountingSet,
    Density,
    GridSpec,
    LebesgueBox,
    evaluate_on_grid,
    integrate,
    log_integrate,
    product_measure,
    reduce_grid,
)

# cap on grid values held in memory at once when computing marginals
_BLOCK = 1 << 22


@dataclass(frozen=True, eq=False)
class JointDensity:
    """Density of ``(X, Y)`` against ``product_measure(space_x, space_y)``.

    ``density`` is evaluated as ``density.eval(*x, *y)``.
    """

    space_x: BaseMeasure
    space_y: BaseMeasure
    density: Density

    @classmethod
    def from_function(cls, space_x, space_y, pdf=None, logpdf=None, name=None):
        d = Density(product_measure(space_x, space_y), pdf=pdf, logpdf=logpdf,
                    normalized=True, name=name)
        return cls(space_x, space_y, d)

    @property
    def space(self):
        return self.density.space

    def __call__(self, *coords):
        return self.density.eval(*coords)


class _BlockMarginal:
    """Integrates a joint density over one block, caching results per query point.

    Insertion into the cache is serialized by a lock; lookups are plain dict reads.
    """

    def __init__(self, joint: JointDensity, g: GridSpec, keep: str, workers=None):
        self.joint = joint
        self.g = g
        self.keep = keep
        self.workers = workers
        if keep == "y":
            self.k, self.other = joint.space_y.ndim, joint.space_x
        else:
            self.k, self.other = joint.space_x.ndim, joint.space_y
        self._axes = self.other.axes(g)
        self._cache: dict = {}
        self._lock = threading.Lock()

    def _integrand(self, *c):
        q, rest = c[: self.k], c[self.k:]
        return self.joint(*rest, *q) if self.keep == "y" else self.joint(*q, *rest)

    def _compute(self, pts: np.ndarray) -> np.ndarray:
        n_other = math.prod(ax.size for ax in self._axes)
        step = max(1, _BLOCK // max(n_other, 1))
        out = []
        for start in range(0, len(pts), step):
            block = pts[start:start + step]
            qaxis = Axis(tuple(block[:, i] for i in range(self.k)),
                         np.ones(len(block)), np.zeros(len(block), dtype=bool))
            axes = [qaxis] + self._axes
            vals = evaluate_on_grid(self._integrand, axes, workers=self.workers)
            order = range(len(axes) - 1, 0, -1)
            out.append(np.atleast_1d(reduce_grid(vals, [ax.weights for ax in axes], order)))
        return np.concatenate(out)

    def __call__(self, *q):
        arrays = np.broadcast_arrays(*[np.asarray(c, dtype=float) for c in q])
        shape = arrays[0].shape
        pts = np.stack([a.ravel() for a in arrays], axis=1)
        uniq, inv = np.unique(pts, axis=0, return_inverse=True)
        keys = [tuple(r) for r in uniq.tolist()]
        missing = [i for i, key in enumerate(keys) if key not in self._cache]
        if missing:
            vals = self._compute(uniq[missing])
            with self._lock:
                for i, v in zip(missing, vals.tolist()):
                    self._cache[keys[i]] = v
        table = np.array([self._cache[key] for key in keys], dtype=float)
        return table[np.reshape(inv, -1)].reshape(shape)


def marginalize_y(j: JointDensity, g: GridSpec | None = None, *, workers=None) -> Density:
    """Marginal density of ``Y``: the joint integrated over ``x``."""
    return Density(j.space_y, pdf=_BlockMarginal(j, g or GridSpec(), "y", workers),
                   normalized=j.density.normalized, name="marginal of Y")


def marginalize_x(j: JointDensity, g: GridSpec | None = None, *, workers=None) -> Density:
    """Marginal density of ``X``: the joint integrated over ``y``."""
    return Density(j.space_x, pdf=_BlockMarginal(j, g or GridSpec(), "x", workers),
                   normalized=j.density.normalized, name="marginal of X")


@dataclass(frozen=True, eq=False)
class ConditionalDensity:
    """A family of densities over ``space_x`` indexed by ``y``.

    ``family(*x, *y)`` is the untweaked version; ``tweaks`` is a tuple of
    ``(y_point, Density)`` pairs overriding the family at those exact points.
    """

    space_x: BaseMeasure
    space_y: BaseMeasure
    family: Callable
    fallback: Density
    tweaks: tuple = ()
    marginal_y: Density | None = None

    @property
    def nx(self) -> int:
        return self.space_x.ndim

    def base(self, *coords):
        return np.asarray(self.family(*coords), dtype=float)

    def __call__(self, *coords):
        out = self.base(*coords)
        if not self.tweaks:
            return out
        x, y = coords[: self.nx], coords[self.nx:]
        for y0, dens in self.tweaks:
            mask = np.logical_and.reduce([np.asarray(yi) == v for yi, v in zip(y, y0)])
            if np.any(mask):
                out = np.where(mask, dens.eval(*x), out)
        return out

    def slice(self, *y0) -> Density:
        """The density over ``x`` at the conditioning value ``y0``."""
        key = tuple(float(v) for v in y0)
        for point, dens in self.tweaks:
            if point == key:
                return dens
        return Density(self.space_x, pdf=lambda *x: self.base(*x, *key),
                       normalized=True, name=f"slice at y={key}")


def condition_on_y(j: JointDensity, g: GridSpec | None = None, *, workers=None) -> ConditionalDensity:
    """Conditional density of ``X`` given ``Y``.

    Equal to ``p(x, y) / p_Y(y)`` where ``0 < p_Y(y) < inf`` and to the
    marginal of ``X`` for every other ``y``.
    """
    g = g or GridSpec()
    nx = j.space_x.ndim
    marg_y = marginalize_y(j, g, workers=workers)
    fallback = marginalize_x(j, g, workers=workers)

    def family(*c):
        x, y = c[:nx], c[nx:]
        num = j(*c)
        den = marg_y.eval(*y)
        ok = (den > 0) & np.isfinite(den)
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = num / np.where(ok, den, 1.0)
        if np.all(ok):
            return ratio
        return np.where(ok, ratio, fallback.eval(*x))

    return ConditionalDensity(j.space_x, j.space_y, family, fallback, (), marg_y)


def tweak_version(c: ConditionalDensity, y0, replacement: Density,
                  g: GridSpec | None = None, tol: float = 1e-4) -> ConditionalDensity:
    """Copy of ``c`` whose slice at exactly ``y0`` is ``replacement``."""
    key = tuple(float(v) for v in np.atleast_1d(y0))
    if len(key) != c.space_y.ndim:
        raise ValueError(f"tweak point has {len(key)} coordinates, expected {c.space_y.ndim}")
    mass = math.exp(log_integrate(replacement.log_eval, c.space_x, g))
    if abs(mass - 1.0) > tol:
        raise NotADensity(f"replacement integrates to {mass!r}, not 1")
    tweaks = tuple((p, d) for p, d in c.tweaks if p != key) + ((key, replacement),)
    return replace(c, tweaks=tweaks)


def ae_distance(a: ConditionalDensity, b: ConditionalDensity, marginal_y: Density,
                g: GridSpec | None = None) -> float:
    """Integral over ``y`` of the capped sup-distance between slices of ``a`` and ``b``.

    Slices are compared on the ``x`` grid.  Tweaks only count at ``y`` nodes
    that carry positive measure on their own (counting points and atoms).
    """
    g = g or GridSpec()
    x_axes, y_axes = a.space_x.axes(g), a.space_y.axes(g)
    ny = len(y_axes)
    y_shape = tuple(ax.size for ax in y_axes)
    mesh = np.meshgrid(*[np.arange(ax.size) for ax in y_axes], indexing="ij")
    ycols, atomic = [], np.ones(math.prod(y_shape), dtype=bool)
    for ax, idx in zip(y_axes, mesh):
        flat = idx.ravel()
        ycols.extend(c[flat] for c in ax.coords)
        atomic &= ax.atomic[flat]

    n_x = math.prod(ax.size for ax in x_axes)
    step = max(1, _BLOCK // max(n_x, 1))
    nxd = len(x_axes)
    xcoords = []
    for i, ax in enumerate(x_axes):
        shape = [1] * (nxd + 1)
        shape[i + 1] = ax.size
        xcoords.extend(c.reshape(shape) for c in ax.coords)

    dist = np.empty(len(atomic))
    for start in range(0, len(atomic), step):
        sl = slice(start, start + step)
        ys = [col[sl].reshape((-1,) + (1,) * nxd) for col in ycols]
        at = atomic[sl].reshape((-1,) + (1,) * nxd)
        args = xcoords + ys
        va, vb = a.base(*args), b.base(*args)
        if (a.tweaks or b.tweaks) and at.any():
            va = np.where(at, a(*args), va)
            vb = np.where(at, b(*args), vb)
        diff = np.abs(np.broadcast_to(va - vb, (len(ys[0]),) + tuple(ax.size for ax in x_axes)))
        diff = np.nan_to_num(diff, nan=1.0, posinf=1.0)
        dist[sl] = np.minimum(1.0, diff.reshape(len(ys[0]), -1).max(axis=1))

    y_mesh = [col.reshape(y_shape) for col in ycols]
    weight = np.broadcast_to(marginal_y.eval(*y_mesh), y_shape)
    return reduce_grid(dist.reshape(y_shape) * weight, [ax.weights for ax in y_axes],
                       range(ny - 1, -1, -1))


def ae_equal(a: ConditionalDensity, b: ConditionalDensity, marginal_y: Density,
             g: GridSpec | None = None, tol: float = 1e-6) -> bool:
    """True when ``a`` and ``b`` agree for almost every ``y`` under ``marginal_y``."""
    return ae_distance(a, b, marginal_y, g) <= tol


def _lower_part(m: BaseMeasure, x: float, g: GridSpec):
    """The part of a 1-D measure at or below ``x``, or None when it is empty."""
    if isinstance(m, LebesgueBox) and m.ndim == 1:
        (lo, hi), = m.resolved_bounds(g)
        return LebesgueBox.interval(lo, min(x, hi)) if x > lo else None
    if isinstance(m, CountingSet) and m.ndim == 1:
        pts = tuple(p for p in m.points if p[0] <= x)
        return CountingSet(pts) if pts else None
    raise TypeError("interval conditioning needs a one-dimensional interval or counting set for X")


def interval_condition_cdf(j: JointDensity, x: float, y: float, delta: float,
                           g: GridSpec | None = None) -> float:
    """``P(X <= x | Y in [y - delta, y + delta])`` by the ratio of event probabilities."""
    g = g or GridSpec()
    if not delta > 0:
        raise ValueError("delta must be positive")
    if not (isinstance(j.space_y, LebesgueBox) and j.space_y.ndim == 1):
        raise TypeError("interval conditioning needs a one-dimensional interval for Y")
    (ylo, yhi), = j.space_y.resolved_bounds(g)
    lo, hi = max(y - delta, ylo), min(y + delta, yhi)
    if not hi > lo:
        raise ZeroProbabilityEvent(f"[{y - delta}, {y + delta}] misses the support of Y")
    band = LebesgueBox.interval(lo, hi)
    den = integrate(j, product_measure(j.space_x, band), g)
    if not den > 0:
        raise ZeroProbabilityEvent(f"P(Y in [{lo}, {hi}]) is zero; the conditional is undefined")
    lower = _lower_part(j.space_x, x, g)
    if lower is None:
        return 0.0
    return integrate(j, product_measure(lower, band), g) / den


def conditional_cdf(c: ConditionalDensity, x: float, y: float, g: GridSpec | None = None) -> float:
    """Integral of the slice at ``y`` up to ``x``."""
    g = g or GridSpec()
    lower = _lower_part(c.space_x, x, g)
    if lower is None:
        return 0.0
    return integrate(lambda *xs: c(*xs, y), lower, g)
