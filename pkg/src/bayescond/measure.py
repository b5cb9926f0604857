"""Base measures, densities defined against them, and grid quadrature.

Every measure exposes a list of :class:`Axis` objects for a given
:class:`GridSpec`.  An axis is a set of nodes with weights; a continuous
interval becomes a midpoint or trapezoid rule, a counting set becomes its
points with unit weights, and a point-mass mixture becomes its atoms (unit
weight) followed by midpoint nodes for the continuous part.  Integration is
then a weighted sum over the tensor product of the axes.

Sums are reduced one axis at a time, last axis first, with :func:`math.fsum`
(exactly rounded), so results do not depend on how the grid is split
between worker threads.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import (
    DivergentMass,
    EmptyMeasure,
    GridSpecError,
    NonFiniteIntegrand,
    ZeroMass,
)

RULES = ("midpoint", "trapezoid")

# below this many grid nodes, evaluation is not split across threads
_PARALLEL_THRESHOLD = 1 << 16


@dataclass(frozen=True)
class GridSpec:
    """Quadrature settings.

    ``nodes`` is the node count for every continuous axis, ``truncation`` the
    length kept of a half-infinite axis (a doubly infinite axis becomes
    ``[-truncation, truncation]``).
    """

    nodes: int = 4096
    rule: str = "midpoint"
    truncation: float = 30.0

    def __post_init__(self):
        if self.rule not in RULES:
            raise GridSpecError(f"unknown quadrature rule {self.rule!r}; expected one of {RULES}")
        if int(self.nodes) != self.nodes or self.nodes < 1:
            raise GridSpecError(f"node count must be a positive integer, got {self.nodes!r}")
        if self.rule == "trapezoid" and self.nodes < 2:
            raise GridSpecError("trapezoid rule needs at least 2 nodes")
        if not (math.isfinite(self.truncation) and self.truncation > 0):
            raise GridSpecError(f"truncation must be finite and positive, got {self.truncation!r}")

    def with_nodes(self, nodes: int) -> "GridSpec":
        return GridSpec(nodes=nodes, rule=self.rule, truncation=self.truncation)


@dataclass(frozen=True, eq=False)
class Axis:
    """One tensor-grid axis: nodes (possibly multi-coordinate) and weights."""

    coords: tuple  # one float array per coordinate carried by the axis
    weights: np.ndarray
    atomic: np.ndarray  # True where the node alone has positive measure

    @property
    def size(self) -> int:
        return len(self.weights)


def rule_nodes(lo: float, hi: float, n: int, rule: str = "midpoint"):
    """Nodes and weights of a composite rule on ``[lo, hi]``."""
    if rule == "midpoint":
        h = (hi - lo) / n
        x = lo + (np.arange(n) + 0.5) * h
        w = np.full(n, h)
    elif rule == "trapezoid":
        h = (hi - lo) / (n - 1)
        x = lo + np.arange(n) * h
        x[-1] = hi
        w = np.full(n, h)
        w[0] = w[-1] = h / 2
    else:
        raise GridSpecError(f"unknown quadrature rule {rule!r}")
    return x, w


class BaseMeasure:
    """A reference measure; densities are defined with respect to one of these."""

    ndim: int

    def axes(self, g: GridSpec) -> list[Axis]:
        raise NotImplementedError


@dataclass(frozen=True)
class LebesgueBox(BaseMeasure):
    """Lebesgue measure on an axis-aligned box.

    Infinite ends are allowed; they are cut at ``GridSpec.truncation`` when a
    grid is built.  ``tail_tolerance`` records the tail mass the caller
    accepts losing to that cut.
    """

    bounds: tuple
    tail_tolerance: float = 1e-9

    def __post_init__(self):
        bounds = tuple((float(lo), float(hi)) for lo, hi in self.bounds)
        if not bounds:
            raise ValueError("LebesgueBox needs at least one axis")
        for lo, hi in bounds:
            if math.isnan(lo) or math.isnan(hi) or not lo < hi:
                raise ValueError(f"invalid axis bounds ({lo}, {hi}); need lo < hi")
        object.__setattr__(self, "bounds", bounds)

    @classmethod
    def interval(cls, lo: float, hi: float, **kw) -> "LebesgueBox":
        return cls(((lo, hi),), **kw)

    @classmethod
    def half_line(cls, lo: float = 0.0, **kw) -> "LebesgueBox":
        return cls(((lo, math.inf),), **kw)

    @classmethod
    def real_line(cls, **kw) -> "LebesgueBox":
        return cls(((-math.inf, math.inf),), **kw)

    @property
    def ndim(self) -> int:
        return len(self.bounds)

    def resolved_bounds(self, g: GridSpec) -> tuple:
        out = []
        for lo, hi in self.bounds:
            if math.isinf(lo) and math.isinf(hi):
                lo, hi = -g.truncation, g.truncation
            elif math.isinf(hi):
                hi = lo + g.truncation
            elif math.isinf(lo):
                lo = hi - g.truncation
            out.append((lo, hi))
        return tuple(out)

    def axes(self, g: GridSpec) -> list[Axis]:
        axes = []
        for lo, hi in self.resolved_bounds(g):
            x, w = rule_nodes(lo, hi, g.nodes, g.rule)
            axes.append(Axis((x,), w, np.zeros(len(x), dtype=bool)))
        return axes


@dataclass(frozen=True)
class CountingSet(BaseMeasure):
    """Counting measure on a finite ordered set of integer tuples."""

    points: tuple

    def __post_init__(self):
        pts = []
        for p in self.points:
            t = tuple(int(c) for c in (p if isinstance(p, (tuple, list)) else (p,)))
            pts.append(t)
        if len(set(pts)) != len(pts):
            raise ValueError("CountingSet points must be distinct")
        if pts and len({len(p) for p in pts}) != 1:
            raise ValueError("CountingSet points must share one dimension")
        object.__setattr__(self, "points", tuple(pts))

    @classmethod
    def range(cls, lo: int, hi: int) -> "CountingSet":
        """The integers ``lo, ..., hi`` inclusive."""
        return cls(tuple(range(lo, hi + 1)))

    @property
    def ndim(self) -> int:
        return len(self.points[0]) if self.points else 1

    def axes(self, g: GridSpec) -> list[Axis]:
        if not self.points:
            raise EmptyMeasure("counting set has no points")
        arr = np.array(self.points, dtype=float)
        n = len(self.points)
        coords = tuple(arr[:, i].copy() for i in range(arr.shape[1]))
        return [Axis(coords, np.ones(n), np.ones(n, dtype=bool))]


@dataclass(frozen=True)
class PointMassMixture(BaseMeasure):
    """Sum of unit point masses at ``atoms`` and a 1-D Lebesgue part.

    A density against this measure takes at an atom the probability of that
    atom, and elsewhere the density of the continuous component.  The
    continuous part is always integrated with the midpoint rule.
    """

    atoms: tuple
    continuous: LebesgueBox

    def __post_init__(self):
        atoms = tuple(float(a) for a in self.atoms)
        if len(set(atoms)) != len(atoms):
            raise ValueError("atoms must be distinct")
        if self.continuous.ndim != 1:
            raise ValueError("PointMassMixture supports a one-dimensional continuous part")
        object.__setattr__(self, "atoms", atoms)

    @property
    def ndim(self) -> int:
        return 1

    def axes(self, g: GridSpec) -> list[Axis]:
        (lo, hi), = self.continuous.resolved_bounds(g)
        x, w = rule_nodes(lo, hi, g.nodes, "midpoint")
        atoms = np.array(self.atoms, dtype=float)
        if np.isin(x, atoms).any():
            raise GridSpecError("a quadrature node coincides with an atom; change the node count")
        nodes = np.concatenate([atoms, x])
        weights = np.concatenate([np.ones(len(atoms)), w])
        atomic = np.concatenate([np.ones(len(atoms), dtype=bool), np.zeros(len(x), dtype=bool)])
        return [Axis((nodes,), weights, atomic)]


@dataclass(frozen=True)
class Product(BaseMeasure):
    factors: tuple

    def __post_init__(self):
        if not self.factors:
            raise ValueError("Product needs at least one factor")
        object.__setattr__(self, "factors", tuple(self.factors))

    @property
    def ndim(self) -> int:
        return sum(f.ndim for f in self.factors)

    def axes(self, g: GridSpec) -> list[Axis]:
        return [ax for f in self.factors for ax in f.axes(g)]


def product_measure(a: BaseMeasure, b: BaseMeasure) -> Product:
    """Product of two measures, flattening nested products."""
    fa = a.factors if isinstance(a, Product) else (a,)
    fb = b.factors if isinstance(b, Product) else (b,)
    return Product(fa + fb)


class Density:
    """A nonnegative function together with the measure it is a density against.

    Either ``pdf`` or ``logpdf`` (or both) must be given; the other one is
    derived.  Evaluators take one array per coordinate and broadcast.
    """

    def __init__(self, space: BaseMeasure, pdf=None, logpdf=None, *,
                 normalized: bool = False, log_normalizer: float = 0.0, name: str | None = None):
        if pdf is None and logpdf is None:
            raise TypeError("Density needs pdf or logpdf")
        self.space = space
        self._pdf = pdf
        self._logpdf = logpdf
        self.normalized = normalized
        self.log_normalizer = log_normalizer
        self.name = name

    def eval(self, *x):
        if self._pdf is None:
            return np.exp(self._logpdf(*x))
        return np.asarray(self._pdf(*x), dtype=float)

    def log_eval(self, *x):
        if self._logpdf is None:
            with np.errstate(divide="ignore"):
                return np.log(np.asarray(self._pdf(*x), dtype=float))
        return np.asarray(self._logpdf(*x), dtype=float)

    __call__ = eval

    def __repr__(self):
        label = self.name or "Density"
        return f"<{label} on {type(self.space).__name__}, normalized={self.normalized}>"


def default_workers() -> int:
    env = os.environ.get("MB_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            pass
    return os.cpu_count() or 1


def _sparse_coords(axes: Sequence[Axis]) -> list[np.ndarray]:
    nd = len(axes)
    out = []
    for i, ax in enumerate(axes):
        shape = [1] * nd
        shape[i] = ax.size
        out.extend(c.reshape(shape) for c in ax.coords)
    return out


def evaluate_on_grid(f: Callable, axes: Sequence[Axis], *, log: bool = False,
                     workers: int | None = None) -> np.ndarray:
    """Evaluate ``f`` on the tensor grid of ``axes``.

    With ``log=True`` the values are log-densities and ``-inf`` is allowed.
    """
    for ax in axes:
        if ax.size == 0:
            raise EmptyMeasure("grid axis has no nodes")
    shape = tuple(ax.size for ax in axes)
    coords = _sparse_coords(axes)
    workers = default_workers() if workers is None else max(1, int(workers))
    total = math.prod(shape)

    if workers > 1 and total >= _PARALLEL_THRESHOLD and shape[0] > 1:
        bounds = np.linspace(0, shape[0], min(workers, shape[0]) + 1).astype(int)

        def chunk(k):
            lo, hi = bounds[k], bounds[k + 1]
            sub = [c[lo:hi] if c.shape[0] == shape[0] and c.ndim and c.shape[0] > 1 else c
                   for c in coords]
            sub_shape = (hi - lo,) + shape[1:]
            return np.broadcast_to(np.asarray(f(*sub), dtype=float), sub_shape)

        with ThreadPoolExecutor(max_workers=len(bounds) - 1) as pool:
            parts = list(pool.map(chunk, range(len(bounds) - 1)))
        values = np.concatenate(parts, axis=0)
    else:
        values = np.array(np.broadcast_to(np.asarray(f(*coords), dtype=float), shape))

    if log:
        if np.isnan(values).any():
            raise NonFiniteIntegrand("log-density is NaN at a grid node")
        if np.isposinf(values).any():
            raise DivergentMass("log-density is +inf at a grid node")
    elif not np.isfinite(values).all():
        raise NonFiniteIntegrand("integrand is not finite at a grid node")
    return values


def _fsum_last(a: np.ndarray) -> np.ndarray:
    lead = a.shape[:-1]
    rows = a.reshape(-1, a.shape[-1]).tolist()
    return np.array([math.fsum(r) for r in rows], dtype=float).reshape(lead)


def reduce_grid(values: np.ndarray, weights: Sequence[np.ndarray], order: Sequence[int]) -> np.ndarray:
    """Weighted sums over the grid axes listed in ``order``, first entry reduced first.

    Axes not listed are kept.  Returns a float when every axis is reduced.
    """
    labels = list(range(values.ndim))
    v = values
    for ax in order:
        pos = labels.index(ax)
        shape = [1] * v.ndim
        shape[pos] = len(weights[ax])
        v = np.moveaxis(v * weights[ax].reshape(shape), pos, -1)
        v = _fsum_last(v)
        labels.pop(pos)
    return float(v) if v.ndim == 0 else v


def integrate(f: Callable, m: BaseMeasure, g: GridSpec | None = None, *,
              workers: int | None = None) -> float:
    """Quadrature approximation of the integral of ``f`` against ``m``."""
    g = g or GridSpec()
    axes = m.axes(g)
    values = evaluate_on_grid(f, axes, workers=workers)
    return reduce_grid(values, [ax.weights for ax in axes], range(len(axes) - 1, -1, -1))


def log_integrate(logf: Callable, m: BaseMeasure, g: GridSpec | None = None, *,
                  workers: int | None = None) -> float:
    """Logarithm of the integral of ``exp(logf)``, computed with a max shift.

    Returns ``-inf`` when the integrand vanishes on the whole grid.
    """
    g = g or GridSpec()
    axes = m.axes(g)
    values = evaluate_on_grid(logf, axes, log=True, workers=workers)
    return log_sum_grid(values, axes)


def log_sum_grid(log_values: np.ndarray, axes: Sequence[Axis]) -> float:
    top = float(np.max(log_values))
    if top == -math.inf:
        return -math.inf
    s = reduce_grid(np.exp(log_values - top), [ax.weights for ax in axes],
                    range(len(axes) - 1, -1, -1))
    if not math.isfinite(s):
        raise DivergentMass("integral overflowed")
    return top + math.log(s) if s > 0 else -math.inf


def normalize(d: Density, g: GridSpec | None = None) -> Density:
    """Divide ``d`` by its integral; the log of that integral is kept as ``log_normalizer``."""
    logz = log_integrate(d.log_eval, d.space, g)
    if logz == -math.inf:
        raise ZeroMass("density integrates to zero")
    if not math.isfinite(logz):
        raise DivergentMass("density does not have finite mass")
    return Density(
        d.space,
        logpdf=lambda *x: d.log_eval(*x) - logz,
        normalized=True,
        log_normalizer=logz,
        name=d.name,
    )


def tonelli_check(f: Callable, a: BaseMeasure, b: BaseMeasure, g: GridSpec | None = None, *,
                  workers: int | None = None) -> tuple[float, float]:
    """Iterated integrals of ``f(x, y)`` in both orders: (dx then dy, dy then dx)."""
    g = g or GridSpec()
    axes_a, axes_b = a.axes(g), b.axes(g)
    axes = axes_a + axes_b
    values = evaluate_on_grid(f, axes, workers=workers)
    weights = [ax.weights for ax in axes]
    ia = list(range(len(axes_a) - 1, -1, -1))
    ib = list(range(len(axes) - 1, len(axes_a) - 1, -1))
    return reduce_grid(values, weights, ia + ib), reduce_grid(values, weights, ib + ia)


def expectation(fn: Callable, d: Density, g: GridSpec | None = None) -> float:
    """Integral of ``fn * d`` against the density's space."""
    return integrate(lambda *x: fn(*x) * d.eval(*x), d.space, g)


def grid_points(m: BaseMeasure, g: GridSpec) -> np.ndarray:
    """All grid nodes of ``m`` as an ``(npoints, ndim)`` array in C order."""
    axes = m.axes(g)
    mesh = np.meshgrid(*[np.arange(ax.size) for ax in axes], indexing="ij")
    cols = []
    for ax, idx in zip(axes, mesh):
        flat = idx.ravel()
        cols.extend(c[flat] for c in ax.coords)
    return np.stack(cols, axis=1)


def probe_lattice(lo: float, hi: float, n: int = 64) -> np.ndarray:
    """Deterministic evenly spaced probe points, endpoints included."""
    return np.linspace(lo, hi, n)
