"""Conditioning on the diagonal {v1 = v2}: why the event alone is not enough.

The diagonal is the level set ``Z = 0`` of ``Z = v1 - v2`` and also the
level set ``W = 1`` of ``W = v1 / v2``.  Conditioning on ``Z`` and on ``W``
gives different densities along the diagonal, and so do the two natural
families of shrinking events (bands ``|v1 - v2| < eps`` and wedges
``|v1 / v2 - 1| < eps``).  The diagonal coordinate is ``v = v1``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .conditional import JointDensity, condition_on_y
from .errors import GridTooCoarse, ZeroProbabilityEvent
from .measure import (
    Density,
    GridSpec,
    LebesgueBox,
    expectation,
    integrate,
    probe_lattice,
    rule_nodes,
)

MIN_NODES = 16
DEFAULT_EPS = (0.2, 0.1, 0.05, 0.025)
# sup-distances are taken on this lattice; it starts above the largest default
# eps because band events are distorted within eps of v = 0
PROBES = probe_lattice(0.25, 8.0, 64)

CONDITIONERS = {
    "difference": (lambda v1, v2: v1 - v2, 0.0),
    "ratio": (lambda v1, v2: v1 / v2, 1.0),
}
FAMILIES = {"band": "difference", "wedge": "ratio"}


@dataclass(frozen=True, eq=False)
class DiagonalConditioningProblem:
    """A joint density of ``(v1, v2)`` and the event ``{v1 = v2}``."""

    joint: JointDensity
    name: str = ""

    def conditioner_targets(self, probes=PROBES) -> dict:
        """Largest deviation of each conditioning variable from its target on the diagonal."""
        v = np.asarray(probes, dtype=float)
        return {k: float(np.max(np.abs(fn(v, v) - target))) for k, (fn, target) in CONDITIONERS.items()}


def _check_grid(g: GridSpec):
    if g.nodes < MIN_NODES:
        raise GridTooCoarse(f"need at least {MIN_NODES} nodes per axis, got {g.nodes}")


def condition_via_variable(p: DiagonalConditioningProblem, which: str,
                           g: GridSpec | None = None) -> Density:
    """Density of ``v`` along the diagonal, conditioning on ``Z = v1 - v2`` or ``W = v1 / v2``."""
    g = g or GridSpec()
    _check_grid(g)
    space_v = p.joint.space_x
    if which == "difference":
        # (v, z) -> (v1, v2) = (v, v - z) has unit Jacobian
        changed = JointDensity.from_function(space_v, LebesgueBox.real_line(),
                                             pdf=lambda v, z: p.joint(v, v - z))
        at = 0.0
    elif which == "ratio":
        # (v, w) -> (v1, v2) = (v, v / w) has Jacobian v / w^2
        def pdf(v, w):
            with np.errstate(divide="ignore", invalid="ignore"):
                out = p.joint(v, v / w) * v / (w * w)
            return np.where(w > 0, out, 0.0)

        changed = JointDensity.from_function(space_v, LebesgueBox.half_line(), pdf=pdf)
        at = 1.0
    else:
        raise ValueError(f"unknown conditioning variable {which!r}; use 'difference' or 'ratio'")
    c = condition_on_y(changed, g)
    return Density(space_v, pdf=lambda v: c(v, at), normalized=True, name=f"diagonal via {which}")


def _event_interval(v, eps: float, family: str):
    if family == "band":
        return v - eps, v + eps
    if family == "wedge":
        hi = v / (1.0 - eps) if eps < 1.0 else np.full_like(v, np.inf)
        return v / (1.0 + eps), hi
    raise ValueError(f"unknown event family {family!r}; use 'band' or 'wedge'")


def _event_density(p: DiagonalConditioningProblem, eps: float, family: str, g: GridSpec,
                   inner_nodes: int) -> Density:
    (ylo, yhi), = p.joint.space_y.resolved_bounds(g)
    u, w = rule_nodes(0.0, 1.0, inner_nodes)

    def numerator(v):
        v = np.asarray(v, dtype=float)
        lo, hi = _event_interval(v, eps, family)
        lo, hi = np.maximum(lo, ylo), np.minimum(hi, yhi)
        width = np.clip(hi - lo, 0.0, None)
        v2 = lo[..., None] + width[..., None] * u
        vals = p.joint(v[..., None], v2) * w
        rows = vals.reshape(-1, inner_nodes).tolist()
        sums = np.array([math.fsum(r) for r in rows]).reshape(v.shape)
        return width * sums

    prob = integrate(numerator, p.joint.space_x, g)
    if not prob > 0:
        raise ZeroProbabilityEvent(f"{family} event with eps={eps} has zero probability")
    return Density(p.joint.space_x, pdf=lambda v: numerator(v) / prob, normalized=True,
                   name=f"v1 given {family} eps={eps}")


def nested_event_limit(p: DiagonalConditioningProblem, family: str, eps_seq=DEFAULT_EPS,
                       g: GridSpec | None = None, inner_nodes: int = 256) -> list[Density]:
    """Density of ``v1`` given each event of a shrinking family around the diagonal."""
    g = g or GridSpec()
    _check_grid(g)
    eps = [float(e) for e in eps_seq]
    if any(e <= 0 for e in eps) or any(b >= a for a, b in zip(eps, eps[1:])):
        raise ValueError("eps_seq must be positive and strictly decreasing")
    return [_event_density(p, e, family, g, inner_nodes) for e in eps]


def sup_distance(a: Density, b: Density, probes=PROBES) -> float:
    return float(np.max(np.abs(a.eval(probes) - b.eval(probes))))


def paradox_report(p: DiagonalConditioningProblem, g: GridSpec | None = None,
                   eps_seq=DEFAULT_EPS, probes=PROBES) -> dict:
    """Both conditioning variables, both event families, and the verdict."""
    g = g or GridSpec()
    _check_grid(g)
    probes = np.asarray(probes, dtype=float)
    limits = {k: condition_via_variable(p, k, g) for k in CONDITIONERS}
    report = {}
    for k, d in limits.items():
        report[k] = {
            "mean": expectation(lambda v: v, d, g),
            "mass": integrate(d.eval, d.space, g),
            "grid": probes.tolist(),
            "density": d.eval(probes).tolist(),
        }
    report["supdiff"] = sup_distance(limits["difference"], limits["ratio"], probes)

    nested = {}
    for family, match in FAMILIES.items():
        other = "ratio" if match == "difference" else "difference"
        seq = nested_event_limit(p, family, eps_seq, g)
        nested[family] = {
            "limit": match,
            "eps": [float(e) for e in eps_seq],
            "distance_to_limit": [sup_distance(d, limits[match], probes) for d in seq],
            "distance_to_other": [sup_distance(d, limits[other], probes) for d in seq],
            "mean": [expectation(lambda v: v, d, g) for d in seq],
        }
    report["nested"] = nested
    report["verdict"] = (
        "The event {v1 = v2} does not determine a conditional density: conditioning via "
        f"v1 - v2 gives mean {report['difference']['mean']:.6g}, via v1 / v2 gives mean "
        f"{report['ratio']['mean']:.6g}. Only the pair (event, conditioning variable) does."
    )
    return report
