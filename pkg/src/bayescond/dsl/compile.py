"""Turn a validated ModelGraph into a prior density and a likelihood."""

from __future__ import annotations

import itertools
import math
import operator
from dataclasses import dataclass
from typing import Callable

import numpy as np

from ..bayes import BayesModel
from ..errors import InvalidScale, ModelError
from ..measure import BaseMeasure, CountingSet, Density, GridSpec, LebesgueBox, Product, rule_nodes
from .ast import Abs, ModelGraph, Neg, Num, Ref
from .families import FAMILIES

POISSON_PARAM_MAX = 100
PROBES_PER_AXIS = 8

_OPS = {"+": operator.add, "-": operator.sub, "*": operator.mul, "/": operator.truediv,
        "^": np.power}


def eval_expr(e, env: dict):
    if isinstance(e, Num):
        return e.value
    if isinstance(e, Ref):
        return env[e.name]
    if isinstance(e, Neg):
        return -eval_expr(e.operand, env)
    if isinstance(e, Abs):
        return np.abs(eval_expr(e.arg, env))
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        return _OPS[e.op](eval_expr(e.left, env), eval_expr(e.right, env))


def _constant(e, consts: dict, node, what: str) -> float:
    try:
        v = float(eval_expr(e, consts))
    except KeyError as exc:
        raise ModelError(f"{what} of {node.name!r} must be constant; it uses {exc.args[0]!r}",
                         *e.span, node=node.name) from None
    if not math.isfinite(v):
        raise ModelError(f"{what} of {node.name!r} is not finite", *e.span, node=node.name)
    return v


def _param_space(node, consts: dict) -> BaseMeasure:
    fam = FAMILIES[node.distribution.family]
    if node.bounds is not None:
        lo, hi = (_constant(b, consts, node, "bound") for b in node.bounds)
        if not hi > lo:
            raise ModelError(f"empty bounds [{lo}, {hi}] on {node.name!r}", *node.span, node=node.name)
        if fam.support == "count":
            return CountingSet.range(math.ceil(lo), math.floor(hi))
        return LebesgueBox.interval(lo, hi)
    if fam.support == "real":
        return LebesgueBox.real_line()
    if fam.support == "half":
        return LebesgueBox.half_line()
    if fam.support == "count":
        return CountingSet.range(0, POISSON_PARAM_MAX)
    lo, hi = (_constant(a, consts, node, "uniform support") for a in node.distribution.args)
    return LebesgueBox.interval(lo, hi)


def _data_space(node) -> BaseMeasure:
    support = FAMILIES[node.distribution.family].support
    if support == "count":
        return CountingSet.range(0, POISSON_PARAM_MAX)
    return LebesgueBox.half_line() if support == "half" else LebesgueBox.real_line()


def _node_logpdf(node, x, env):
    fam = FAMILIES[node.distribution.family]
    args = [eval_expr(a, env) for a in node.distribution.args]
    ok = fam.valid(args)
    # invalid parameter values (e.g. abs(delta) == 0) only occur on null sets; give them zero density
    safe = [np.where(ok, a, 1.0) if i in fam.scale else a for i, a in enumerate(args)]
    if fam.name == "uniform":
        safe[1] = np.where(ok, args[1], np.asarray(args[0]) + 1.0)
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        out = fam.logpdf(x, *safe)
    return np.where(ok, out, -np.inf)


@dataclass(frozen=True, eq=False)
class CompiledModel:
    """Prior over the params (declaration order) and a likelihood over the data.

    ``log_likelihood`` is called as ``log_likelihood(*data, *params)`` with
    data in declaration order.
    """

    graph: ModelGraph
    consts: dict
    param_names: tuple
    data_names: tuple
    prior: Density
    log_likelihood: Callable
    data_space: BaseMeasure | None

    def likelihood(self, *args):
        return np.exp(self.log_likelihood(*args))

    def log_joint(self, *args):
        nd = len(self.data_names)
        return self.prior.log_eval(*args[nd:]) + self.log_likelihood(*args)

    def bayes_model(self, name: str = "") -> BayesModel:
        if not self.data_names:
            raise ModelError("model has no data nodes", 1, 1)
        return BayesModel(prior=self.prior, data_space=self.data_space,
                          log_likelihood=self.log_likelihood, name=name)


def _single_or_product(spaces):
    return spaces[0] if len(spaces) == 1 else Product(tuple(spaces))


def _check_scales(g: ModelGraph, order, consts, params, spaces):
    """Evaluate every scale argument at midpoint probes of the param block.

    Probes where some param lies outside its own support carry zero prior
    density and are skipped.
    """
    grid = GridSpec(nodes=PROBES_PER_AXIS)
    probe_axes = []
    for s in spaces:
        if isinstance(s, CountingSet):
            probe_axes.append([float(p[0]) for p in s.points])
        else:
            (lo, hi), = s.resolved_bounds(grid)
            probe_axes.append(rule_nodes(lo, hi, PROBES_PER_AXIS)[0].tolist())
    for combo in itertools.product(*probe_axes):
        env = dict(consts)
        env.update(zip(params, combo))
        for name in order:
            node = g[name]
            fam = FAMILIES[node.distribution.family]
            args = [eval_expr(a, env) for a in node.distribution.args]
            if not bool(fam.valid(args)):
                bad = [i for i in fam.scale if not float(args[i]) > 0] or [1]
                arg = node.distribution.args[bad[0]]
                where = ", ".join(f"{k}={v:g}" for k, v in zip(params, combo)) or "every point"
                raise InvalidScale(
                    f"{fam.name} {fam.params[bad[0]]} of {name!r} is not positive at {where}",
                    *arg.span, node=name)
            if node.kind == "param" and not np.isfinite(_node_logpdf(node, env[name], env)):
                break


def compile_joint(g: ModelGraph) -> CompiledModel:
    order = g.topological_order()
    consts: dict = {}
    for name in order:
        node = g[name]
        if node.kind == "const":
            consts[name] = _constant(node.value, consts, node, "value")
    params = tuple(g.params)
    data = tuple(g.data)
    spaces = [_param_space(g[p], consts) for p in params]
    stochastic = [n for n in order if g[n].kind != "const"]
    _check_scales(g, stochastic, consts, params, spaces)
    param_order = [n for n in stochastic if g[n].kind == "param"]
    data_order = [n for n in stochastic if g[n].kind == "data"]

    def log_prior(*theta):
        env = dict(consts)
        env.update(zip(params, (np.asarray(t, dtype=float) for t in theta)))
        total = 0.0
        for name in param_order:
            total = total + _node_logpdf(g[name], env[name], env)
        return np.asarray(total, dtype=float)

    def log_lik(*args):
        ys, theta = args[:len(data)], args[len(data):]
        env = dict(consts)
        env.update(zip(params, (np.asarray(t, dtype=float) for t in theta)))
        env.update(zip(data, (np.asarray(y, dtype=float) for y in ys)))
        total = 0.0
        for name in data_order:
            total = total + _node_logpdf(g[name], env[name], env)
        return np.asarray(total, dtype=float)

    prior = Density(_single_or_product(spaces), logpdf=log_prior, normalized=True,
                    name="compiled prior") if params else None
    dspace = _single_or_product([_data_space(g[d]) for d in data]) if data else None
    return CompiledModel(g, consts, params, data, prior, log_lik, dspace)
