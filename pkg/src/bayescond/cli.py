"""Command-line front end: ``bayescond demo|run|check``.

Exit codes:
  0   success
  1   computation failed (e.g. data impossible under the model, a check missed)
  2   a demonstration exhibited its pathology as intended
  64  usage error
  65  model file or data binding error
"""

from __future__ import annotations

import argparse
import math
import sys
from dataclasses import dataclass

import numpy as np

from . import borel, dsl
from .bayes import bayes_factor, posterior
from .corpus import (
    additive_normal_forward_model,
    independent_exp_joint,
    narrow_gaussian_joint,
    normal_normal_model,
    shrinkage_prior,
    waiting_times_model,
)
from .distributions import gamma_logpdf, gamma_density, normal_logpdf
from .errors import BayesCondError, DataImpossibleUnderModel, ImproperPosterior, ModelError, UnboundData
from .measure import Density, GridSpec, expectation, log_sum_grid
from .reparam import (
    acausality_demo,
    get_transform,
    param_reparam_check,
    posterior_invariance_report,
)
from .report import flatten, to_csv, to_json, write_output

EXIT_OK, EXIT_FAILURE, EXIT_PATHOLOGY, EXIT_USAGE, EXIT_DATA = 0, 1, 2, 64, 65
MIN_NODES = 16
DEFAULT_TOTAL_NODES = 1 << 17
MAX_AXIS_NODES = 100_000
DEMOS = ("waiting-times", "reparam", "wrong-jacobian", "borel-kolmogorov", "acausality",
         "bayes-factor-sigma")
DATA_TRANSFORMS = ("cube", "log", "reciprocal", "affine")
POSITIVE_DATA = ("log", "reciprocal")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n")
        raise SystemExit(EXIT_USAGE)


@dataclass(frozen=True)
class RunConfig:
    nodes: int | None = None
    truncation: float = 30.0
    tolerance: float | None = None
    fmt: str = "json"
    out: str | None = None

    def __post_init__(self):
        if self.nodes is not None and self.nodes < MIN_NODES:
            raise UsageError(f"--grid must be at least {MIN_NODES}, got {self.nodes}")
        if self.tolerance is not None and not self.tolerance > 0:
            raise UsageError(f"--tolerance must be positive, got {self.tolerance}")
        if not (math.isfinite(self.truncation) and self.truncation > 0):
            raise UsageError(f"--truncate must be positive, got {self.truncation}")

    def grid(self, default_nodes: int) -> GridSpec:
        return GridSpec(nodes=self.nodes or default_nodes, truncation=self.truncation)

    def tol(self, default: float) -> float:
        return self.tolerance if self.tolerance is not None else default


@dataclass
class Outcome:
    payload: dict
    table: tuple | None = None  # (header, rows) for CSV output
    status: int = EXIT_OK


def default_axis_nodes(ndim: int) -> int:
    """About 2^17 grid nodes in total, at most 1e5 per axis."""
    n = int(math.floor(DEFAULT_TOTAL_NODES ** (1.0 / max(ndim, 1)) + 1e-9))
    return max(MIN_NODES, min(MAX_AXIS_NODES, n))


def _posterior_table(names, res):
    header = list(names) + ["log_density"]
    rows = [list(p) + [ld] for p, ld in zip(res.points.tolist(), res.log_density.tolist())]
    return header, rows


def _checks_status(checks: dict) -> int:
    return EXIT_OK if all(checks.values()) else EXIT_FAILURE


# demos


def demo_waiting_times(cfg: RunConfig, y: float) -> Outcome:
    g = cfg.grid(MAX_AXIS_NODES)
    res = posterior(waiting_times_model(), y, g)
    theta = res.points[:, 0]
    sup_err = float(np.max(np.abs(np.exp(res.log_density) - np.exp(gamma_logpdf(theta, 3.0, 2.0 + y)))))
    oracle_lml = math.log(8.0 / (y + 2.0) ** 3)
    tol = cfg.tol(1e-5)
    checks = {
        "log_marginal_within_tolerance": abs(res.log_marginal_likelihood - oracle_lml) <= tol,
        "posterior_sup_error_within_1e-4": sup_err <= 1e-4,
    }
    payload = {
        "demo": "waiting-times",
        "y": y,
        "nodes": g.nodes,
        "log_marginal_likelihood": res.log_marginal_likelihood,
        "log_marginal_oracle": oracle_lml,
        "map": list(res.map_point),
        "map_refined": list(res.map_refined),
        "map_oracle": 2.0 / (y + 2.0),
        "posterior_sup_error": sup_err,
        "checks": checks,
        "grid": res.points.tolist(),
        "log_density": res.to_dict()["log_density"],
    }
    return Outcome(payload, _posterior_table(["theta"], res), _checks_status(checks))


def demo_reparam(cfg: RunConfig, y: float) -> Outcome:
    if not y > 0:
        raise UsageError("the reparam demo needs --y > 0 (log and reciprocal need positive data)")
    g = cfg.grid(4096)
    tol = cfg.tol(1e-6)
    reports = []
    for model in (waiting_times_model(), normal_normal_model()):
        for name in DATA_TRANSFORMS:
            r = posterior_invariance_report(model, get_transform(name), y, g).to_dict()
            r = {"model": model.name, **r}
            r["invariant"] = bool(
                r["posterior_supdiff"] <= tol and r["map_index_equal"]
                and abs(r["log_marginal_shift"] - r["expected_log_marginal_shift"]) <= tol)
            reports.append(r)
    param = param_reparam_check(gamma_density(2.0, 2.0), get_transform("reciprocal"),
                                waiting_times_model(), y, g,
                                eta_grid=GridSpec(200_000, truncation=1000.0)).to_dict()
    payload = {"demo": "reparam", "y": y, "nodes": g.nodes, "tolerance": tol,
               "data_transforms": reports, "parameter_transform": param}
    rows = [[r["model"], r["transform"], r["posterior_supdiff"], r["map_index_equal"],
             r["log_marginal_shift"], r["expected_log_marginal_shift"], r["invariant"]] for r in reports]
    header = ["model", "transform", "posterior_supdiff", "map_index_equal", "log_marginal_shift",
              "expected_log_marginal_shift", "invariant"]
    return Outcome(payload, (header, rows), _checks_status({i: r["invariant"] for i, r in enumerate(reports)}))


def _acausality_prior(transform: str) -> Density:
    return shrinkage_prior(positive=transform in POSITIVE_DATA)


def _acausality_grid(cfg: RunConfig, transform: str) -> GridSpec:
    # 0.01 spacing by default on either prior support
    return cfg.grid(6000 if transform in POSITIVE_DATA else 12000)


def demo_wrong_jacobian(cfg: RunConfig, y: float) -> Outcome:
    g = _acausality_grid(cfg, "cube")
    r = acausality_demo(additive_normal_forward_model(), _acausality_prior("cube"), get_transform("cube"), y, g)
    oracle = 100.0 / 101.0 * y
    d = r.to_dict()
    d["map_oracle"] = oracle
    d["correct_within_one_step"] = abs(r.map_correct[0] - oracle) <= r.grid_step
    d["pathology"] = r.map_shift_steps > 10
    payload = {"demo": "wrong-jacobian", "y": y, "nodes": g.nodes, **d}
    if not d["correct_within_one_step"]:
        return Outcome(payload, None, EXIT_FAILURE)
    return Outcome(payload, None, EXIT_PATHOLOGY if d["pathology"] else EXIT_OK)


def demo_acausality(cfg: RunConfig, y: float) -> Outcome:
    if not y > 0:
        raise UsageError("the acausality demo needs --y > 0")
    reports = []
    for name in ("identity",) + DATA_TRANSFORMS:
        g = _acausality_grid(cfg, name)
        t = get_transform(name)
        r = acausality_demo(additive_normal_forward_model(), _acausality_prior(name), t, y, g).to_dict()
        r["constant_jacobian"] = name in ("identity", "affine")
        r["nodes"] = g.nodes
        reports.append(r)
    header = ["transform", "map_correct", "map_wrong", "map_shift_steps", "constant_jacobian"]
    rows = [[r["transform"], r["map_correct"][0], r["map_wrong"][0], r["map_shift_steps"],
             r["constant_jacobian"]] for r in reports]
    return Outcome({"demo": "acausality", "y": y, "reports": reports}, (header, rows))


def demo_borel_kolmogorov(cfg: RunConfig, y: float | None) -> Outcome:
    g = cfg.grid(4096)
    problem = borel.DiagonalConditioningProblem(independent_exp_joint(), "Exp(1) x Exp(1)")
    rep = borel.paradox_report(problem, g)
    narrow = []
    for width in (0.1, 0.05):
        p = borel.DiagonalConditioningProblem(narrow_gaussian_joint(width), f"narrow Gaussian {width}")
        narrow.append({
            "width": width,
            "difference_mean": expectation(lambda v: v, borel.condition_via_variable(p, "difference", g), g),
            "ratio_mean": expectation(lambda v: v, borel.condition_via_variable(p, "ratio", g), g),
        })
    payload = {"demo": "borel-kolmogorov", "joint": problem.name, "nodes": g.nodes, **rep,
               "narrow_gaussian": narrow}
    sys.stderr.write(rep["verdict"] + "\n")
    header = ["v", "difference", "ratio"]
    rows = [[v, a, b] for v, a, b in zip(rep["difference"]["grid"], rep["difference"]["density"],
                                          rep["ratio"]["density"])]
    return Outcome(payload, (header, rows), EXIT_PATHOLOGY if rep["supdiff"] >= 0.1 else EXIT_OK)


def demo_bayes_factor_sigma(cfg: RunConfig, y: float) -> Outcome:
    g = cfg.grid(12000)
    sigmas = (1.0, 2.0)
    models = [normal_normal_model(noise_sd=s) for s in sigmas]
    lml = [posterior(m, y, g, refine=False).log_marginal_likelihood for m in models]
    oracle = [float(normal_logpdf(y, 0.0, math.sqrt(100.0 + s * s))) for s in sigmas]
    bf = bayes_factor(models[0], models[1], y, g)
    payload = {
        "demo": "bayes-factor-sigma",
        "y": y,
        "nodes": g.nodes,
        "models": [{"noise_sd": s, "log_marginal_likelihood": a, "log_marginal_oracle": b}
                   for s, a, b in zip(sigmas, lml, oracle)],
        "bayes_factor": bf,
        "log_bayes_factor": math.log(bf),
        "log_bayes_factor_oracle": oracle[0] - oracle[1],
    }
    return Outcome(payload)


DEMO_FUNCS = {
    "waiting-times": (demo_waiting_times, 1.0),
    "reparam": (demo_reparam, 1.0),
    "wrong-jacobian": (demo_wrong_jacobian, 2.0),
    "borel-kolmogorov": (demo_borel_kolmogorov, None),
    "acausality": (demo_acausality, 2.0),
    "bayes-factor-sigma": (demo_bayes_factor_sigma, 2.0),
}


# model files


def parse_bindings(items) -> list[tuple[str, float]]:
    out = []
    for item in items or []:
        name, sep, value = item.partition("=")
        if not sep or not name.strip():
            raise UnboundData(f"malformed binding {item!r}; expected NAME=VALUE", 0, 0)
        try:
            v = float(value)
        except ValueError:
            raise UnboundData(f"value of {name.strip()!r} is not a number: {value!r}", 0, 0,
                              node=name.strip()) from None
        out.append((name.strip(), v))
    return out


def run_model(path: str, bindings, cfg: RunConfig) -> Outcome:
    graph = dsl.load(path)
    compiled = dsl.compile_joint(graph)
    if not compiled.data_names:
        raise UnboundData("model has no data nodes", 1, 1)
    if not compiled.param_names:
        raise UnboundData("model has no param nodes", 1, 1)
    values: dict[str, float] = {}
    for name, v in bindings:
        if name not in compiled.data_names:
            raise UnboundData(f"{name!r} is not a data node", 0, 0, node=name)
        if name in values:
            raise UnboundData(f"data node {name!r} is bound more than once", 0, 0, node=name)
        values[name] = v
    for name in compiled.data_names:
        if name not in values:
            node = graph[name]
            raise UnboundData(f"data node {name!r} has no value; pass --data {name}=VALUE",
                              *node.span, node=name)
    y = [values[n] for n in compiled.data_names]
    g = cfg.grid(default_axis_nodes(len(compiled.param_names)))
    res = posterior(compiled.bayes_model(path), y, g)
    axes = compiled.prior.space.axes(g)
    shape = tuple(ax.size for ax in axes)
    mass = math.exp(log_sum_grid(res.log_density.reshape(shape), axes))
    d = res.to_dict()
    payload = {
        "model": path,
        "params": list(compiled.param_names),
        "data": {n: values[n] for n in compiled.data_names},
        "nodes": g.nodes,
        "log_marginal_likelihood": res.log_marginal_likelihood,
        "map": list(res.map_point),
        "map_refined": list(res.map_refined),
        "posterior_mass": mass,
        "grid": d["grid"],
        "log_density": d["log_density"],
    }
    return Outcome(payload, _posterior_table(compiled.param_names, res))


# entry point


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--grid", type=int, metavar="N", help="nodes per continuous axis")
    common.add_argument("--truncate", type=float, default=30.0, metavar="B",
                        help="length kept of infinite axes (default 30)")
    common.add_argument("--out", metavar="PATH", help="write the report here (default: stdout)")
    common.add_argument("--format", choices=("json", "csv"), default="json")
    common.add_argument("--tolerance", type=float, metavar="T", help="override the check tolerance")

    p = _Parser(prog="bayescond", description="Conditional densities and grid Bayes computations.")
    sub = p.add_subparsers(dest="command", required=True, metavar="{demo,run,check}")
    d = sub.add_parser("demo", parents=[common], help="run a named demonstration")
    d.add_argument("name", choices=DEMOS)
    d.add_argument("--y", type=float, help="observed data value")
    r = sub.add_parser("run", parents=[common], help="grid posterior of a model file")
    r.add_argument("model")
    r.add_argument("--data", action="append", metavar="NAME=VALUE", default=[])
    c = sub.add_parser("check", help="parse and validate a model file, print canonical form")
    c.add_argument("model")
    return p


def _emit(outcome: Outcome, cfg: RunConfig, argv) -> None:
    if cfg.fmt == "csv":
        header, rows = outcome.table or (["key", "value"], flatten(outcome.payload))
        text = to_csv(header, rows)
    else:
        text = to_json(outcome.payload)
    write_output(text, cfg.out, argv)


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        if args.command == "check":
            graph = dsl.load(args.model)
            dsl.compile_joint(graph)
            sys.stdout.write(dsl.print_canonical(graph))
            return EXIT_OK
        cfg = RunConfig(nodes=args.grid, truncation=args.truncate, tolerance=args.tolerance,
                        fmt=args.format, out=args.out)
        if args.command == "demo":
            fn, default_y = DEMO_FUNCS[args.name]
            y = args.y if args.y is not None else default_y
            outcome = fn(cfg, y)
        else:
            outcome = run_model(args.model, parse_bindings(args.data), cfg)
        _emit(outcome, cfg, ["bayescond"] + argv)
        return outcome.status
    except UsageError as exc:
        sys.stderr.write(f"bayescond: error: {exc}\n")
        return EXIT_USAGE
    except ModelError as exc:
        sys.stderr.write(f"{getattr(args, 'model', '')}: {exc}\n")
        return EXIT_DATA
    except OSError as exc:
        sys.stderr.write(f"bayescond: {exc}\n")
        return EXIT_DATA
    except (DataImpossibleUnderModel, ImproperPosterior, BayesCondError) as exc:
        sys.stderr.write(f"bayescond: {type(exc).__name__}: {exc}\n")
        return EXIT_FAILURE


if __name__ == "__main__":
    sys.exit(main())
