"""Command line interface: one subcommand per operation, JSON or CSV output.

Exit codes: 0 ok, 2 domain error, 3 convergence failure, 4 resource limit,
64 usage error.
"""
import argparse
import dataclasses
import json
import math
import sys
from enum import Enum
from typing import Callable, Dict, List, Optional, Sequence

import numpy as np

from qnilpotent import carnot, curvature, entropy, heisenberg, maxent, qalgebra
from qnilpotent.config import load_config, section
from qnilpotent.exceptions import (ConvergenceFailure, DomainError, FitRejected,
                                   QNilpotentError, ResourceLimit)
from qnilpotent.heisenberg import HeisenbergPoint, LieVector, UpperUnitriangular
from qnilpotent.version import __version__

try:
    from ovos_utils.log import LOG
except ImportError:
    from logging import getLogger
    LOG = getLogger("qnilpotent")


class Status(str, Enum):
    OK = "ok"
    DOMAIN_ERROR = "domain-error"
    CONVERGENCE_FAILURE = "convergence-failure"
    RESOURCE_LIMIT = "resource-limit"
    USAGE_ERROR = "usage-error"


EXIT_CODES = {
    Status.OK: 0,
    Status.DOMAIN_ERROR: 2,
    Status.CONVERGENCE_FAILURE: 3,
    Status.RESOURCE_LIMIT: 4,
    Status.USAGE_ERROR: 64,
}


@dataclasses.dataclass
class CommandResult:
    """Outcome of one invocation.

    Args:
        status: Maps one-to-one onto the process exit code.
        payload: JSON document written to stdout (or to ``--summary``).
        table: CSV rendering, used when ``--csv`` is selected.
    """
    status: Status
    payload: Dict
    table: Optional[str] = None
    fmt: str = "json"
    summary_path: Optional[str] = None

    @property
    def exit_code(self) -> int:
        return EXIT_CODES[self.status]


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


# ── argument parsing helpers ───────────────────────────────────────────────

def _floats(text: str, n: Optional[int] = None) -> List[float]:
    try:
        values = [float(tok) for tok in text.split(",")]
    except ValueError:
        raise UsageError(f"expected comma separated numbers, got {text!r}")
    if n is not None and len(values) != n:
        raise UsageError(f"expected {n} numbers, got {text!r}")
    return values


def _point(text: str) -> HeisenbergPoint:
    return HeisenbergPoint(*_floats(text, 3))


def _dist(text: str) -> entropy.DiscreteDistribution:
    if text.startswith("@"):
        return entropy.load_distribution_csv(text[1:])
    return entropy.parse_distribution(text)


def _given(value, default):
    """Flag value if it was passed, the config value otherwise."""
    return default if value is None else value


def _point_dict(g: HeisenbergPoint) -> Dict[str, float]:
    return {"x": g.x, "y": g.y, "z": g.z}


def _clean(obj):
    """Replace non-finite floats by None so the output stays valid JSON."""
    if isinstance(obj, float):
        return obj if math.isfinite(obj) else None
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (np.floating, np.integer)):
        return _clean(obj.item())
    return obj


def dumps(payload: Dict) -> str:
    return json.dumps(_clean(payload))


# ── subcommands ───────────────────────────────────────────────────────────

def _cmd_qadd(args, config) -> CommandResult:
    return CommandResult(Status.OK, {"result": qalgebra.q_add(args.x, args.y, args.q)})


def _cmd_entropy(args, config) -> CommandResult:
    p = _dist(args.dist)
    payload = {"S_q": entropy.tsallis_entropy(p, args.q).value}
    if args.rescaled:
        payload["S_tilde"] = entropy.rescaled_entropy(p, args.q).value
    return CommandResult(Status.OK, payload)


def _cmd_compose_check(args, config) -> CommandResult:
    p1, p2 = _dist(args.dist), _dist(args.dist2)
    s1 = entropy.tsallis_entropy(p1, args.q)
    s2 = entropy.tsallis_entropy(p2, args.q)
    joint = entropy.tsallis_entropy(entropy.product_distribution(p1, p2), args.q)
    rhs = entropy.composition_rhs(s1, s2, args.q)
    return CommandResult(Status.OK, {
        "S1": s1.value, "S2": s2.value, "S12": joint.value,
        "composed": rhs, "defect": abs(joint.value - rhs),
        "tilde_defect": entropy.tilde_additivity_defect(p1, p2, args.q),
    })


def _cmd_escort(args, config) -> CommandResult:
    esc = entropy.escort(_dist(args.dist), args.q)
    rows = ["weight" + (",x" if esc.support else "")]
    for i, w in enumerate(esc.weights):
        rows.append(f"{w!r}" + (f",{esc.support[i]!r}" if esc.support else ""))
    payload = {"weights": list(esc.weights)}
    if esc.support:
        payload["support"] = list(esc.support)
    return CommandResult(Status.OK, payload, "\n".join(rows) + "\n")


def _cmd_abe_check(args, config) -> CommandResult:
    p = _dist(args.dist)
    abe = entropy.abe_entropy(p, args.q).value
    ts = entropy.tsallis_entropy(p, args.q).value
    return CommandResult(Status.OK, {"abe": abe, "tsallis": ts, "defect": abs(abe - ts)})


def _cmd_bgs_limit(args, config) -> CommandResult:
    report = entropy.bgs_limit_report(_dist(args.dist), range(1, args.jmax + 1))
    table = "q,gap\n" + "".join(f"{q!r},{g!r}\n" for q, g in zip(report.qs, report.gaps))
    return CommandResult(Status.OK, {"order": report.order, "final_gap": report.gaps[-1],
                                     "qs": report.qs, "gaps": report.gaps}, table)


def _cmd_embed(args, config) -> CommandResult:
    return CommandResult(Status.OK, {"matrix": heisenberg.embed(args.x).rows()})


def _cmd_mul(args, config) -> CommandResult:
    if args.x is not None and args.y is not None:
        a, b = heisenberg.embed(args.x), heisenberg.embed(args.y)
        extra = {"embedding_defect": heisenberg.embedding_defect(args.x, args.y)}
    elif args.a and args.b:
        a = UpperUnitriangular(*_floats(args.a, 3))
        b = UpperUnitriangular(*_floats(args.b, 3))
        extra = {}
    else:
        raise UsageError("mul needs --x and --y, or --a and --b")
    return CommandResult(Status.OK, {"matrix": heisenberg.multiply(a, b).rows(), **extra})


def _cmd_bch_check(args, config) -> CommandResult:
    payload = {"convention": heisenberg.GROUP_LAW_CONVENTION}
    basis = {"X": heisenberg.X, "Y": heisenberg.Y, "Z": heisenberg.Z}
    payload["brackets"] = {f"[{a},{b}]": list(dataclasses.astuple(heisenberg.bracket(u, v)))
                           for a, u in basis.items() for b, v in basis.items()}
    if args.u and args.v:
        u, v = LieVector(*_floats(args.u, 3)), LieVector(*_floats(args.v, 3))
        payload["defect"] = heisenberg.bch_defect(u, v)
        payload["relative_defect"] = heisenberg.bch_defect(u, v, relative=True)
    else:
        if args.samples < 1:
            raise UsageError(f"--samples must be at least 1, got {args.samples}")
        rng = np.random.default_rng(args.seed)
        coords = rng.uniform(-10, 10, size=(args.samples, 6))
        payload["samples"] = args.samples
        payload["max_defect"] = max(
            heisenberg.bch_defect(LieVector(*row[:3]), LieVector(*row[3:]), relative=True)
            for row in coords.tolist())
    return CommandResult(Status.OK, payload)


def _cmd_growth(args, config) -> CommandResult:
    cfg = section(config, "growth")
    report = carnot.discrete_ball_sizes(args.rmax, args.group,
                                        element_budget=cfg.get("element_budget"),
                                        n_jobs=_given(args.jobs, cfg.get("n_jobs")))
    try:
        report = carnot.growth_exponent(report, cfg.get("min_radius"),
                                        cfg.get("max_residual"))
    except FitRejected as e:
        payload = {**e.report.summary(), "error": str(e), "records": e.report.records}
        return CommandResult(Status.DOMAIN_ERROR, payload, e.report.to_csv())
    return CommandResult(Status.OK, {**report.summary(), "records": report.records},
                         report.to_csv())


def _cmd_ccdist(args, config) -> CommandResult:
    cfg = section(config, "ccdist")
    g = _point(args.g) if args.g else HeisenbergPoint.origin()
    res = carnot.cc_distance(g, _point(args.h), args.tol,
                             max_iter=cfg.get("max_iter"), n_samples=cfg.get("samples"))
    table = "x,y,z\n" + "".join(f"{p.x!r},{p.y!r},{p.z!r}\n" for p in res.samples)
    return CommandResult(Status.OK, {
        "length": res.length,
        "solver_residual": res.solver_residual,
        "koranyi": carnot.koranyi_norm(carnot.group_law(g.inverse(), _point(args.h))),
        "samples": [_point_dict(p) for p in res.samples],
    }, table)


def _cmd_pansu(args, config) -> CommandResult:
    if args.map == "translate":
        f = carnot.left_translation(_point(args.param or "1,1,1"))
    elif args.map == "dilate":
        f = carnot.dilation(_floats(args.param, 1)[0] if args.param else 2.0)
    else:
        f = carnot.shear
    sched = carnot.pansu_schedule(f, _point(args.g), _point(args.h), args.t0, args.halvings)
    table = "t,x,y,z\n" + "".join(f"{t!r},{p.x!r},{p.y!r},{p.z!r}\n"
                                  for t, p in zip(sched.ts, sched.quotients))
    return CommandResult(Status.OK, {
        "map": args.map,
        "ts": sched.ts,
        "quotients": [_point_dict(p) for p in sched.quotients],
        "differences": sched.differences,
        "ratios": sched.ratios,
        "richardson": _point_dict(sched.richardson),
    }, table)


def _cmd_curvature(args, config) -> CommandResult:
    step = _given(args.step, section(config, "curvature").get("step"))
    if args.q is not None:
        qs = [args.q]
    else:
        qs = np.linspace(args.qmin, args.qmax, args.steps).tolist()
    rows = curvature.curvature_table(qs, step)
    payload = {"rows": [{"q": q, "k": k, "k_numeric": kn} for q, k, kn in rows]}
    if args.q is not None:
        payload["branches"] = curvature.q_of_curvature(rows[0][1])._asdict()
        payload["reflected"] = curvature.reflected_index(args.q)
    return CommandResult(Status.OK, payload, curvature.table_to_csv(rows))


def _cmd_maxent(args, config) -> CommandResult:
    cfg = section(config, "maxent")
    problem = maxent.MaxentProblem.from_json(args.problem)
    if args.q is not None:
        problem = dataclasses.replace(problem, q=qalgebra.QParam(args.q))
    sol = maxent.solve_maxent(problem, tol=_given(args.tol, cfg.get("tol")),
                              max_iter=_given(args.max_iter, cfg.get("max_iter")))
    payload = {**sol.summary(), "weights": list(sol.distribution.weights),
               "support": list(sol.distribution.support)}
    return CommandResult(Status.OK, payload, sol.to_csv())


COMMANDS: Dict[str, Callable] = {
    "qadd": _cmd_qadd,
    "entropy": _cmd_entropy,
    "compose-check": _cmd_compose_check,
    "escort": _cmd_escort,
    "abe-check": _cmd_abe_check,
    "bgs-limit": _cmd_bgs_limit,
    "embed": _cmd_embed,
    "mul": _cmd_mul,
    "bch-check": _cmd_bch_check,
    "growth": _cmd_growth,
    "ccdist": _cmd_ccdist,
    "pansu": _cmd_pansu,
    "curvature": _cmd_curvature,
    "maxent": _cmd_maxent,
}


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--config", help="JSON file with solver settings")
    common.add_argument("--verbose", action="store_true", help="debug logging on stderr")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--summary", help="write the JSON summary here when --csv is used")
    fmt = common.add_mutually_exclusive_group()
    fmt.add_argument("--json", dest="fmt", action="store_const", const="json")
    fmt.add_argument("--csv", dest="fmt", action="store_const", const="csv")
    common.set_defaults(fmt="json")

    parser = _Parser(prog="qnilpotent",
                     description="q-deformed arithmetic, Tsallis entropy and "
                                 "Heisenberg group geometry")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True

    def add(name, help_text):
        return sub.add_parser(name, parents=[common], help=help_text)

    p = add("qadd", "generalized addition x (+)_q y")
    p.add_argument("--x", type=float, required=True)
    p.add_argument("--y", type=float, required=True)
    p.add_argument("--q", type=float, required=True)

    p = add("entropy", "Tsallis entropy of a distribution")
    p.add_argument("--dist", required=True, help="w1,w2,... or @file.csv")
    p.add_argument("--q", type=float, required=True)
    p.add_argument("--rescaled", action="store_true")

    p = add("compose-check", "composition law for independent systems")
    p.add_argument("--dist", required=True)
    p.add_argument("--dist2", required=True)
    p.add_argument("--q", type=float, required=True)

    p = add("escort", "escort distribution")
    p.add_argument("--dist", required=True)
    p.add_argument("--q", type=float, required=True)

    p = add("abe-check", "entropy via the Jackson derivative")
    p.add_argument("--dist", required=True)
    p.add_argument("--q", type=float, required=True)

    p = add("bgs-limit", "convergence of S_q to the BGS entropy")
    p.add_argument("--dist", required=True)
    p.add_argument("--jmax", type=int, default=20)

    p = add("embed", "embedding of a real into the Heisenberg group")
    p.add_argument("--x", type=float, required=True)

    p = add("mul", "product of unitriangular matrices")
    p.add_argument("--x", type=float)
    p.add_argument("--y", type=float)
    p.add_argument("--a", help="a12,a13,a23")
    p.add_argument("--b", help="a12,a13,a23")

    p = add("bch-check", "bracket table and BCH identity")
    p.add_argument("--u", help="cx,cy,cz")
    p.add_argument("--v", help="cx,cy,cz")
    p.add_argument("--samples", type=int, default=1000)

    p = add("growth", "ball growth of a Cayley graph")
    p.add_argument("--group", choices=sorted(carnot.GROUPS), default="heisenberg")
    p.add_argument("--rmax", type=int, required=True)
    p.add_argument("--jobs", type=int)

    p = add("ccdist", "Carnot-Caratheodory distance")
    p.add_argument("--g", help="x,y,z (default origin)")
    p.add_argument("--h", required=True, help="x,y,z")
    p.add_argument("--tol", type=float, default=1e-10)

    p = add("pansu", "Pansu difference quotients on a halving schedule")
    p.add_argument("--map", choices=["translate", "dilate", "shear"], default="shear")
    p.add_argument("--param", help="translation x,y,z or dilation factor")
    p.add_argument("--g", default="0,0,0")
    p.add_argument("--h", default="0,1,0")
    p.add_argument("--t0", type=float, default=1.0)
    p.add_argument("--halvings", type=int, default=10)

    p = add("curvature", "curvature of the entropic index")
    p.add_argument("--q", type=float)
    p.add_argument("--qmin", type=float, default=-5.0)
    p.add_argument("--qmax", type=float, default=1.9)
    p.add_argument("--steps", type=int, default=20)
    p.add_argument("--step", type=float, help="finite difference step")

    p = add("maxent", "escort-constrained Tsallis maximum entropy")
    p.add_argument("--problem", required=True, help="JSON problem document")
    p.add_argument("--q", type=float, help="override the problem's q")
    p.add_argument("--tol", type=float)
    p.add_argument("--max-iter", type=int)
    return parser


def _set_verbose():
    if hasattr(LOG, "set_level"):
        LOG.set_level("DEBUG")
    else:
        LOG.setLevel("DEBUG")


def run(argv: Sequence[str]) -> CommandResult:
    """Parse ``argv`` and dispatch; never raises for anticipated failures."""
    try:
        args = build_parser().parse_args(list(argv))
        if args.verbose:
            _set_verbose()
        try:
            config = load_config(args.config)
        except DomainError as e:
            raise UsageError(str(e)) from e
        result = COMMANDS[args.command](args, config)
        result.fmt = args.fmt
        result.summary_path = args.summary
        return result
    except UsageError as e:
        return CommandResult(Status.USAGE_ERROR, {"error": str(e)})
    except DomainError as e:
        return CommandResult(Status.DOMAIN_ERROR, {"error": str(e)})
    except ConvergenceFailure as e:
        return CommandResult(Status.CONVERGENCE_FAILURE,
                             {"error": str(e), "residual": e.residual,
                              "iterations": e.iterations})
    except ResourceLimit as e:
        return CommandResult(Status.RESOURCE_LIMIT, {"error": str(e), "budget": e.budget})
    except (OSError, QNilpotentError) as e:
        LOG.error(f"command failed: {e}")
        return CommandResult(Status.USAGE_ERROR, {"error": str(e)})


def main(argv: Optional[Sequence[str]] = None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    try:
        result = run(argv)
    except SystemExit as e:
        # --help and --version
        return int(e.code or 0)
    if result.fmt == "csv" and result.table is not None:
        sys.stdout.write(result.table)
        if result.summary_path:
            with open(result.summary_path, "w") as f:
                f.write(dumps(result.payload) + "\n")
    else:
        sys.stdout.write(dumps(result.payload) + "\n")
    if result.status != Status.OK:
        LOG.error(f"{result.status.value}: {result.payload.get('error')}")
    return result.exit_code


if __name__ == "__main__":
    sys.exit(main())
