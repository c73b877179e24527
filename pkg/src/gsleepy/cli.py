"""Command-line entry point: ``gsleepy {gen,run,opt,stress,analyze,conditions,plotdata}``.

Exit codes: 0 success, 2 unreadable or malformed input, 3 semantic errors
(invalid instance, mismatched trace, out-of-range parameters).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from fractions import Fraction
from pathlib import Path

from . import conditions, instances, metrics, policies
from .core import (
    InvalidArgument,
    InvalidInstance,
    dumps,
    instance_from_dict,
    instance_to_dict,
    trace_from_dict,
    trace_to_dict,
    validate_instance,
)
from .engine import simulate
from .opt import DEFAULT_NODE_BUDGET, exact_opt
from .stress import run_stress

EXIT_PARSE = 2
EXIT_SEMANTIC = 3


class CliError(Exception):
    def __init__(self, code: int, message: str):
        super().__init__(message)
        self.code = code


def _read_json(path: str) -> dict:
    try:
        text = Path(path).read_text()
        data = json.loads(text)
    except (OSError, json.JSONDecodeError) as exc:
        raise CliError(EXIT_PARSE, f"cannot parse {path}: {exc}") from exc
    if not isinstance(data, dict):
        raise CliError(EXIT_PARSE, f"cannot parse {path}: expected a JSON object")
    return data


def _load_instance(path: str):
    try:
        inst = instance_from_dict(_read_json(path))
    except ValueError as exc:
        raise CliError(EXIT_PARSE, str(exc)) from exc
    problems = validate_instance(inst)
    if not inst.jobs:
        problems.append("instance has no jobs")
    if problems:
        raise CliError(EXIT_SEMANTIC, "invalid instance: " + "; ".join(problems))
    return inst


def _load_trace(path: str, instance=None):
    data = _read_json(path)
    try:
        return trace_from_dict(data, instance)
    except InvalidArgument as exc:
        raise CliError(EXIT_SEMANTIC, str(exc)) from exc
    except ValueError as exc:
        raise CliError(EXIT_PARSE, str(exc)) from exc


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _fmt(x: float) -> str:
    return f"{x:.10g}"


def _parse_range(text: str) -> tuple[Fraction, Fraction, Fraction]:
    parts = text.split(":")
    if len(parts) != 3:
        raise CliError(EXIT_PARSE, f"malformed range {text!r}; expected lo:hi:step")
    lo, hi, step = (_rational(p) for p in parts)
    if step <= 0 or hi < lo:
        raise CliError(EXIT_PARSE, f"malformed range {text!r}; need lo <= hi and step > 0")
    return lo, hi, step


def _rational(text: str):
    try:
        return conditions.parse_rational(text)
    except InvalidArgument as exc:
        raise CliError(EXIT_PARSE, str(exc)) from exc


def _range_points(text: str) -> list[Fraction]:
    lo, hi, step = _parse_range(text)
    steps = int((hi - lo) / step)
    return [lo + step * i for i in range(steps + 1)]


# -- subcommands -------------------------------------------------------------

def cmd_gen(args) -> int:
    if args.family == "one-one-two":
        inst = instances.gen_one_one_two(args.m, args.eps)
    elif args.family == "case1":
        inst = instances.gen_case1(args.m)
    elif args.family == "case2":
        inst = instances.gen_case2(args.m, args.alpha if args.alpha is not None else 0.1, args.eps)
    else:
        dist = tuple(args.dist.split(","))
        kind, params = dist[0], tuple(float(x) for x in dist[1:])
        spec = instances.RandomSpec(args.seed, args.n, args.m, args.span, (kind, *params), args.grid)
        inst = instances.gen_random(spec)
    _emit(dumps(instance_to_dict(inst)), args.out)
    return 0


def _policy(args, m: int):
    return policies.by_name(args.policy, m, args.alpha, getattr(args, "lam", None))


def cmd_run(args) -> int:
    inst = _load_instance(args.instance)
    params = _policy(args, inst.m)
    trace = simulate(inst, params)
    if args.out:
        Path(args.out).write_text(dumps(trace_to_dict(trace)))
    print(f"makespan={_fmt(trace.makespan)} policy={args.policy} alpha={_fmt(params.alpha)} lambda={_fmt(params.lam)}")
    return 0


def cmd_opt(args) -> int:
    inst = _load_instance(args.instance)
    res = exact_opt(inst, args.node_budget)
    if args.out and res.trace is not None:
        Path(args.out).write_text(dumps(trace_to_dict(res.trace)))
    kind = "exact" if res.exact else "lower_bound"
    print(f"opt={_fmt(res.value)} kind={kind} nodes={res.nodes_explored}")
    return 0


def cmd_stress(args) -> int:
    names = args.policies.split(",")
    overrides = {}
    if args.alpha is not None or args.lam is not None:
        overrides = {name: policies.by_name(name, args.m, args.alpha, args.lam) for name in names}
    report = run_stress(
        names, args.m, args.n, args.trials, args.seed, args.node_budget,
        args.lower_bound_only, args.workers, args.hard, overrides,
    )
    if args.out:
        Path(args.out).write_text(report.to_csv())
    print(json.dumps(report.summary(), indent=2, sort_keys=True))
    return 0


def cmd_analyze(args) -> int:
    inst = _load_instance(args.instance) if args.instance else None
    trace = _load_trace(args.trace, inst)
    profile = metrics.Profile(trace)
    chain = metrics.extract_chain(trace, args.gamma)
    full = metrics.interval_report(trace, 0.0, trace.makespan, profile)
    wb = metrics.check_waste_bound_all(trace)
    out = {
        "makespan": trace.makespan,
        "chain": chain.to_dict(),
        "chain_links_ok": metrics.chain_links_ok(trace, chain),
        "interval": vars(full),
        "waste_bound": vars(wb),
        "idle_violations": metrics.idle_violations(trace, profile),
    }
    if args.opt_trace:
        opt = _load_trace(args.opt_trace, trace.instance)
        out["leftover"] = vars(metrics.check_leftover(trace, opt))
        out["diagnosis"] = vars(metrics.diagnose_counterexample(trace, opt.makespan, chain.gamma))
    _emit(json.dumps(out, indent=2) + "\n", args.out)
    return 0


def _rows_to_text(header: list[str], rows: list[list]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue()


def _m3_scan_text(alpha_range: str, gamma_range: str) -> str:
    rows = conditions.scan_m3_region(_range_points(alpha_range), _range_points(gamma_range))
    header = ["alpha", "gamma", *conditions.M3_IDS, "all_pass"]
    body = [[float(r[0]), float(r[1]), *(int(b) for b in r[2:])] for r in rows]
    return _rows_to_text(header, body)


def cmd_conditions(args) -> int:
    if args.scan:
        _emit(_m3_scan_text(args.alpha_range, args.gamma_range), args.out)
        return 0
    m = args.m
    rec = conditions.recommended_params(m)
    if m == 3:
        alpha = _rational(args.alpha) if args.alpha else rec.alpha
        gamma = _rational(args.gamma) if args.gamma else rec.feasibility_gamma
        report = conditions.check_m3(alpha, gamma)
    elif rec.mode == "general":
        alpha = _rational(args.alpha) if args.alpha else rec.alpha
        gamma = _rational(args.gamma) if args.gamma else rec.gamma
        report = conditions.check_general(conditions.Params(m, alpha, gamma))
    else:
        raise CliError(EXIT_SEMANTIC, f"no condition list applies to m={m}")
    rows = [[c.id, c.relation, str(c.margin), float(c.margin) if c.margin is not None else "", int(c.satisfied)]
            for c in report.conditions]
    _emit(_rows_to_text(["id", "relation", "margin_exact", "margin", "satisfied"], rows), args.out)
    failed = report.failed()
    print(f"m={m} alpha={alpha} gamma={gamma} failed={','.join(failed) or 'none'}", file=sys.stderr)
    return 0


def cmd_plotdata(args) -> int:
    if args.scan_m3:
        _emit(_m3_scan_text(args.alpha_range, args.gamma_range), args.out)
        return 0
    if args.curve != "f_case2":
        raise CliError(EXIT_PARSE, f"unknown curve {args.curve!r}")
    marker = 1 / (2 * (args.m - 1))
    rows = [[float(a), instances.f_case2(float(a)), 1.5, marker] for a in _range_points(args.range)]
    _emit(_rows_to_text(["alpha", "f", "reference", "alpha_marker"], rows), args.out)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="gsleepy", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="write an instance file")
    p.add_argument("family", choices=["one-one-two", "case1", "case2", "random"])
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--eps", type=float, default=instances.DEFAULT_EPS)
    p.add_argument("--alpha", type=float)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--n", type=int, default=8)
    p.add_argument("--span", type=float, default=1.0)
    p.add_argument("--dist", default="uniform,0.1,1.0", help="uniform,lo,hi | geometric,ratio,levels | two-class,small,large,fraction")
    p.add_argument("--grid", type=float)
    p.add_argument("--out")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("run", help="simulate a policy on an instance file")
    p.add_argument("instance")
    p.add_argument("--policy", choices=policies.POLICY_NAMES, default="gsleepy-dynamic")
    p.add_argument("--alpha", type=float)
    p.add_argument("--lambda", dest="lam", type=float)
    p.add_argument("--out")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("opt", help="solve the offline optimum")
    p.add_argument("instance")
    p.add_argument("--node-budget", type=int, default=DEFAULT_NODE_BUDGET)
    p.add_argument("--out")
    p.set_defaults(func=cmd_opt)

    p = sub.add_parser("stress", help="empirical ratios against the exact optimum")
    p.add_argument("--policies", default="lpt,gsleepy-static,gsleepy-dynamic")
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--n", type=int, default=8, help="maximum job count of random instances")
    p.add_argument("--trials", type=int, default=1000)
    p.add_argument("--hard", type=int, help="hard-family instances added to the pool")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--node-budget", type=int, default=DEFAULT_NODE_BUDGET)
    p.add_argument("--lower-bound-only", action="store_true")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--alpha", type=float)
    p.add_argument("--lambda", dest="lam", type=float)
    p.add_argument("--out", help="per-trial CSV log")
    p.set_defaults(func=cmd_stress)

    p = sub.add_parser("analyze", help="locking chain and efficiency report for a trace")
    p.add_argument("trace")
    p.add_argument("--instance", help="instance file, required if the trace does not embed one")
    p.add_argument("--opt-trace")
    p.add_argument("--gamma", type=float)
    p.add_argument("--out")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("conditions", help="check the parameter conditions exactly")
    p.add_argument("--m", type=int, default=4)
    p.add_argument("--alpha", help="rational, e.g. 1/64 or 0.07066")
    p.add_argument("--gamma")
    p.add_argument("--scan", action="store_true", help="scan the m=3 region instead")
    p.add_argument("--alpha-range", default="0:0.1:0.005")
    p.add_argument("--gamma-range", default="0.4:0.5:0.005")
    p.add_argument("--out")
    p.set_defaults(func=cmd_conditions)

    p = sub.add_parser("plotdata", help="delimited data for the hard-instance curve or the m=3 region")
    p.add_argument("--curve", default="f_case2")
    p.add_argument("--range", default="0:0.1:1e-4")
    p.add_argument("--m", type=int, default=6)
    p.add_argument("--scan-m3", action="store_true")
    p.add_argument("--alpha-range", default="0:0.1:0.005")
    p.add_argument("--gamma-range", default="0.4:0.5:0.005")
    p.add_argument("--out")
    p.set_defaults(func=cmd_plotdata)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except (InvalidArgument, InvalidInstance) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SEMANTIC


if __name__ == "__main__":
    sys.exit(main())
