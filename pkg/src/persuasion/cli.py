"""Command-line front end.

    persuasion solve private-exact INSTANCE [--method enum|colgen]
    persuasion solve private-submodular INSTANCE --epsilon E [--K K] [--seed S]
    persuasion solve oblivious INSTANCE
    persuasion solve public-exact INSTANCE
    persuasion evaluate INSTANCE SCHEME [--mc TRIALS] [--seed S]
    persuasion gen gap-example --n N
    persuasion gen prop2 --n N [--seed S]
    persuasion bench compare INSTANCE

INSTANCE may be ``-`` for stdin.  Reports go to stdout; ``-o`` writes the
scheme (or generated instance) to a file.  Exit codes: 0 ok, 2 invalid
input, 3 instance too large, 4 unsupported objective, 5 solver stalled.
"""
from __future__ import annotations

import argparse
import json
import math
import sys

import numpy as np

from . import __version__
from .errors import InvalidInstanceError, PersuasionError
from .evaluate import check_persuasive, evaluate
from .instance import load_instance
from .oblivious import gen_oblivious_lowerbound, independent_value_exact, oblivious_marginals
from .private_exact import solve_private_column_generation, solve_private_enumeration
from .public_exact import PUBLIC_MAX_N, gen_gap_example, solve_public_enumeration
from .schemes import load_scheme, scheme_to_json
from .submodular import K_CAP, solve_private_submodular

ENUM_LIMIT = 12


def fmt(v) -> str:
    if v is None:
        return "n/a"
    if isinstance(v, (bool, np.bool_)):
        return "yes" if v else "no"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        if not math.isfinite(v):
            return "inf" if v > 0 else ("-inf" if v < 0 else "nan")
        s = f"{float(v):.6f}"
        return "0.000000" if s == "-0.000000" else s
    return str(v)


def _json_value(v, indent, level):
    pad = " " * (indent * (level + 1))
    end = " " * (indent * level)
    if isinstance(v, dict):
        if not v:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {_json_value(x, indent, level + 1)}" for k, x in v.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(v, (list, tuple, np.ndarray)):
        v = list(v)
        if not v:
            return "[]"
        if all(not isinstance(x, (dict, list, tuple, np.ndarray)) for x in v):
            return "[" + ", ".join(_json_value(x, indent, level) for x in v) + "]"
        return "[\n" + ",\n".join(pad + _json_value(x, indent, level + 1) for x in v) + "\n" + end + "]"
    if v is None:
        return "null"
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return fmt(v) if math.isfinite(v) else json.dumps(fmt(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return json.dumps(v)


def dumps_report(report: dict) -> str:
    """JSON with every float printed to 6 decimals (stable across runs)."""
    return _json_value(report, 2, 0) + "\n"


def render_table(report: dict) -> str:
    head = f"# persuasion {report['version']}  command: {report['command']}"
    if report.get("seed") is not None:
        head += f"  seed: {report['seed']}"
    lines = [head]
    for key, v in report.items():
        if key in ("version", "command", "seed", "tool", "rows", "columns"):
            continue
        if isinstance(v, (list, tuple, np.ndarray)) and not isinstance(v, str):
            v = " ".join(fmt(x) for x in v)
        else:
            v = fmt(v)
        lines.append(f"{key:<22} {v}")
    if "rows" in report:
        cols = report["columns"]
        widths = [max(len(c), *(len(fmt(r[c])) for r in report["rows"])) for c in cols]
        lines.append("  ".join(c.ljust(w) for c, w in zip(cols, widths)))
        for r in report["rows"]:
            lines.append("  ".join(fmt(r[c]).ljust(w) for c, w in zip(cols, widths)))
    return "\n".join(line.rstrip() for line in lines) + "\n"


def _read(path):
    if path == "-":
        return sys.stdin.read()
    try:
        with open(path) as fh:
            return fh.read()
    except OSError as exc:
        raise InvalidInstanceError(f"cannot read {path}: {exc.strerror}") from exc


def _write(path, text):
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(path, "w") as fh:
            fh.write(text)


def _base(command, seed=None):
    return {"tool": "persuasion", "version": __version__, "command": command, "seed": seed}


def _scheme_report(report, inst, scheme, value):
    rep = check_persuasive(inst, scheme)
    report.update({
        "n": inst.n,
        "states": len(inst.states),
        "scheme_type": scheme.kind,
        "value": float(value),
        "persuasive": rep.persuasive,
        "min_action1_slack": float(rep.action1_slack.min()) if inst.n else 0.0,
        "action1_slack": rep.action1_slack.tolist(),
        "action0_slack": rep.action0_slack.tolist(),
    })
    if hasattr(scheme, "support_size"):
        report["support_size"] = scheme.support_size()
    return report


def _emit(args, report, scheme=None, value=None):
    if scheme is not None and args.output:
        _write(args.output, scheme_to_json(scheme, value))
    if args.format == "json":
        if scheme is not None and not args.output:
            report["scheme"] = scheme.to_dict()
        sys.stdout.write(dumps_report(report))
    else:
        sys.stdout.write(render_table(report))


def cmd_private_exact(args):
    inst = load_instance(_read(args.instance))
    method = args.method or ("enum" if inst.n <= ENUM_LIMIT else "colgen")
    report = _base("solve private-exact")
    if method == "enum":
        scheme, value = solve_private_enumeration(inst, dump_lp=args.dump_lp)
    else:
        scheme, value, res = solve_private_column_generation(inst, dump_lp=args.dump_lp, return_details=True)
        report["colgen_rounds"] = res.rounds
    report["method"] = method
    _emit(args, _scheme_report(report, inst, scheme, value), scheme, value)


def cmd_private_submodular(args):
    inst = load_instance(_read(args.instance))
    scheme, choice = solve_private_submodular(inst, args.epsilon, args.K, args.seed, cap=args.cap)
    report = _base("solve private-submodular", args.seed)
    report.update({"epsilon": float(args.epsilon), "K": choice.effective, "K_formula": choice.formula,
                   "K_cap": choice.cap, "K_capped": choice.capped and args.K is None})
    rep = evaluate(inst, scheme, mc_trials=args.mc, seed=args.seed)
    _scheme_report(report, inst, scheme, rep.utility)
    report["value_exact"] = rep.utility_exact
    if not rep.utility_exact:
        report["value_ci_half_width"] = rep.utility_half_width
    _emit(args, report, scheme, rep.utility)


def cmd_oblivious(args):
    inst = load_instance(_read(args.instance))
    scheme = oblivious_marginals(inst)
    v = independent_value_exact(inst, scheme, seed=args.seed)
    report = _base("solve oblivious", None if v.exact else args.seed)
    _scheme_report(report, inst, scheme, v)
    report["value_exact"] = v.exact
    if not v.exact:
        report["value_ci_half_width"] = v.half_width
    _emit(args, report, scheme, float(v))


def cmd_public_exact(args):
    inst = load_instance(_read(args.instance))
    scheme, value = solve_public_enumeration(inst, dump_lp=args.dump_lp)
    report = _base("solve public-exact")
    _emit(args, _scheme_report(report, inst, scheme, value), scheme, value)


def cmd_evaluate(args):
    inst = load_instance(_read(args.instance))
    scheme = load_scheme(_read(args.scheme))
    problems = scheme.problems()
    if problems:
        raise InvalidInstanceError("scheme is not a valid distribution", problems)
    rep = evaluate(inst, scheme, mc_trials=args.mc, seed=args.seed)
    report = _base("evaluate", args.seed if args.mc else None)
    report.update({
        "n": inst.n,
        "states": len(inst.states),
        "scheme_type": scheme.kind,
        "value": rep.utility,
        "value_exact": rep.utility_exact,
    })
    if not rep.utility_exact:
        report["value_ci_half_width"] = rep.utility_half_width
        report["mc_trials"] = args.mc or 10**5
    report.update({
        "persuasive": rep.persuasive,
        "action1_slack": rep.action1_slack.tolist(),
        "action0_slack": rep.action0_slack.tolist(),
        "violations": len(rep.violations),
    })
    _emit(args, report)
    for v in rep.violations:
        print(f"violation: {v}", file=sys.stderr)


def cmd_gen(args):
    if args.family == "gap-example":
        inst = gen_gap_example(args.n)
    else:
        inst = gen_oblivious_lowerbound(args.n, seed=args.seed)
    _write(args.output, inst.to_json())


def _try(fn):
    try:
        return fn()
    except PersuasionError as exc:
        return exc


def cmd_bench(args):
    inst = load_instance(_read(args.instance))
    report = _base("bench compare", args.seed)
    report.update({"n": inst.n, "states": len(inst.states)})

    def private():
        if inst.n <= ENUM_LIMIT:
            return solve_private_enumeration(inst)[1]
        return solve_private_column_generation(inst)[1]

    def submod():
        scheme, _ = solve_private_submodular(inst, args.epsilon, args.K, args.seed)
        return evaluate(inst, scheme, seed=args.seed).utility

    def obliv():
        s = oblivious_marginals(inst)
        return float(independent_value_exact(inst, s, seed=args.seed))

    def public():
        if inst.n > PUBLIC_MAX_N:
            return None
        return solve_public_enumeration(inst)[1]

    results = [("private-exact", _try(private)), ("private-submodular", _try(submod)),
               ("oblivious", _try(obliv)), ("public-exact", _try(public))]
    best = results[0][1] if isinstance(results[0][1], float) else None
    rows = []
    for name, v in results:
        row = {"solver": name, "value": None, "ratio": None, "note": ""}
        if isinstance(v, Exception):
            row["note"] = type(v).__name__
        elif v is not None:
            row["value"] = float(v)
            if best:
                row["ratio"] = float(v) / best
        rows.append(row)
    report["columns"] = ["solver", "value", "ratio", "note"]
    report["rows"] = rows
    _emit(args, report)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("table", "json"), default="table")
    common.add_argument("-o", "--output", help="write the scheme / instance here")

    p = argparse.ArgumentParser(prog="persuasion", description="Multi-receiver persuasion solvers.")
    p.add_argument("--version", action="version", version=f"persuasion {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    solve = sub.add_parser("solve", help="compute a signaling scheme").add_subparsers(dest="solver", required=True)
    s = solve.add_parser("private-exact", parents=[common])
    s.add_argument("instance", nargs="?", default="-")
    s.add_argument("--method", choices=("enum", "colgen"))
    s.add_argument("--dump-lp", help="write the final LP in CPLEX LP format")
    s.set_defaults(func=cmd_private_exact)

    s = solve.add_parser("private-submodular", parents=[common])
    s.add_argument("instance", nargs="?", default="-")
    s.add_argument("--epsilon", type=float, required=True)
    s.add_argument("--K", type=int)
    s.add_argument("--cap", type=int, default=K_CAP)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--mc", type=int, help="report a Monte Carlo value with this many trials")
    s.set_defaults(func=cmd_private_submodular)

    s = solve.add_parser("oblivious", parents=[common])
    s.add_argument("instance", nargs="?", default="-")
    s.add_argument("--seed", type=int, default=0)
    s.set_defaults(func=cmd_oblivious)

    s = solve.add_parser("public-exact", parents=[common])
    s.add_argument("instance", nargs="?", default="-")
    s.add_argument("--dump-lp")
    s.set_defaults(func=cmd_public_exact)

    e = sub.add_parser("evaluate", parents=[common], help="check and score a scheme")
    e.add_argument("instance")
    e.add_argument("scheme")
    e.add_argument("--mc", type=int)
    e.add_argument("--seed", type=int, default=0)
    e.set_defaults(func=cmd_evaluate)

    gen = sub.add_parser("gen", help="generate instances").add_subparsers(dest="family", required=True)
    g = gen.add_parser("gap-example", parents=[common])
    g.add_argument("--n", type=int, required=True)
    g.set_defaults(func=cmd_gen)
    g = gen.add_parser("prop2", parents=[common], aliases=["lower-bound"])
    g.add_argument("--n", type=int, required=True)
    g.add_argument("--seed", type=int, default=0)
    g.set_defaults(func=cmd_gen)

    bench = sub.add_parser("bench").add_subparsers(dest="what", required=True)
    b = bench.add_parser("compare", parents=[common])
    b.add_argument("instance", nargs="?", default="-")
    b.add_argument("--epsilon", type=float, default=0.1)
    b.add_argument("--K", type=int, default=4)
    b.add_argument("--seed", type=int, default=0)
    b.set_defaults(func=cmd_bench)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        args.func(args)
    except PersuasionError as exc:
        print(f"error: {exc}", file=sys.stderr)
        for v in getattr(exc, "violations", ()):
            print(f"  {v}", file=sys.stderr)
        return exc.exit_code
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
