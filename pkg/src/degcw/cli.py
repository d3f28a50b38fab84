"""Command line entry point: ``degcw verify <suite>`` and ``degcw scenario ...``.

Machine report schema, one tab separated record per line::

    check <suite> <id> <PASS|FAIL> residual=<r> lhs=<x> rhs=<y> tol=<t> ref=<text>
    summary <suite> <n_pass>/<n_total> <PASS|FAIL>

Fields that do not apply are written as ``-``. Wall times only appear in the
human format (or with ``--timings``) so machine reports are byte-stable.
"""
from __future__ import annotations

import argparse
import configparser
import sys

from .exprgeom.dsl import DSLError
from .exprgeom.scenario import (CATALOG, ScenarioError, catalog_text, load_scenario_file,
                                validate_scenario)
from .suites import SUITE_FUNCS, SUITES, Settings, run_suite


class UsageError(Exception):
    pass


def _fmt(x):
    if x is None:
        return "-"
    if isinstance(x, float):
        return repr(x)
    return str(x).replace("\t", " ")


def format_report(suite, checks, fmt="human", timings=False):
    lines = []
    n_ok = sum(c.passed for c in checks)
    ok = n_ok == len(checks)
    if fmt == "machine":
        for c in checks:
            rec = ["check", suite, c.ident, "PASS" if c.passed else "FAIL",
                   f"residual={_fmt(c.residual)}", f"lhs={_fmt(c.lhs)}", f"rhs={_fmt(c.rhs)}",
                   f"tol={_fmt(c.tolerance)}", f"ref={c.ref}"]
            if timings:
                rec.append(f"wall={c.wall:.3f}")
            lines.append("\t".join(rec))
        lines.append("\t".join(["summary", suite, f"{n_ok}/{len(checks)}", "PASS" if ok else "FAIL"]))
    else:
        width = max((len(c.ident) for c in checks), default=10)
        for c in checks:
            val = f"{_fmt(c.lhs)} vs {_fmt(c.rhs)}" if c.lhs is not None else f"residual {c.residual:.3e}"
            lines.append(f"{'PASS' if c.passed else 'FAIL'}  {c.ident:<{width}}  {val}  "
                         f"(tol {c.tolerance:g}, {c.wall:.2f}s)  {c.ref}")
        lines.append(f"{suite}: {n_ok}/{len(checks)} checks passed")
    return "\n".join(lines)


def _load_config(path, settings: Settings):
    cp = configparser.ConfigParser(inline_comment_prefixes=("#",))
    try:
        with open(path, encoding="utf-8") as fh:
            cp.read_file(fh)
    except OSError as exc:
        raise UsageError(f"cannot read config {path}: {exc}") from exc
    if "verify" in cp:
        sec = cp["verify"]
        for key, conv in (("seed", int), ("quad_order", int), ("tolerance_scale", float), ("n_points", int)):
            if key in sec:
                setattr(settings, key, conv(sec[key]))
    if "scenarios" in cp:
        for name, file in cp["scenarios"].items():
            if name not in CATALOG:
                raise UsageError(f"config overrides unknown scenario {name!r}")
            settings.scenarios[name] = load_scenario_file(file)


def build_parser():
    p = argparse.ArgumentParser(prog="degcw", description="Degenerate Chern-Weil verification engine")
    sub = p.add_subparsers(dest="command", required=True)
    v = sub.add_parser("verify", help="run a verification suite")
    v.add_argument("suite", help="|".join(SUITES + ("all",)))
    v.add_argument("--seed", type=int, default=None)
    v.add_argument("--quad-order", type=int, default=None)
    v.add_argument("--tolerance-scale", type=float, default=None)
    v.add_argument("--format", choices=("human", "machine"), default="human")
    v.add_argument("--timings", action="store_true", help="include wall times in machine output")
    v.add_argument("--config", help="INI file with [verify] defaults and [scenarios] overrides")
    s = sub.add_parser("scenario", help="inspect the scenario catalog")
    ssub = s.add_subparsers(dest="action", required=True)
    ssub.add_parser("list")
    d = ssub.add_parser("dump")
    d.add_argument("name")
    c = ssub.add_parser("check", help="parse and validate a scenario file")
    c.add_argument("path")
    return p


def _verify(args, out):
    if args.suite != "all" and args.suite not in SUITE_FUNCS:
        raise UsageError(f"unknown suite {args.suite!r}; choose from {', '.join(SUITES + ('all',))}")
    st = Settings()
    if args.config:
        _load_config(args.config, st)
    if args.seed is not None:
        st.seed = args.seed
    if args.quad_order is not None:
        st.quad_order = args.quad_order
    if args.tolerance_scale is not None:
        st.tolerance_scale = args.tolerance_scale
    names = SUITES if args.suite == "all" else (args.suite,)
    ok = True
    for name in names:
        checks = run_suite(name, st)
        ok = ok and all(c.passed for c in checks)
        print(format_report(name, checks, args.format, args.timings), file=out)
    return 0 if ok else 1


def _scenario(args, out):
    if args.action == "list":
        for name in CATALOG:
            print(name, file=out)
        return 0
    if args.action == "dump":
        try:
            print(catalog_text(args.name), end="", file=out)
        except ScenarioError as exc:
            raise UsageError(str(exc)) from exc
        return 0
    try:
        sc = load_scenario_file(args.path)
    except OSError as exc:
        raise UsageError(str(exc)) from exc
    for key, val in validate_scenario(sc).items():
        print(f"{key}\t{val!r}", file=out)
    return 0


def main(argv=None, out=None):
    out = out or sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code else 0
    try:
        if args.command == "verify":
            return _verify(args, out)
        return _scenario(args, out)
    except (UsageError, ScenarioError, DSLError) as exc:
        print(f"degcw: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
