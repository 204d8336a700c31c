"""Command line: ``sirdelay {scenarios,analyze,simulate,sweep}``.

Exit codes: 0 success, 2 invalid config or flags, 3 numerical failure,
4 analysis non-convergence (the report is still written).
"""

from __future__ import annotations

import argparse
import os
import sys

from ..errors import (AnalysisError, ConfigurationError, DomainError, NumericalBlowup,
                      ScenarioError)
from .builtins import DELAY_PRESETS, builtin_names, get_builtin
from .runs import SWEEP_AXES, SweepSpec, plot_script, run_analyze, run_simulate, run_sweep, sweep_csv
from .scenario import load_scenario_file

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_NONCONVERGENCE = 0, 2, 3, 4


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_CONFIG)


def _add_source(p):
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--scenario", help="built-in scenario name")
    src.add_argument("--config", help="path to a TOML scenario file")
    p.add_argument("--compat", action="store_true",
                   help="disease-free state without vaccination (x* = a/d)")
    p.add_argument("--strict-paper", action="store_true",
                   help="stability conditions exactly as stated instead of as derived")


def _add_overrides(p):
    p.add_argument("--eta", type=float)
    p.add_argument("--tau", type=float)
    p.add_argument("--delta", type=float)
    p.add_argument("--r", type=float, help="treatment rate")
    p.add_argument("--c", type=float, help="vaccination rate")
    p.add_argument("--t-end", type=float)
    p.add_argument("--preset", type=int, help="figure delay preset index (built-ins only)")
    p.add_argument("--output-step", type=float, default=1.0, help="CSV sample spacing in days")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="sirdelay", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    sub.add_parser("scenarios", help="list built-in scenarios")

    an = sub.add_parser("analyze", help="JSON stability report")
    _add_source(an)
    _add_overrides(an)
    an.add_argument("--out", help="write the report here instead of stdout")

    sim = sub.add_parser("simulate", help="trajectory CSV")
    _add_source(sim)
    _add_overrides(sim)
    sim.add_argument("--out", help="CSV path (stdout if omitted)")
    sim.add_argument("--plot", action="store_true", help="also write a gnuplot script next to --out")

    sw = sub.add_parser("sweep", help="summary CSV over one parameter")
    _add_source(sw)
    _add_overrides(sw)
    sw.add_argument("--axis", required=True, choices=SWEEP_AXES)
    sw.add_argument("--grid", required=True, help="comma-separated values")
    sw.add_argument("--workers", type=int, default=1)
    sw.add_argument("--out")
    return parser


def _scenario(args):
    if args.scenario is not None:
        sc = get_builtin(args.scenario)
    else:
        sc = load_scenario_file(args.config)
    top = {}
    if args.compat:
        top["dfe_mode"] = "paper_compat"
    if args.strict_paper:
        top["theorem_mode"] = "strict_paper"
    if args.preset is not None:
        presets = DELAY_PRESETS.get(sc.name) if args.scenario else None
        if not presets or not 0 <= args.preset < len(presets):
            raise ScenarioError("preset index needs a built-in scenario and a valid index",
                                "preset")
        top.update(zip(("eta", "tau", "delta"), presets[args.preset]))
    for key in ("eta", "tau", "delta", "r", "c", "t_end"):
        value = getattr(args, key)
        if value is not None:
            top[key] = value
    return sc.with_overrides(**top) if top else sc


def _emit(text, path):
    if path:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _grid(text):
    try:
        return tuple(float(v) for v in text.split(",") if v.strip())
    except ValueError:
        raise ScenarioError(f"bad grid {text!r}", "grid") from None


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        if args.command == "scenarios":
            for name in builtin_names():
                print(name)
            return EXIT_OK
        sc = _scenario(args)
        if args.command == "analyze":
            text, complete = run_analyze(sc)
            _emit(text, args.out)
            if not complete:
                print("analysis did not converge; failing sections are marked in the report",
                      file=sys.stderr)
                return EXIT_NONCONVERGENCE
            return EXIT_OK
        if args.command == "simulate":
            if args.plot and not args.out:
                raise ScenarioError("--plot needs --out", "plot")
            _emit(run_simulate(sc, output_step=args.output_step), args.out)
            if args.plot:
                stem = os.path.splitext(args.out)[0]
                _emit(plot_script(os.path.basename(args.out), sc.name), stem + ".gp")
            return EXIT_OK
        if args.command == "sweep":
            spec = SweepSpec(args.axis, _grid(args.grid))
            rows = run_sweep(sc, spec, workers=max(1, args.workers), output_step=args.output_step)
            _emit(sweep_csv(rows), args.out)
            if any(r.error for r in rows):
                for r in rows:
                    if r.error:
                        print(f"sweep value {r.value}: {r.error}", file=sys.stderr)
                return EXIT_NUMERIC
            return EXIT_OK
    except NumericalBlowup as exc:
        print(f"numerical failure at t = {exc.time}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except AnalysisError as exc:
        print(f"analysis failed: {exc}", file=sys.stderr)
        return EXIT_NONCONVERGENCE
    except (ScenarioError, ConfigurationError, DomainError, OSError) as exc:
        print(f"invalid input: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
