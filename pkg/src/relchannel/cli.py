"""Command-line entry point: ``relchannel {run,sweep,validate,selftest}``."""

from __future__ import annotations

import argparse
import contextlib
import sys

from .field import Route
from .quadrature import QuadratureBudgetError
from .scenario import (
    ScenarioError,
    csv_header,
    csv_line,
    load_scenario,
    parse_values,
    report_table,
    report_yaml,
    run_scenario,
    set_parameter,
    sweep,
    with_overrides,
)

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_VALIDATION = 2
EXIT_BUDGET = 3
EXIT_AUDIT = 4


def _positive_float(text: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not value > 0:
        raise argparse.ArgumentTypeError(f"must be > 0, got {text}")
    return value


def _non_negative_int(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if value < 0:
        raise argparse.ArgumentTypeError(f"must be >= 0, got {text}")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="relchannel",
        description="Detector channel capacity and second-law coupling bound in Minkowski space.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("config", help="scenario YAML file")
    common.add_argument("--route", choices=[r.value for r in Route],
                        help="pairing route (overrides the file)")
    common.add_argument("--rel-tol", type=_positive_float, help="quadrature relative tolerance")
    common.add_argument("--abs-tol", type=_positive_float, help="quadrature absolute tolerance")
    common.add_argument("--seed", type=_non_negative_int, help="seed recorded in provenance")
    common.add_argument("--enforce-bound", action="store_true",
                        help="exit with status 4 if the second-law audit is violated")
    common.add_argument("-o", "--output", help="write the machine-readable output here")

    run = sub.add_parser("run", parents=[common], help="evaluate one scenario")
    run.add_argument("--format", choices=("yaml", "table"), default="yaml",
                     help="what to print on stdout when --output is not given")

    sw = sub.add_parser("sweep", parents=[common], help="vary one parameter, emit CSV")
    sw.add_argument("--axis", required=True, help="parameter to vary, e.g. B.switch_center")
    sw.add_argument("--values", required=True,
                    help="'v1,v2,...', 'linspace:start:stop:n' or 'logspace:e0:e1:n'")
    sw.add_argument("--jobs", type=_non_negative_int, default=1, help="worker processes")

    sub.add_parser("validate", help="check a scenario file without computing").add_argument(
        "config", help="scenario YAML file")

    st = sub.add_parser("selftest", help="run invariant checks on built-in configurations")
    st.add_argument("--seed", type=_non_negative_int, default=0)
    return parser


@contextlib.contextmanager
def _sink(path):
    if path is None:
        yield sys.stdout
    else:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            yield fh


def _load(args):
    s = load_scenario(args.config)
    return with_overrides(s, route=args.route, rel_tol=args.rel_tol, abs_tol=args.abs_tol,
                          seed=args.seed)


def _cmd_run(args) -> int:
    report = run_scenario(_load(args))
    if args.output is not None:
        with _sink(args.output) as fh:
            fh.write(report_yaml(report))
        sys.stdout.write(report_table(report))
    elif args.format == "table":
        sys.stdout.write(report_table(report))
    else:
        sys.stdout.write(report_yaml(report))
    if args.enforce_bound and not report.engine.satisfied:
        print(f"second-law audit violated: margin {report.engine.margin:.6e}", file=sys.stderr)
        return EXIT_AUDIT
    return EXIT_OK


def _cmd_sweep(args) -> int:
    s = _load(args)
    values = parse_values(args.values)
    set_parameter(s, args.axis, values[0] if values else 0.0)  # reject bad axes up front
    violated = False
    with _sink(args.output) as fh:
        fh.write(csv_header())
        fh.flush()
        for value, report in sweep(s, args.axis, values, jobs=max(args.jobs, 1)):
            fh.write(csv_line(value, report))
            fh.flush()
            violated |= not report.engine.satisfied
    if args.enforce_bound and violated:
        print("second-law audit violated for at least one sweep point", file=sys.stderr)
        return EXIT_AUDIT
    return EXIT_OK


def _cmd_validate(args) -> int:
    s = load_scenario(args.config)
    print(f"{args.config}: ok ({s.name}, config hash {s.config_hash()[:12]})")
    return EXIT_OK


def _cmd_selftest(args) -> int:
    from .selftest import run_selftest

    def show(c):
        print(f"{'PASS' if c.passed else 'FAIL'}  {c.name}: {c.detail}", flush=True)

    checks = run_selftest(args.seed, show)
    return EXIT_OK if all(c.passed for c in checks) else EXIT_FAILURE


COMMANDS = {"run": _cmd_run, "sweep": _cmd_sweep, "validate": _cmd_validate,
            "selftest": _cmd_selftest}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except ScenarioError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except QuadratureBudgetError as exc:
        stage = f" during {exc.stage}" if exc.stage else ""
        print(f"error: quadrature budget exhausted{stage}: {exc}", file=sys.stderr)
        return EXIT_BUDGET


if __name__ == "__main__":
    sys.exit(main())
