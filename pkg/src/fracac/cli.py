"""Command-line entry point ``fracac``.

Exit codes: 0 on success with every asserted invariant holding, 2 when an
invariant (or a convergence-rate target) is violated, 3 when a solver fails and
4 for configuration or usage errors.
"""

from __future__ import annotations

import argparse
import importlib.resources
import logging
import pathlib
import sys
from typing import Sequence

from fracac import drivers, properties
from fracac.config import ConfigError, RunConfig, load_config, parse_config
from fracac.mittag_leffler import MittagLefflerError
from fracac.schemes import StepFailure
from fracac.spatial import ConvergenceError

log = logging.getLogger("fracac")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on usage errors, which is reserved for violations
    def error(self, message: str):
        self.print_usage(sys.stderr)
        self.exit(drivers.EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def preset_names() -> list[str]:
    root = importlib.resources.files("fracac") / "presets"
    return sorted(p.name[:-4] for p in root.iterdir() if p.name.endswith(".cfg"))


def resolve_config(name: str) -> RunConfig:
    """Load a config file, or a bundled preset when no such file exists."""
    path = pathlib.Path(name)
    if path.exists():
        return load_config(path)

    stem = name[:-4] if name.endswith(".cfg") else name
    if stem in preset_names():
        text = (importlib.resources.files("fracac") / "presets" / f"{stem}.cfg").read_text()
        return parse_config(text, source=f"preset:{stem}")

    raise UsageError(
        f"no config file {name!r} and no such preset; "
        f"presets: {', '.join(preset_names())}"
    )


def _floats(text: str) -> list[float]:
    try:
        return [float(x) for x in text.replace(" ", ",").split(",") if x]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a comma-separated list: {text!r}")


def _schemes(text: str) -> list[str]:
    items = [x.strip().upper() for x in text.split(",") if x.strip()]
    for item in items:
        if item not in ("CS", "WCS", "LWS"):
            raise argparse.ArgumentTypeError(f"unknown scheme {item!r}")
    return items


# {{{ subcommands


def cmd_run(args: argparse.Namespace) -> int:
    cfg = resolve_config(args.config)
    report = drivers.run_experiment(cfg, args.output)
    print((report.output_dir / "summary.txt").read_text(), end="")
    return report.exit_code


def cmd_converge(args: argparse.Namespace) -> int:
    cfg = resolve_config(args.config)
    outdir = args.output if args.output is not None else cfg.output_dir
    report = drivers.converge(
        cfg, args.levels, alphas=args.alphas, schemes=args.schemes, output_dir=outdir,
    )
    print(report.to_csv(), end="")
    for case in report.cases:
        status = "pass" if case.ok else "FAIL"
        print(
            f"# {case.scheme.value} alpha={case.alpha:g}: rate {case.rate:.4f} "
            f"(target {case.target:g} +- {drivers.RATE_TOL:g}) {status}",
            file=sys.stderr,
        )
    return report.exit_code


def cmd_ml_check(args: argparse.Namespace) -> int:
    rows = drivers.ml_check(args.alpha, args.lam, args.tau_list, T=args.T)
    print(drivers.ml_check_csv(rows), end="")
    ratios = drivers.error_ratios(rows)
    if ratios:
        print("# tau-halving error ratios: " + ", ".join(f"{r:.4f}" for r in ratios),
              file=sys.stderr)
    return drivers.EXIT_OK


def cmd_weights(args: argparse.Namespace) -> int:
    print(drivers.weights_csv(args.alpha, args.n), end="")
    return drivers.EXIT_OK


def cmd_properties(args: argparse.Namespace) -> int:
    results = properties.run_properties(args.seed, args.trials)
    print("property,status,checked,violations,detail")
    for r in results:
        print(r.line())
    return drivers.EXIT_OK if all(r.passed for r in results) else drivers.EXIT_INVARIANT


# }}}


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="fracac", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("run", help="run one configured experiment")
    p.add_argument("config", help="config file or preset name")
    p.add_argument("--output", default=None, help="override output_dir")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("converge", help="observed convergence rates")
    p.add_argument("config", help="config file or preset name (N is the base level)")
    p.add_argument("--levels", type=int, default=5)
    p.add_argument("--alphas", type=_floats, default=None)
    p.add_argument("--schemes", type=_schemes, default=None)
    p.add_argument("--output", default=None, help="directory for rates.csv")
    p.set_defaults(func=cmd_converge)

    p = sub.add_parser("ml-check", help="scalar CQ against the Mittag-Leffler solution")
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--lambda", dest="lam", type=float, default=1.0)
    p.add_argument("--tau-list", type=_floats,
                   default=[2.0**-k for k in range(4, 11)])
    p.add_argument("--T", type=float, default=1.0)
    p.set_defaults(func=cmd_ml_check)

    p = sub.add_parser("weights", help="dump the convolution quadrature weights")
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--n", type=int, required=True)
    p.set_defaults(func=cmd_weights)

    p = sub.add_parser("properties", help="randomized structural property checks")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--trials", type=int, default=10_000)
    p.set_defaults(func=cmd_properties)

    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.WARNING - 10 * min(args.verbose, 2),
        format="%(levelname)s %(name)s: %(message)s",
    )

    try:
        return args.func(args)
    except (ConfigError, UsageError, ValueError) as exc:
        print(f"fracac: configuration error: {exc}", file=sys.stderr)
        return drivers.EXIT_CONFIG
    except (StepFailure, ConvergenceError, MittagLefflerError, FloatingPointError) as exc:
        print(f"fracac: solver failure: {exc}", file=sys.stderr)
        return drivers.EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
