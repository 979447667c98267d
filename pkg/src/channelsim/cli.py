"""Command-line entry point.

Subcommands: transit, reflect, sweep, model-compare (all config-driven) and
oracle (closed-form table, direct flags). Human-readable progress goes to
stderr; machine output goes to files only, except the oracle table, which is
the machine output and prints to stdout.

Exit codes: 0 success, 1 configuration/usage error, 2 numerical failure.
"""

from __future__ import annotations

import argparse
import itertools
import sys
import time

from . import analytic, experiments, io
from .config import parse_config
from .errors import ChannelSimError, ConfigError, NumericalBlowupError


class _ArgumentError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _ArgumentError(message)


def _build_parser() -> _Parser:
    parser = _Parser(prog="channelsim", description=__doc__)
    sub = parser.add_subparsers(dest="command", metavar="command")

    def add_run(name, help_):
        p = sub.add_parser(name, help=help_)
        p.add_argument("--config", required=True, help="JSON run configuration")
        p.add_argument("--out", help="output directory (overrides config output.dir)")
        p.add_argument("--quiet", action="store_true", help="suppress progress output")
        p.add_argument("--threads", type=int, help="bound the worker count (never changes results)")
        return p

    add_run("transit", "channel transit against a free reference arm")
    add_run("reflect", "solid-wall reflection momentum budget")
    add_run("sweep", "parameter sweep (experiment.axis/values from config)")
    add_run("model-compare", "hard/step/smooth wall-model comparison")

    o = sub.add_parser("oracle", help="closed-form oracle table")
    o.add_argument("--p", type=float, nargs="+", required=True, help="beam momenta")
    o.add_argument("--a", type=float, nargs="+", required=True, help="channel widths")
    o.add_argument("--ell", type=float, nargs="+", required=True, help="channel lengths")
    o.add_argument("--quiet", action="store_true")
    o.add_argument("--threads", type=int)
    return parser


def _oracle_table(ps, aas, ells) -> str:
    cols = ("p", "a", "ell", "p_reduced_exact", "p_reduced_approx",
            "dphi_exact_mode", "dphi_approx", "dphi_oracle_1d", "v_eff")
    lines = ["  ".join(f"{c:>16s}" for c in cols)]
    for p, a, ell in itertools.product(ps, aas, ells):
        p_red = analytic.reduced_momentum_exact(p, a)
        v_eff = analytic.effective_step_height(a)
        if p_red is None or p_red == 0.0:
            row = [p, a, ell, "evanescent", "", "", "", "", v_eff]
        else:
            row = [
                p, a, ell, p_red,
                analytic.reduced_momentum_approx(p, a),
                analytic.phase_shift_exact_mode(p, ell, a),
                analytic.phase_shift_approx(p, ell, a),
                analytic.transmission_phase_1d(p, v_eff, ell),
                v_eff,
            ]
        lines.append("  ".join(f"{v:>16.8g}" if isinstance(v, float) else f"{v:>16s}" for v in row))
    return "\n".join(lines)


def _progress_printer(label: str, quiet: bool):
    if quiet:
        return None
    state = {"last": -1}

    def progress(step, total):
        decile = 10 * step // total
        if decile > state["last"]:
            state["last"] = decile
            print(f"{label}: step {step}/{total}", file=sys.stderr)

    return progress


def cli_main(argv) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except _ArgumentError as exc:
        print(f"error: {exc}", file=sys.stderr)
        parser.print_usage(sys.stderr)
        return 1
    if args.command is None:
        parser.print_usage(sys.stderr)
        return 1

    if getattr(args, "threads", None) is not None:
        if args.threads < 1:
            print("error: --threads must be >= 1", file=sys.stderr)
            return 1
        import numba

        numba.set_num_threads(min(args.threads, numba.config.NUMBA_NUM_THREADS))

    if args.command == "oracle":
        print(_oracle_table(args.p, args.a, args.ell))
        return 0

    try:
        with open(args.config) as fh:
            text = fh.read()
    except OSError as exc:
        print(f"error: cannot read config: {exc}", file=sys.stderr)
        parser.print_usage(sys.stderr)
        return 1

    try:
        cfg = parse_config(text)
        expected_kind = args.command if args.command != "model-compare" else "model-compare"
        if cfg.experiment.kind != expected_kind:
            raise ConfigError(
                f"config is for {cfg.experiment.kind!r} but the {args.command} subcommand was invoked",
                path="experiment.kind",
            )
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1

    outdir = args.out if args.out else cfg.output.dir
    try:
        io.preflight_output_dir(outdir)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1

    progress = _progress_printer(args.command, args.quiet)
    started = time.perf_counter()
    try:
        if args.command == "transit":
            result = experiments.run_transit(cfg, progress=progress)
        elif args.command == "reflect":
            result = experiments.run_reflection(cfg, progress=progress)
        elif args.command == "sweep":
            result = experiments.run_sweep(cfg, progress=progress)
        else:
            result = experiments.run_model_comparison(cfg, progress=progress)
    except NumericalBlowupError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 2
    except ChannelSimError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    elapsed = time.perf_counter() - started

    written = io.emit_results(result, outdir, cfg.output.formats, wallclock_s=elapsed)
    if not args.quiet:
        for path in written:
            print(f"wrote {path}", file=sys.stderr)
    return 0


def main():
    sys.exit(cli_main(sys.argv[1:]))


if __name__ == "__main__":
    main()
