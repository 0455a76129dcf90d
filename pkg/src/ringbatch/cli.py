"""Command-line experiment runner.

Subcommands map one-to-one onto the experiment drivers:

    run              single-trajectory time average (CSV + JSON summary)
    error-table      relative errors vs an exact fine-step reference
    ensemble         weak error + relative entropy over trajectory ensembles
    strong-error     pathwise deviation of batched vs exact twin trajectories
    rejection-table  Metropolis rejection rates on a parameter grid
    spectrum-check   ring-operator spectrum and solver cross-checks

Experiments come from ``--preset NAME`` (packaged presets) or ``--config
PATH``; ``--seed`` and ``--out`` override the seed and output directory.
"""

from __future__ import annotations

import argparse
import sys

from .config import ConfigError, load_config, preset_names
from . import experiments


def _add_common(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--preset", help="packaged preset name")
    sub.add_argument("--config", help="path to a config file")
    sub.add_argument("--seed", type=int, help="override the master seed")
    sub.add_argument("--out", default="out", help="output directory")
    sub.add_argument("--threads", type=int, default=1, help="worker processes for ensembles")


def _load(args) -> "ExperimentConfig":
    overrides = {}
    if args.seed is not None:
        overrides["seed"] = args.seed
    return load_config(path=args.config, preset=args.preset, overrides=overrides)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="ringbatch", description=__doc__)
    subs = parser.add_subparsers(dest="command", required=True)

    for name in ("run", "error-table", "ensemble", "strong-error", "rejection-table"):
        sub = subs.add_parser(name)
        _add_common(sub)

    spectrum = subs.add_parser("spectrum-check")
    spectrum.add_argument("--n-beads", type=int, default=16)
    spectrum.add_argument("--mass", type=float, default=1.0)
    spectrum.add_argument("--beta", type=float, default=4.0)
    spectrum.add_argument("--alpha", type=float, default=0.25)
    spectrum.add_argument("--out", default=None)

    listing = subs.add_parser("presets")

    args = parser.parse_args(argv)

    try:
        if args.command == "presets":
            for name in preset_names():
                print(name)
            return 0
        if args.command == "spectrum-check":
            rows = experiments.run_spectrum_check(
                args.n_beads, args.mass, args.beta, args.alpha, args.out
            )
            worst = max(r["abs_diff"] for r in rows)
            print(f"N={args.n_beads}: max |closed-form - dense| = {worst:.3e}")
            return 0

        config = _load(args)
        print(f"[ringbatch] {args.command} preset={config.name} seed={config.seed} -> {args.out}")
        if args.command == "run":
            summary = experiments.run_time_average(config, args.out)
            print(
                f"[ringbatch] mean={summary['mean']:.6g} "
                f"std_err={summary['std_err']:.3g} "
                f"wall_ms_per_step={summary['wall_ms_per_step']:.3g}"
            )
        elif args.command == "error-table":
            experiments.run_error_table(config, args.out)
        elif args.command == "ensemble":
            experiments.run_ensemble(config, args.out, threads=args.threads)
        elif args.command == "strong-error":
            experiments.run_strong_error(config, args.out)
        elif args.command == "rejection-table":
            experiments.run_rejection_table(config, args.out)
        return 0
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
