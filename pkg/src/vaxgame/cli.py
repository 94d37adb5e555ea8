"""Command-line entry points.

    vaxgame run <config>       execute the configured layers, write summary,
                               trajectories and a run manifest
    vaxgame atlas <config>     closed-form catalogue dump (plus certificates)
    vaxgame ess <config>       evolutionary-stability sweep
    vaxgame validate <config>  closed form vs ODE vs Monte Carlo agreement

Common flags: --seed (override the master seed), --threads (parallel sweep
points), --out (override the output directory).
"""

from __future__ import annotations

import argparse
import dataclasses
import sys
from pathlib import Path

from .config import load_experiment
from .errors import ConfigError
from .harness import (
    Layer,
    run,
    write_atlas_csv,
    write_ess_csv,
    write_manifest,
)


def _add_common(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("config", help="experiment config file")
    sub.add_argument("--seed", type=int, default=None, help="master seed override")
    sub.add_argument("--threads", type=int, default=1, help="parallel sweep points")
    sub.add_argument("--out", type=Path, default=None, help="output directory override")


def _prepare(args, forced_layers=None):
    exp = load_experiment(args.config)
    if args.out is not None:
        exp = dataclasses.replace(exp, output_dir=args.out)
    if forced_layers is not None:
        exp = dataclasses.replace(exp, layers=frozenset(forced_layers))
    seed = args.seed if args.seed is not None else exp.mc.seed
    return exp, seed


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="vaxgame",
        description="Epidemic-vaccination game engine",
    )
    subs = parser.add_subparsers(dest="command", required=True)
    for name in ("run", "atlas", "ess", "validate"):
        _add_common(subs.add_parser(name))
    args = parser.parse_args(argv)

    try:
        if args.command == "run":
            exp, seed = _prepare(args)
            records = run(exp, threads=args.threads, master_seed=seed)
            write_manifest(
                exp, args.config, seed, args.threads,
                exp.output_dir / f"manifest_{exp.id}.txt",
            )
            print(f"{exp.id}: {len(records)} point(s) -> {exp.output_dir}")
            return 0

        if args.command == "atlas":
            exp, seed = _prepare(args, forced_layers={Layer.CLOSED_FORM, Layer.STABILITY})
            records = run(exp, threads=args.threads, master_seed=seed)
            out = exp.output_dir / f"atlas_{exp.id}.csv"
            write_atlas_csv(exp, records, out)
            print(f"{exp.id}: atlas with {len(records)} row(s) -> {out}")
            return 0

        if args.command == "ess":
            exp, seed = _prepare(args, forced_layers={Layer.ESS})
            if exp.costs is None:
                raise ConfigError("ess command requires a [costs] section")
            records = run(exp, threads=args.threads, master_seed=seed)
            out = exp.output_dir / f"ess_{exp.id}.csv"
            write_ess_csv(records, out)
            print(f"{exp.id}: ESS sweep with {len(records)} row(s) -> {out}")
            return 0

        # validate
        exp, seed = _prepare(
            args, forced_layers={Layer.CLOSED_FORM, Layer.ODE, Layer.MONTE_CARLO}
        )
        records = run(exp, threads=args.threads, master_seed=seed)
        write_manifest(
            exp, args.config, seed, args.threads,
            exp.output_dir / f"manifest_{exp.id}.txt",
        )
        worst = 0
        for record in records:
            tag = (
                f"{record.sweep_variable}={record.sweep_value:g}"
                if record.sweep_value is not None
                else "single point"
            )
            for pair, verdict in record.cross.items():
                print(f"{exp.id} [{tag}] {pair}: {verdict}")
                if verdict == "disagree":
                    worst = 1
        return worst

    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
