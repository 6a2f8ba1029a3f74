"""Command line entry point: ``cfaging run|sweep|validate|convert-velocity``."""

import argparse
import sys
from dataclasses import replace

from . import harness
from .scenario import SimConfig


def _spec_from_args(args, **defaults):
    spec = harness.load_config(args.config) if args.config else harness.ExperimentSpec(**defaults)
    updates = {}
    if args.drops is not None:
        updates["n_drops"] = args.drops
    if args.out is not None:
        updates["output_path"] = args.out
    if args.format is not None:
        updates["output_format"] = args.format
    if args.systems:
        updates["systems"] = tuple(args.systems.split(","))
    if args.power:
        updates["power_modes"] = tuple(args.power.split(","))
    if getattr(args, "doppler", None):
        updates["doppler_sweep"] = tuple(float(v) for v in args.doppler.split(","))
    if args.workers is not None:
        updates["workers"] = args.workers
    if args.seed is not None:
        updates["base"] = replace(spec.base, rng_seed=args.seed)
    return replace(spec, **updates) if updates else spec


def _print_table(rows, header):
    print("\t".join(header))
    for row in rows:
        print("\t".join(f"{v:.6g}" if isinstance(v, float) else str(v) for v in row))


def cmd_run(args):
    spec = _spec_from_args(args)
    result = harness.run_drops(spec)
    _print_table(result.table(), ("system", "power_mode", "fdts", "metric", "value"))
    return 0


def cmd_sweep(args):
    spec = _spec_from_args(args, doppler_sweep=harness.DEFAULT_SWEEP)
    rows, _ = harness.sweep_doppler(spec)
    _print_table(rows, ("fdts", "system", "power_mode", "se_95_likely"))
    return 0


def cmd_validate(args):
    if args.config:
        cfg = harness.load_config(args.config).base
    else:
        cfg = harness.desk_config(args.doppler_value)
    if args.seed is not None:
        cfg = replace(cfg, rng_seed=args.seed)
    report = harness.validate(cfg, n_blocks=args.blocks, seed=args.mc_seed,
                              tolerance=args.tolerance)
    print(report.summary())
    print("PASS" if report.passed else f"FAIL ({len(report.failures)} checks out of tolerance)")
    return 0 if report.passed else 1


def cmd_convert(args):
    fdts = harness.velocity_to_normalized_doppler(args.velocity / 3.6, args.carrier_ghz * 1e9,
                                                  args.sample_time_us / 1e6)
    print(repr(float(fdts)))
    return 0


def _add_common(p):
    p.add_argument("--config", help="YAML experiment configuration")
    p.add_argument("--drops", type=int, help="number of network drops")
    p.add_argument("--seed", type=int, help="master RNG seed")
    p.add_argument("--out", help="output file for results")
    p.add_argument("--format", choices=("csv", "json"))
    p.add_argument("--systems", help="comma list of CF-LSFD,CF-MF,SmallCell")
    p.add_argument("--power", help="comma list of full,fpc")
    p.add_argument("--workers", type=int, help="worker processes")


def build_parser():
    parser = argparse.ArgumentParser(prog="cfaging", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="SE CDF statistics over network drops")
    _add_common(p)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("sweep", help="95%%-likely SE against normalized Doppler")
    _add_common(p)
    p.add_argument("--doppler", help="comma list of f_D*T_s values")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("validate", help="check closed forms against Monte Carlo")
    p.add_argument("--config", help="YAML configuration (network section is used)")
    p.add_argument("--seed", type=int, help="drop seed")
    p.add_argument("--doppler-value", type=float, default=0.005,
                   help="f_D*T_s of the built-in desk network")
    p.add_argument("--blocks", type=int, default=100_000, help="Monte Carlo coherence blocks")
    p.add_argument("--mc-seed", type=int, default=2024)
    p.add_argument("--tolerance", type=float, default=0.02)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("convert-velocity", help="km/h to normalized Doppler")
    p.add_argument("velocity", type=float, help="UE speed in km/h")
    p.add_argument("--carrier-ghz", type=float, default=SimConfig.carrier_freq / 1e9)
    p.add_argument("--sample-time-us", type=float, default=SimConfig.sample_time * 1e6)
    p.set_defaults(func=cmd_convert)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
