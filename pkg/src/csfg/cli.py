"""Command-line entry point: run sweeps, verify the gate matrix, export pumps.

    csfg run --config sweep.json [--out DIR] [--full] [--verify] [--stream] [--threads K]
    csfg verify
    csfg export-pump --kind hg --n-bins 31 [--order 2] [--width W] [--bin L] --out pump.csv

Invalid configs exit 2 with a machine-readable JSON object on stderr; a
failed verification gate exits 1.
"""

from __future__ import annotations

import argparse
import json
import sys

from .core import make_grid
from .pumps import export_pump_csv, hermite_gauss_pump, single_bin_pump
from .sweeps import ConfigError, SweepConfig, run_sweep


def _cmd_run(args) -> int:
    try:
        config = SweepConfig.from_file(args.config, use_full=args.full)
    except ConfigError as exc:
        json.dump(exc.payload, sys.stderr)
        sys.stderr.write("\n")
        return 2
    if args.verify and _cmd_verify(args) != 0:
        print("verification gates failed; not running the sweep", file=sys.stderr)
        return 1
    out_dir = args.out if args.out else config.out_dir
    try:
        written = run_sweep(config, out_dir, stream=args.stream, threads=args.threads)
    except ValueError as exc:
        json.dump({"error": str(exc)}, sys.stderr)
        sys.stderr.write("\n")
        return 2
    for path in written:
        print(path)
    return 0


def _cmd_verify(_args) -> int:
    from .verify import run_all

    failed = False

    def show(res):
        nonlocal failed
        failed = failed or not res.passed
        status = "PASS" if res.passed else "FAIL"
        print(f"[{status}] {res.name}: residual {res.residual:.3e} "
              f"(tol {res.tolerance:.1e}) in {res.runtime_ms:.0f} ms"
              + (f"  [{res.detail}]" if res.detail else ""))

    run_all(progress=show)
    return 1 if failed else 0


def _cmd_export_pump(args) -> int:
    grid = make_grid(args.n_bins, args.oversample)
    try:
        if args.kind == "hg":
            env = hermite_gauss_pump(args.order, args.width, grid)
        else:
            env = single_bin_pump(args.bin, grid)
    except ValueError as exc:
        json.dump({"error": str(exc)}, sys.stderr)
        sys.stderr.write("\n")
        return 2
    export_pump_csv(env, args.out)
    print(args.out)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="csfg",
                                     description="frequency-bin gate simulator")
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="run a sweep config and emit CSV artifacts")
    run_p.add_argument("--config", required=True, help="path to the sweep JSON")
    run_p.add_argument("--out", default=None, help="output directory (default: config out_dir)")
    run_p.add_argument("--full", action="store_true",
                       help="apply the config's full-scale overrides")
    run_p.add_argument("--verify", action="store_true",
                       help="run the verification gates first; abort on failure")
    run_p.add_argument("--stream", action="store_true",
                       help="memory-streaming kernel path for wide gates")
    run_p.add_argument("--threads", type=int, default=1,
                       help="worker threads over sweep points (results stay ordered)")
    run_p.set_defaults(func=_cmd_run)

    verify_p = sub.add_parser("verify", help="run the verification gate matrix")
    verify_p.set_defaults(func=_cmd_verify)

    exp_p = sub.add_parser("export-pump", help="write a pump envelope as CSV")
    exp_p.add_argument("--kind", choices=("hg", "sf"), required=True)
    exp_p.add_argument("--n-bins", type=int, default=31)
    exp_p.add_argument("--oversample", type=int, default=16)
    exp_p.add_argument("--order", type=int, default=2, help="HG order")
    exp_p.add_argument("--width", type=float, default=None, help="HG width in bins")
    exp_p.add_argument("--bin", type=int, default=0, help="SF bin index")
    exp_p.add_argument("--out", required=True)
    exp_p.set_defaults(func=_cmd_export_pump)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
