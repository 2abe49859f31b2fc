"""Command-line interface.

Examples::

    nhqc-sim fig2a --grid 5 --threads 8 --out fig2a.csv --svg fig2a.svg
    nhqc-sim fig2cd --out fig2cd.csv
    nhqc-sim run --config experiment.json --threads 4
    nhqc-sim fig2a --grid 1 --beta-ref auto

Exit status is 0 on full success and 2 when individual grid points failed
(their rows are left blank in the CSV).
"""

from __future__ import annotations

import argparse
import sys

from .experiments import (
    PRESET_NAMES,
    calibrate_beta,
    default_threads,
    emit_csv,
    emit_dynamics_csv,
    emit_heatmap_svg,
    load_config,
    preset,
    run,
)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="nhqc-sim",
        description="Holonomic-gate simulator for parametrically driven transmon lattices",
    )
    parser.add_argument("target", help=f"preset name ({', '.join(PRESET_NAMES)}) or 'run'")
    parser.add_argument("--config", help="experiment JSON file (with target 'run')")
    parser.add_argument("--grid", type=int, help="override the point count of every sweep axis")
    parser.add_argument("--threads", type=int, help="worker count (default: NHQC_THREADS or 1)")
    parser.add_argument("--dt", type=float, help="fixed integrator step in ns")
    parser.add_argument("--out", help="result CSV path (default: <name>.csv)")
    parser.add_argument("--svg", help="also render a heatmap SVG to this path")
    parser.add_argument(
        "--beta-ref",
        dest="beta_ref",
        help="reference drive depth: a number, or 'auto' to calibrate per gate",
    )
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)

    if args.target == "run":
        if not args.config:
            print("error: target 'run' needs --config", file=sys.stderr)
            return 1
        config = load_config(args.config)
    else:
        try:
            config = preset(args.target)
        except ValueError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return 1

    if args.grid:
        config = config.with_grid(args.grid)
    if args.dt:
        config = config.with_dt(args.dt)
    if args.beta_ref:
        if args.beta_ref == "auto":
            from dataclasses import replace

            jobs = []
            for i, job in enumerate(config.jobs):
                beta = calibrate_beta(config, i)
                print(f"calibrated beta_ref[{job.label}] = {beta:.4f}")
                jobs.append(replace(job, beta_ref=beta))
            config = replace(config, jobs=tuple(jobs))
        else:
            config = config.with_beta_ref(float(args.beta_ref))

    threads = args.threads if args.threads else default_threads()
    rows = run(config, parallelism=threads)

    out = args.out or f"{config.name}.csv"
    emit_csv(rows, out)
    print(f"wrote {len(rows)} rows to {out}")

    stem = out[:-4] if out.endswith(".csv") else out
    seen: dict[str, int] = {}
    for row in rows:
        if row.dynamics is None:
            continue
        n = seen.get(row.gate, 0)
        seen[row.gate] = n + 1
        suffix = f"_{n}" if n else ""
        dyn_path = f"{stem}_dynamics_{row.gate}{suffix}.csv"
        emit_dynamics_csv(row.dynamics, dyn_path)
        print(f"wrote dynamics trace to {dyn_path}")

    if args.svg:
        emit_heatmap_svg(rows, args.svg)
        print(f"wrote heatmap to {args.svg}")

    failures = [r for r in rows if r.error]
    for r in failures:
        print(f"point {r.gate} {r.coords} failed: {r.error}", file=sys.stderr)
    return 2 if failures else 0


if __name__ == "__main__":
    sys.exit(main())
