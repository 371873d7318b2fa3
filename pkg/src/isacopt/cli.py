"""Command-line entry points: sweep orchestration and validation.

Exit codes: 0 success, 1 failed validation check, 2 configuration error,
3 numerical failure (the failing parameter cell is named on stderr).
"""

import argparse
import csv
import dataclasses
import json
import sys
from datetime import datetime, timezone

from . import __version__
from .config import load, digest, scheme_from_name
from .errors import ConfigError, NumericalFailureError
from .optimizer import GridSpec, sweep
from .validate import DEFAULT_SEED, DEFAULT_TRIALS, run_validation

CSV_COLUMNS = ("scheme", "eps_u", "pd_min", "rate_bits", "rate_nats",
               "feasible", "alpha_u", "beta_u", "alpha_s1", "beta_s1",
               "alpha_s2", "beta_s2", "urllc_eps_max", "detection_min")


def _fmt(value) -> str:
    """17-significant-digit decimal form; bit-faithful float round-trips."""
    return f"{float(value):.17g}"


def rows_to_csv(rows, out_path):
    with open(out_path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        for row in rows:
            a_u, b_u, a_s1, b_s1, a_s2, b_s2 = row.csv_params()
            writer.writerow([
                row.scheme.value, _fmt(row.eps_u), _fmt(row.pd_min),
                _fmt(row.rate_bits), _fmt(row.rate_nats),
                "true" if row.feasible else "false",
                _fmt(a_u), _fmt(b_u), _fmt(a_s1), _fmt(b_s1), _fmt(a_s2),
                _fmt(b_s2), _fmt(row.urllc_eps_max), _fmt(row.detection_min),
            ])


def run_sweep(config_path, out_path, scheme=None, grid=None,
              joint_search=None) -> int:
    try:
        cfg, settings, canonical = load(config_path)
    except ConfigError as err:
        field = f" (field: {err.field})" if err.field else ""
        print(f"config error: {err}{field}", file=sys.stderr)
        return 2
    if scheme is not None:
        try:
            schemes = (scheme_from_name(scheme),)
        except ConfigError as err:
            print(f"config error: {err}", file=sys.stderr)
            return 2
        canonical["sweep"]["schemes"] = [scheme]
    else:
        schemes = settings.schemes
    if grid is not None:
        settings = dataclasses.replace(settings, grid_points=grid)
        canonical["sweep"]["grid_points"] = grid
    if joint_search:
        settings = dataclasses.replace(settings, joint_search=True)
        canonical["sweep"]["joint_search"] = True

    try:
        rows = sweep(cfg, settings.detection_targets, settings.urllc_targets,
                     schemes, GridSpec(settings.grid_points),
                     joint=settings.joint_search)
    except NumericalFailureError as err:
        print(f"numerical failure: {err}", file=sys.stderr)
        return 3
    rows_to_csv(rows, out_path)
    manifest = {
        "config_digest": digest(canonical),
        "tool_version": __version__,
        "timestamp": datetime.now(timezone.utc).isoformat(),
        "rows_emitted": len(rows),
    }
    with open(str(out_path) + ".manifest.json", "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    print(f"wrote {len(rows)} rows to {out_path}")
    return 0


def run_validate(trials=DEFAULT_TRIALS, seed=DEFAULT_SEED) -> int:
    results = run_validation(trials=trials, seed=seed)
    for res in results:
        print(res.line())
    failed = [r for r in results if not r.passed]
    print(f"{len(results) - len(failed)}/{len(results)} checks passed")
    return 1 if failed else 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="isacopt",
        description="Rate-reliability-detection trade-off sweeps for "
                    "precoded dual-function frames")
    sub = parser.add_subparsers(dest="command", required=True)

    p_sweep = sub.add_parser("sweep", help="run a configured trade-off sweep")
    p_sweep.add_argument("--config", required=True)
    p_sweep.add_argument("--out", required=True)
    p_sweep.add_argument("--scheme", choices=["dpc-tin", "dpc-sic",
                                              "power-sharing", "time-sharing"])
    p_sweep.add_argument("--grid", type=int)
    p_sweep.add_argument("--joint-search", action="store_true")

    p_val = sub.add_parser("validate", help="run the Monte Carlo oracle suite")
    p_val.add_argument("--trials", type=int, default=DEFAULT_TRIALS)
    p_val.add_argument("--seed", type=int, default=DEFAULT_SEED)

    args = parser.parse_args(argv)
    if args.command == "sweep":
        return run_sweep(args.config, args.out, scheme=args.scheme,
                         grid=args.grid, joint_search=args.joint_search)
    return run_validate(trials=args.trials, seed=args.seed)


if __name__ == "__main__":
    sys.exit(main())
