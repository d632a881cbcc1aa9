#!/usr/bin/env python3
"""Fidelity versus cavity decay time for the full and effective models.

Sweeps kappa_inverse over 100..900 us for the full interaction-picture model
with error terms and for the diagonal effective model with crosstalk, and
writes one plot-ready .dat file per scenario plus a combined CSV.  Runs at
the sweep step size; use scripts/convergence_study.py for the
convergence-grade numbers at 300 us.
"""

import argparse
import os
import sys

from catghz.analysis import KAPPA_GRID, SWEEP_DT, ScenarioSpec, sweep_kappa
from catghz.cli import CSV_COLUMNS, _format_row
from catghz.model import SystemParams

SCENARIOS = ("full_with_errors", "effective_with_crosstalk")


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--out", default="results_decay")
    parser.add_argument("--cache-dir", default=".sim_cache")
    parser.add_argument("--workers", type=int, default=1)
    parser.add_argument("--scenario", action="append", choices=SCENARIOS,
                        default=None, help="restrict to one curve (repeatable)")
    args = parser.parse_args()

    scenarios = tuple(args.scenario) if args.scenario else SCENARIOS
    os.makedirs(args.out, exist_ok=True)
    csv_path = os.path.join(args.out, "results.csv")
    with open(csv_path, "w") as fh:
        fh.write(",".join(CSV_COLUMNS) + "\n")
        for name in scenarios:
            print(f"sweeping {name} over {len(KAPPA_GRID)} decay times", flush=True)
            spec = ScenarioSpec(model=name, params=SystemParams())

            def flush(row, fh=fh):
                fh.write(_format_row(row) + "\n")
                fh.flush()
                print(f"  kappa_inverse = {row.kappa_inverse:g} us -> "
                      f"F = {row.fidelity:.6f} ({row.wall_time:.0f} s)", flush=True)

            result = sweep_kappa(spec, KAPPA_GRID, workers=args.workers,
                                 dt=SWEEP_DT, cache_dir=args.cache_dir,
                                 progress=flush)
            dat = os.path.join(args.out, f"fidelity_vs_kappa_{name}.dat")
            with open(dat, "w") as dfh:
                dfh.write("# kappa_inverse_us  fidelity (dimensionless)\n")
                for row in result.rows:
                    dfh.write(f"{row.kappa_inverse:12.6g}  {row.fidelity:.12f}\n")
    print(f"wrote {csv_path}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
