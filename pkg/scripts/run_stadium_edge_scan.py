#!/usr/bin/env python3
"""Edge-mass scan for the Bunimovich stadium.

Solves the lowest eigenmodes at several resolutions, measures the mass each
eigenfunction keeps near the vertical rectangle edges (gamma1), and writes
per-mode CSVs, heatmaps, and a summary across neighborhood widths.
"""

import argparse
import os

import numpy as np

from billiardlab import control, geometry, outputs
from billiardlab.experiments import solve_domain, stadium_edge_experiment


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--resolution", type=int, default=128)
    ap.add_argument("--count", type=int, default=100)
    ap.add_argument("--aspect", type=float, default=1.0, help="rectangle height a")
    ap.add_argument("--out", default="out/stadium_edge")
    args = ap.parse_args()
    os.makedirs(args.out, exist_ok=True)

    solve = solve_domain(geometry.Stadium(a=args.aspect), args.resolution, args.count)
    summary = {}
    for delta_frac in (0.05, 0.1, 0.15, 0.2):
        delta = delta_frac * args.aspect
        _, report = stadium_edge_experiment(
            args.resolution, args.count, delta=delta, a=args.aspect, solve=solve
        )
        outputs.write_csv(
            os.path.join(args.out, f"ratios_delta{delta_frac:g}.csv"),
            ["lambda", "ratio"],
            [(float(l), float(r)) for l, r in zip(report.lams, report.ratios)],
        )
        summary[f"delta_{delta_frac:g}"] = {
            "min_ratio": report.min_ratio,
            "implied_constant": report.implied_constant,
            "slope": report.slope,
        }
        print(f"delta={delta:g}: min ratio {report.min_ratio:.4g}, slope {report.slope:+.3f}")
    region = control.gamma1_neighborhood(0.15 * args.aspect)
    vmask = geometry.region_mask(solve.domain, region, solve.grid)
    for i in np.linspace(0, args.count - 1, 6).astype(int):
        f2 = solve.grid.field_from_vector(np.asarray(solve.pairs[i].vec)) ** 2
        outputs.write_heatmap(
            os.path.join(args.out, f"mode_{i:04d}"), f2, interior=solve.grid.interior, overlay=vmask
        )
    outputs.write_json(os.path.join(args.out, "summary.json"), summary)
    print(f"artifacts in {args.out}")


if __name__ == "__main__":
    main()
