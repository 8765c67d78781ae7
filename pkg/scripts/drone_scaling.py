#!/usr/bin/env python3
"""Scaling experiment: per-step monitoring of the four drone-surveillance
properties over t in 0..80 for a range of swarm sizes.

Prints one row per (sigma, formula) with satisfaction/violation counts and
the mean per-step monitoring time in milliseconds.

Usage: python3 scripts/drone_scaling.py [--sigma 4,10,50,100] [--steps 80] [--seed 0]
"""

import argparse
import json

from stlgo.cli import bench_scenario


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--sigma", default="4,10,50,100")
    ap.add_argument("--steps", type=int, default=80)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--out", help="also write rows as JSON")
    args = ap.parse_args()

    rows = []
    print(f"{'sigma':>6} {'formula':>8} {'# sat':>6} {'# vio':>6} {'avg time (ms)':>14}")
    for sigma in (int(s) for s in args.sigma.split(",")):
        for row in bench_scenario(sigma, args.steps, args.seed):
            rows.append(row)
            print(
                f"{row['sigma']:>6} {row['formula']:>8} {row['sat']:>6} "
                f"{row['vio']:>6} {row['mean_ms']:>14.4f}"
            )
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            json.dump(rows, fh, indent=1)


if __name__ == "__main__":
    main()
