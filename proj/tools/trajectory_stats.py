#!/usr/bin/env python3
"""Summarize a trajectory.csv produced by `fano run --dump-trajectory`.

Prints per-component magnitude statistics over the tail of the run and a
settled/cycling verdict, which is handy when a run exits 3 (horizon reached
without convergence) and you want to see what the state was doing.

Usage:
    tools/trajectory_stats.py out/trajectory.csv [--tail 0.25]
"""

import argparse
import csv
import math
import sys

COMPONENTS = [
    ("alpha1", "re_alpha1", "im_alpha1"),
    ("alpha2", "re_alpha2", "im_alpha2"),
    ("rho_ge1", "re_rho_ge1", "im_rho_ge1"),
    ("rho_ge2", "re_rho_ge2", "im_rho_ge2"),
    ("rho_ee1", "rho_ee1", None),
    ("rho_ee2", "rho_ee2", None),
]


def load(path):
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        rows = [{k: float(v) for k, v in row.items()} for row in reader]
    if not rows:
        sys.exit(f"{path}: no data rows")
    return rows


def magnitudes(rows, re_col, im_col):
    if im_col is None:
        return [abs(r[re_col]) for r in rows]
    return [math.hypot(r[re_col], r[im_col]) for r in rows]


def main():
    ap = argparse.ArgumentParser(description=__doc__,
                                 formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("csv_path")
    ap.add_argument("--tail", type=float, default=0.25,
                    help="fraction of the run to analyze, from the end (default 0.25)")
    ap.add_argument("--flat-tol", type=float, default=1e-6,
                    help="peak-to-peak/mean threshold for the settled verdict")
    args = ap.parse_args()
    if not (0.0 < args.tail <= 1.0):
        ap.error("--tail must be in (0, 1]")

    rows = load(args.csv_path)
    n_tail = max(2, int(len(rows) * args.tail))
    tail = rows[-n_tail:]
    t0, t1 = tail[0]["t"], tail[-1]["t"]
    print(f"{args.csv_path}: {len(rows)} samples, t in [{rows[0]['t']:g}, {rows[-1]['t']:g}]")
    print(f"tail window: last {n_tail} samples, t in [{t0:g}, {t1:g}]")
    print(f"{'component':<10} {'mean':>13} {'min':>13} {'max':>13} {'p2p/mean':>10}")

    settled = True
    for name, re_col, im_col in COMPONENTS:
        mags = magnitudes(tail, re_col, im_col)
        mean = sum(mags) / len(mags)
        lo, hi = min(mags), max(mags)
        scale = mean if mean > 0 else 1.0
        ripple = (hi - lo) / scale
        if ripple > args.flat_tol:
            settled = False
        print(f"{name:<10} {mean:13.6e} {lo:13.6e} {hi:13.6e} {ripple:10.3e}")

    print("verdict:", "settled (magnitudes flat over the tail)" if settled
          else "cycling/drifting (magnitudes not flat over the tail)")
    return 0 if settled else 1


if __name__ == "__main__":
    sys.exit(main())
