"""Fit-time scaling in n, summarized as per-d linear regressions.

Runs the benchmark command with a pinned iteration budget so every fit
does the same amount of work per sweep, then regresses the mean time at
each (n, d) point on n and prints slope and R squared per d.

Usage:
    python3 scripts/timing_study.py --n-list 2000,6000,10000 --d-list 2,6 --reps 5
"""

import argparse
import sys
import tempfile
from pathlib import Path

import numpy as np

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from coblock.cli import main as cli_main


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n-list", default="2000,6000,10000")
    ap.add_argument("--d-list", default="2,6")
    ap.add_argument("--m", type=int, default=100)
    ap.add_argument("--reps", type=int, default=5)
    ap.add_argument("--restarts", type=int, default=5)
    ap.add_argument("--max-iters", type=int, default=10)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--out", default=None, help="directory for timing.csv (default: temp)")
    args = ap.parse_args()

    out = args.out or tempfile.mkdtemp(prefix="timing_study_")
    rc = cli_main([
        "benchmark", "--out", out, "--n-list", args.n_list, "--m", str(args.m),
        "--g", "2", "--d-list", args.d_list, "--reps", str(args.reps),
        "--restarts", str(args.restarts), "--max-iters", str(args.max_iters),
        "--tol", "1e-16", "--seed", str(args.seed),
    ])
    if rc != 0:
        sys.exit(rc)

    raw = np.genfromtxt(Path(out) / "timing.csv", delimiter=",", names=True)
    print(f"\n{'d':>4} {'slope_s_per_row':>16} {'r_squared':>10}")
    for d in sorted({int(v) for v in raw["d"]}):
        sub = raw[raw["d"] == d]
        ns = np.unique(sub["n"])
        means = np.array([sub["seconds"][sub["n"] == n].mean() for n in ns])
        slope, intercept = np.polyfit(ns, means, 1)
        resid = means - (slope * ns + intercept)
        r2 = 1.0 - resid @ resid / ((means - means.mean()) @ (means - means.mean()))
        print(f"{d:>4} {slope:>16.3e} {r2:>10.4f}")
    print(f"raw timings in {out}/timing.csv")


if __name__ == "__main__":
    main()
