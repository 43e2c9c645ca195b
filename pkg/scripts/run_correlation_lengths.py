#!/usr/bin/env python3
"""Correlation-length scan over field strengths at zero temperature.

For each epsilon, finds the least box half-side where the wired-free
magnetization gap crosses the threshold, then fits log log L against
log(1/eps).
"""
import argparse
import sys

from rfpm.cli import main as cli_main


def parse_args():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--eps", default="0.5,1.0,2.0", help="comma-separated strengths")
    p.add_argument("--q", type=int, default=3)
    p.add_argument("--threshold", type=float, default=0.5)
    p.add_argument("--n-max", type=int, default=32)
    p.add_argument("--samples", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default="results/corrlen")
    return p.parse_args()


def main():
    a = parse_args()
    return cli_main([
        "thm1", "--eps", a.eps, "--q", str(a.q), "--threshold", str(a.threshold),
        "--n-max", str(a.n_max), "--samples", str(a.samples), "--seed", str(a.seed),
        "--out", a.out,
    ])


if __name__ == "__main__":
    sys.exit(main())
