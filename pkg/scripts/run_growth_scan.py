#!/usr/bin/env python3
"""Disorder-averaged greedy-animal growth scan over box sizes.

Produces the mean-score series, its log-vs-loglog fit, and plot files
under the output directory. Defaults mirror the release gate (q=2,
annealed optimizer, N up to 32) but scale to larger runs.
"""
import argparse
import sys

from rfpm.cli import main as cli_main


def parse_args():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--N", default="4,8,16,32", help="comma-separated box half-sides")
    p.add_argument("--q", type=int, default=2)
    p.add_argument("--eps", type=float, default=1.0)
    p.add_argument("--samples", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--method", default="anneal", choices=["exact", "greedy", "anneal"])
    p.add_argument("--out", default="results/growth")
    return p.parse_args()


def main():
    a = parse_args()
    return cli_main([
        "thm2", "--N", a.N, "--q", str(a.q), "--eps", str(a.eps),
        "--method", a.method, "--samples", str(a.samples), "--seed", str(a.seed),
        "--out", a.out,
    ])


if __name__ == "__main__":
    sys.exit(main())
