#!/usr/bin/env python3
"""Concentration study of the greedy-animal score around its median.

Estimates exceedance fractions above median + u over many disorder
samples and writes them next to the sub-Gaussian reference exp(-u^2/2).
"""
import argparse
import sys

from rfpm.cli import main as cli_main


def parse_args():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--N", type=int, default=8)
    p.add_argument("--q", type=int, default=2)
    p.add_argument("--eps", type=float, default=1.0)
    p.add_argument("--u", default="1,2,3")
    p.add_argument("--samples", type=int, default=10_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--method", default="greedy", choices=["exact", "greedy", "anneal"])
    p.add_argument("--out", default="results/tails")
    return p.parse_args()


def main():
    a = parse_args()
    return cli_main([
        "tail", "--N", str(a.N), "--q", str(a.q), "--eps", str(a.eps),
        "--method", a.method, "--u", a.u, "--samples", str(a.samples),
        "--seed", str(a.seed), "--out", a.out,
    ])


if __name__ == "__main__":
    sys.exit(main())
