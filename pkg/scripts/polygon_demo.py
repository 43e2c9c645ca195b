#!/usr/bin/env python3
"""Grow a field-driven polygon and write its trace and SVG picture.

Each level either pushes an outward triangle onto a side (when the
rasterized field weight under the triangle is positive) or subdivides
the side; the SVG shows the final shape inside its box.
"""
import argparse
import sys

from rfpm.cli import main as cli_main


def parse_args():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--N", type=int, default=64)
    p.add_argument("--q", type=int, default=2)
    p.add_argument("--eps", type=float, default=1.0)
    p.add_argument("--levels", type=int, default=4)
    p.add_argument("--variant", default="deterministic",
                   choices=["deterministic", "stochastic"])
    p.add_argument("--field-seed", type=int, default=0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default="results/polygon")
    return p.parse_args()


def main():
    a = parse_args()
    return cli_main([
        "polygon", "--N", str(a.N), "--q", str(a.q), "--eps", str(a.eps),
        "--levels", str(a.levels), "--variant", a.variant,
        "--field-seed", str(a.field_seed), "--seed", str(a.seed), "--out", a.out,
    ])


if __name__ == "__main__":
    sys.exit(main())
