#!/usr/bin/env python3
"""Solver benchmark: fixed point vs exhaustive grid vs multi-start ascent.

For each m, draws random mean vectors (theta_i ~ U[0,6] for m=2, U[0,3]
otherwise) and reports per-method mean solve time, the fraction of
instances where the fixed point achieves at least the other method's
power, and the largest power deficit.  Timings are hardware-dependent and
informational; the power comparisons are the point.
"""

import argparse

from repower.cli import main as cli_main


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--ms", type=int, nargs="*", default=[2, 3, 4, 5])
    ap.add_argument("--instances", type=int, default=1000)
    ap.add_argument("--alpha", type=float, default=0.05)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    for m in args.ms:
        n = args.instances if m <= 3 else max(args.instances // 5, 1)
        print(f"== m={m}, {n} instances ==")
        cli_main(["bench", "--m", str(m), "--instances", str(n),
                  "--seed", str(args.seed), "--alpha", str(args.alpha)])
        print()


if __name__ == "__main__":
    main()
