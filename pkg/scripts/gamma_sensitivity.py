#!/usr/bin/env python3
"""Sweep the penalty weight on a fixed mesh and dump one CSV.

Defaults reproduce the conditioning-vs-gamma study: every method on the
n=40 box shrunk to a 1e-8 corner sliver.
"""

import argparse

from unfitted_bench import bench


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n", type=int, default=40)
    ap.add_argument("--sliver-eta", type=float, default=1e-8)
    ap.add_argument("--methods", default=",".join(bench.METHODS),
                    help="comma separated subset")
    ap.add_argument("--order", type=int, default=1)
    ap.add_argument("--out", default="gamma_sensitivity.csv")
    args = ap.parse_args()

    records = []
    for method in args.methods.split(","):
        cfg = bench.RunConfig(method=method.strip(), n=args.n,
                              sliver_eta=args.sliver_eta, order=args.order)
        records.extend(bench.sweep_gamma(cfg))
        print(f"{method.strip():10s} done ({len(records)} rows total)")
    bench.emit(records, "csv", args.out)
    print(f"wrote {args.out}")


if __name__ == "__main__":
    main()
