"""Command line front end.

Exit codes: 0 success, 2 configuration error (also used by argparse),
3 solver failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace

from unfitted_bench import bench
from unfitted_bench.aggregation import AggregationError
from unfitted_bench.bench import BenchRecord, ConfigError, RunConfig
from unfitted_bench.geometry import DegenerateGeometryError, SliverSearchError
from unfitted_bench.system import SolverFailure

__all__ = ["main"]


def _floats(text):
    return tuple(float(t) for t in text.split(",") if t)


def _ints(text):
    return tuple(int(t) for t in text.split(",") if t)


def _methods(text):
    return tuple(t.strip() for t in text.split(",") if t.strip())


def _add_common(p, default_n):
    p.add_argument("--problem", default="poisson", choices=["poisson", "elasticity"])
    p.add_argument("--bc", default="nitsche", choices=["nitsche", "mixed"])
    p.add_argument("--geometry", default="box", choices=["box", "circle"])
    p.add_argument(
        "--sliver-eta",
        type=float,
        default=bench.DEFAULT_SLIVER_ETA,
        help="target minimum cut volume fraction for geometry placement",
    )
    p.add_argument("--method", type=_methods, default=("S-Ag",),
                   help="comma separated method names")
    p.add_argument("--order", type=int, default=1)
    p.add_argument("--eta0", type=float, default=1.0)
    p.add_argument("--ustar", default="full", choices=["full", "exterior"])
    p.add_argument("--out", default=None, help="output path (default: stdout)")
    p.add_argument("--format", default="csv", choices=["csv", "json"])
    return default_n


def build_parser():
    parser = argparse.ArgumentParser(prog="unfitted-bench")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="single case")
    _add_common(run, 8)
    run.add_argument("--gamma", type=float, default=1.0)
    run.add_argument("--n", type=int, default=8)

    sg = sub.add_parser("sweep-gamma", help="gamma sensitivity on a fixed mesh")
    _add_common(sg, 40)
    sg.add_argument("--gamma", type=_floats, default=bench.GAMMA_GRID,
                    help="comma separated gamma grid")
    sg.add_argument("--n", type=int, default=40)

    sh = sub.add_parser("sweep-h", help="mesh refinement sweep")
    _add_common(sh, 8)
    sh.add_argument("--gamma", type=_floats, default=(1.0,),
                    help="comma separated gamma list")
    sh.add_argument("--n", type=_ints, default=bench.N_GRID,
                    help="comma separated mesh sizes")

    return parser


def _base_config(args, method):
    return RunConfig(
        problem=args.problem,
        bc=args.bc,
        geometry=args.geometry,
        sliver_eta=args.sliver_eta,
        method=method,
        order=args.order,
        eta0=args.eta0,
        ustar=args.ustar,
    )


def _collect(args):
    records = []
    for method in args.method:
        config = _base_config(args, method)
        if args.command == "run":
            config = replace(config, gamma=args.gamma, n=args.n)
            records.append(bench.run_case(config))
        elif args.command == "sweep-gamma":
            config = replace(config, n=args.n)
            records.extend(bench.sweep_gamma(config, args.gamma))
        else:
            records.extend(bench.sweep_refinement(config, args.n, args.gamma))
    return records


def _write(records, args):
    if args.out is not None:
        bench.emit(records, args.format, args.out)
        return
    if args.format == "csv":
        sys.stdout.write(bench.records_to_csv(records))
    else:
        rows = [{k: getattr(r, k) for k in bench.COLUMNS} for r in records]
        sys.stdout.write(json.dumps(rows, indent=2) + "\n")


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        records = _collect(args)
        _write(records, args)
    except SolverFailure as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return 3
    except (
        ConfigError,
        ValueError,
        SliverSearchError,
        DegenerateGeometryError,
        AggregationError,
    ) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
