"""Run the scaling sweeps and report the median-time linear fit per workload.

    python scripts/run_benchmarks.py [--out results] [--reps 10] [--quick]
"""

from __future__ import annotations

import argparse
from pathlib import Path

from entangled import bench

SWEEPS = {
    "list": dict(kind="list", sizes=range(10, 101, 10)),
    "scalefree": dict(kind="scalefree", sizes=range(100, 1001, 100)),
    "flights_table": dict(kind="flights", sizes=range(100, 1001, 100), vary="table"),
    "flights_queries": dict(kind="flights", sizes=range(10, 101, 10), vary="queries"),
}


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default="results")
    ap.add_argument("--reps", type=int, default=10)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--quick", action="store_true", help="first three sizes of each sweep, 3 reps")
    args = ap.parse_args()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    reps = 3 if args.quick else args.reps

    for name, sw in SWEEPS.items():
        sizes = list(sw["sizes"])[: 3 if args.quick else None]
        workloads = [bench.Workload(sw["kind"], s, args.seed, vary=sw.get("vary", "table")) for s in sizes]
        records = bench.sweep(workloads, reps=reps)
        bench.write_csv(records, out / f"{name}.csv")
        med = bench.medians(records)
        r2 = bench.linear_r2(list(med), list(med.values()))
        print(f"{name:16s} sizes={sizes[0]}..{sizes[-1]} median_ms@max={med[sizes[-1]]:.2f} R2={r2:.3f}")


if __name__ == "__main__":
    main()
