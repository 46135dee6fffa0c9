"""Command line entry point: ``entangled <subcommand> ...``."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from entangled import bench, consistent_coord, eql, graphs, oracle, reductions, relstore, scc_coord
from entangled.selection import SelectionCriterion


def _emit(data, out: str | None) -> None:
    text = json.dumps(data, indent=2, default=str) + "\n"
    if out in (None, "-"):
        sys.stdout.write(text)
    else:
        Path(out).write_text(text, encoding="utf-8")


def _load_queries(args) -> eql.QuerySet:
    return eql.parse_file(args.queries, allow_empty_heads=args.allow_empty_heads)


def cmd_eval_scc(args) -> int:
    db = relstore.load(args.db)
    qs = _load_queries(args)
    result = scc_coord.evaluate(qs, db, SelectionCriterion.parse(args.select))
    _emit(result.to_json() if result else {"members": None}, args.out)
    return 0


def cmd_eval_consistent(args) -> int:
    db = relstore.load(args.db)
    cfg = consistent_coord.ConsistentConfig.from_json(json.loads(Path(args.config).read_text()))
    queries = consistent_coord.load_queries(json.loads(Path(args.queries).read_text()))
    result = consistent_coord.evaluate(queries, cfg, db, first=args.first)
    _emit(result.to_json(cfg) if result else {"value": None, "members": None}, args.out)
    return 0


def cmd_oracle(args) -> int:
    db = relstore.load(args.db)
    qs = _load_queries(args)
    limits = oracle.OracleLimits(args.max_queries, args.max_combinations)

    def entry(names, h):
        return {
            "members": sorted(names),
            "assignment": {k: str(v) for k, v in h.values_by_key().items()},
        }

    if args.max:
        best = next(oracle.iter_coordinating(qs, db, limits, descending=True), None)
        data = {"max_size": 0, "witness": None}
        if best is not None:
            data = {"max_size": len(best[0]), "witness": entry(*best)}
    else:
        data = {"sets": [entry(n, h) for n, h in oracle.find_all(qs, db, limits)]}
    _emit(data, args.out)
    return 0


def cmd_gen(args) -> int:
    f = reductions.load_dimacs(args.cnf)
    qs, db = reductions.GENERATORS[args.reduction](f)
    Path(args.out_queries).write_text(
        f"# {args.reduction} instance for {f}\n" + eql.format_queries(qs), encoding="utf-8"
    )
    relstore.dump(db, args.out_db)
    return 0


def cmd_bench(args) -> int:
    sizes = bench.parse_sizes(args.sizes)
    workloads = [
        bench.Workload(
            args.workload, s, args.seed, args.m0, args.m, args.flights_queries, args.flights_table, args.vary
        )
        for s in sizes
    ]
    records = []
    for w in workloads:
        recs = bench.run(w, reps=args.reps)
        records.extend(recs)
        if args.verbose:
            med = bench.medians(recs)[w.size]
            print(f"{w.kind} size={w.size} median_ms={med:.3f}", file=sys.stderr)
    if args.out in (None, "-"):
        bench.write_csv(records, sys.stdout)
    else:
        bench.write_csv(records, args.out)
    return 0


def cmd_check(args) -> int:
    qs = _load_queries(args)
    diagnostics = []
    if args.db:
        diagnostics = eql.validate(qs, relstore.load(args.db), allow_empty_heads=args.allow_empty_heads)
    ext = graphs.build_extended(qs)
    g = ext.collapse()
    dag = graphs.condense(g)
    unsafe = graphs.check_safety(ext)
    data = {
        "queries": len(qs),
        "safe": not unsafe,
        "unsafe_queries": unsafe,
        "unique": bool(not unsafe and graphs.check_uniqueness(g)),
        "strongly_connected": graphs.check_uniqueness(g),
        "components": [sorted(c) for c in dag.nodes],
        "diagnostics": diagnostics,
    }
    if args.dot:
        Path(args.dot).write_text(graphs.to_dot(ext, qs), encoding="utf-8")
    _emit(data, args.out)
    return 1 if diagnostics else 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="entangled", description="Evaluate and analyse sets of entangled queries.")
    sub = p.add_subparsers(dest="command", required=True)

    def queries_args(sp, db_required=True):
        sp.add_argument("--db", required=db_required, help="database manifest (JSON)")
        sp.add_argument("--queries", required=True, help=".eql query file")
        sp.add_argument("--allow-empty-heads", action="store_true", help="accept queries with no head atoms")
        sp.add_argument("--out", help="output file (default: stdout)")

    sp = sub.add_parser("eval-scc", help="coordinate a safe query set")
    queries_args(sp)
    sp.add_argument("--select", default="max", help="max | first | contains:<query> (default: max)")
    sp.set_defaults(func=cmd_eval_scc)

    sp = sub.add_parser("eval-consistent", help="coordinate consistent queries over one subject relation")
    sp.add_argument("--db", required=True)
    sp.add_argument("--config", required=True, help="JSON with the subject/friends relation layout")
    sp.add_argument("--queries", required=True, help="JSON list of user queries")
    sp.add_argument("--first", action="store_true", help="stop at the first value that works")
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_eval_consistent)

    sp = sub.add_parser("oracle", help="exhaustive search, small inputs only")
    queries_args(sp)
    sp.add_argument("--max", action="store_true", help="report only a largest coordinating set")
    sp.add_argument("--max-queries", type=int, default=oracle.OracleLimits.max_queries)
    sp.add_argument("--max-combinations", type=int, default=oracle.OracleLimits.max_combinations)
    sp.set_defaults(func=cmd_oracle)

    sp = sub.add_parser("gen", help="compile a 3-CNF formula into a query instance")
    sp.add_argument("--reduction", required=True, choices=sorted(reductions.GENERATORS))
    sp.add_argument("--cnf", required=True, help="DIMACS file")
    sp.add_argument("--out-queries", required=True)
    sp.add_argument("--out-db", required=True, help="directory for manifest and CSVs")
    sp.set_defaults(func=cmd_gen)

    sp = sub.add_parser("bench", help="time an algorithm on a synthetic workload")
    sp.add_argument("--workload", required=True, choices=bench.WORKLOADS)
    sp.add_argument("--sizes", required=True, help="a..b:step or a comma list")
    sp.add_argument("--reps", type=int, default=10)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--m0", type=int, default=2, help="scalefree: initial nodes")
    sp.add_argument("--m", type=int, default=2, help="scalefree: edges per new node")
    sp.add_argument("--flights-queries", type=int, default=50, help="flights: queries when varying the table")
    sp.add_argument("--flights-table", type=int, default=100, help="flights: table size when varying queries")
    sp.add_argument("--vary", choices=("table", "queries"), default="table", help="flights: which axis --sizes sets")
    sp.add_argument("--out", help="CSV file (default: stdout)")
    sp.add_argument("-v", "--verbose", action="store_true")
    sp.set_defaults(func=cmd_bench)

    sp = sub.add_parser("check", help="safety, uniqueness and schema checks")
    queries_args(sp, db_required=False)
    sp.add_argument("--dot", help="write the extended coordination graph as DOT")
    sp.set_defaults(func=cmd_check)
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (
        relstore.LoadError,
        relstore.SchemaError,
        eql.EqlSyntaxError,
        scc_coord.UnsafeInput,
        oracle.OracleLimitExceeded,
        ValueError,
        OSError,
    ) as exc:
        print(f"entangled {args.command}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
