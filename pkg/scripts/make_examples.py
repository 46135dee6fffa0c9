"""Write the worked examples to data/ as CLI-ready inputs.

    python scripts/make_examples.py [--out data]
"""

from __future__ import annotations

import argparse
import json
from pathlib import Path

from entangled import fixtures, relstore
from entangled.eql import format_queries


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default="data")
    args = ap.parse_args()
    out = Path(args.out)

    d = out / "flight_hotel"
    d.mkdir(parents=True, exist_ok=True)
    (d / "queries.eql").write_text(fixtures.FLIGHT_HOTEL, encoding="utf-8")
    relstore.dump(fixtures.flight_hotel_db(), d / "db")

    d = out / "six_query_dag"
    d.mkdir(parents=True, exist_ok=True)
    (d / "queries.eql").write_text(fixtures.SIX_QUERY_DAG, encoding="utf-8")
    relstore.dump(fixtures.six_query_db(), d / "db")

    d = out / "band_trip"
    d.mkdir(parents=True, exist_ok=True)
    (d / "queries.eql").write_text(format_queries(fixtures.band_trip(with_gwyneth=True)), encoding="utf-8")
    relstore.dump(fixtures.zurich_db(), d / "db")

    d = out / "movies"
    d.mkdir(parents=True, exist_ok=True)
    relstore.dump(fixtures.movies_db(), d / "db")
    (d / "config.json").write_text(json.dumps(fixtures.movies_config().to_json(), indent=2) + "\n")
    (d / "queries.json").write_text(
        json.dumps([q.to_json() for q in fixtures.movies_queries()], indent=2) + "\n"
    )

    (out / "two_clauses.cnf").write_text(
        "c (x1 | ~x2 | x3) & (x2 | ~x3 | ~x4)\np cnf 4 2\n1 -2 3 0\n2 -3 -4 0\n", encoding="utf-8"
    )
    print(f"wrote examples under {out}/")


if __name__ == "__main__":
    main()
