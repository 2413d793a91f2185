#!/usr/bin/env python3
"""
Search manifolds of a symbol over a small field and print what was found.

    python examples/manifold_search.py 3,3,6 3
    python examples/manifold_search.py 4,3,6 3 --squared
"""

import argparse
import sys

from honeycomb import NoRoots, SchlafliSymbol, SearchConfig, find_manifolds, validate


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("symbol")
    parser.add_argument("prime", type=int)
    parser.add_argument("--squared", action="store_true")
    parser.add_argument("--limit", type=int, default=2)
    args = parser.parse_args()

    symbol = SchlafliSymbol.parse(args.symbol)
    try:
        reports = find_manifolds(symbol, args.prime, 2 if args.squared else 1, SearchConfig(limit=args.limit))
    except NoRoots as e:
        print(f"Field does not fit {symbol}: {e}")
        return 3

    if not reports:
        print(f"No manifold of {symbol} found")
        return 3

    for report in reports:
        print(f"\n{report.cells} cells, group of order {len(report.manifold.group)}")
        print(f"  coset formula: {report.coset_formula}")
        print(f"  isomorphism hash: {report.isomorphism_hash}")
        print(f"  schema valid: {validate(report.schema).ok}")
        for cells, schema in sorted(report.quotient_schemas.items()):
            print(f"  quotient with {cells} cells, valid: {validate(schema).ok}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
