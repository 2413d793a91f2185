#!/usr/bin/env python3
"""
Basic usage: learn, verify and count with the built-in 3-torus.
"""

import logging
import sys
import tempfile
from pathlib import Path

import honeycomb
from honeycomb.rts import read_rts, word_neighbor
from honeycomb.schema import builtin_torus_434


def main():
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(name)s: %(message)s")
    print(f"honeycomb version: {honeycomb.__version__}")

    # Example 1: a built-in schema
    schema = builtin_torus_434()
    report = honeycomb.validate(schema)
    print(f"\n{schema.symbol}: {schema.type_count} tile type, faces {schema.face_counts}")
    print(f"  valid: {report.ok}")
    print(f"  hash: {schema.canonical_hash}")

    # Example 2: learn a verified GRTS
    result = honeycomb.learn(schema)
    print(f"\nLearned {result.states} states in {result.iterations} iterations ({result.elapsed:.1f}s)")
    print(f"  verified: {result.report.ok}")

    # Example 3: round trip through files
    with tempfile.TemporaryDirectory() as temp_dir:
        path = honeycomb.write_rts(result.rts, Path(temp_dir) / "torus.grts.json")
        rts = read_rts(path)
        print(f"\nWrote and read back {path.name}: equal = {rts == result.rts}")

    # Example 4: navigate tree words
    word = honeycomb.Word(0)
    for _ in range(2):
        face, _ = next(rts.states[rts.state_of(word)].children())
        word = word.child(face)
    print(f"\nNeighbors of {word}:")
    for face in schema.faces(0):
        print(f"  face {face}: {word_neighbor(rts, word, face)}")

    # Example 5: coordination sequence
    print("\nCoordination sequence:", ", ".join(map(str, honeycomb.coordination_from_rts(rts, 0, 10))))
    return 0


if __name__ == "__main__":
    sys.exit(main())
