#!/usr/bin/env python
"""
Run the pipeline from an event loop with the awaitable wrappers.
"""

import asyncio

from honeycomb.aio import coordination_sequence_async, learn_async, verify_async
from honeycomb.config import LearnerConfig
from honeycomb.schema import builtin_seifert_weber_535, builtin_torus_434


async def main():
    """Learn two schemas concurrently, then verify and count each."""
    schemas = {"torus-434": builtin_torus_434(), "seifert-weber-535": builtin_seifert_weber_535()}
    config = LearnerConfig(ball_radius=4)

    results = await asyncio.gather(*(learn_async(schema, config, threads=2) for schema in schemas.values()))

    for (name, schema), result in zip(schemas.items(), results):
        print(f"\n{name}: {result.states} states after {result.iterations} iterations")
        report = await verify_async(result.rts, schema, threads=2)
        print(f"  verified again: {report.ok} ({len(report.cycles)} edge cycles)")
        terms = await coordination_sequence_async(result.rts, 0, 5)
        print(f"  shells: {terms}")


if __name__ == "__main__":
    asyncio.run(main())
