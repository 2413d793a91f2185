import asyncio

import pytest

from honeycomb.aio import coordination_sequence_async, find_manifolds_async, learn_async, verify_async
from honeycomb.config import SearchConfig
from honeycomb.geometry import SchlafliSymbol
from honeycomb.rts import serialize_rts

pytestmark = pytest.mark.asyncio


# Learning on a worker thread gives the same GRTS as the synchronous run
async def test_learn(torus_schema, torus_rts):
    result = await learn_async(torus_schema)
    assert result.report.ok
    assert serialize_rts(result.rts) == serialize_rts(torus_rts)


# A verified GRTS stays verified when checked from the event loop
async def test_verify(torus_schema, torus_rts):
    report = await verify_async(torus_rts, torus_schema, threads=2)
    assert report.ok
    assert len(report.transducers) == 6


# Several coordination sequences can be awaited together
async def test_gather_coordination(torus_rts):
    short, longer = await asyncio.gather(
        coordination_sequence_async(torus_rts, 0, 2),
        coordination_sequence_async(torus_rts, 0, 4),
    )
    assert short == [1, 6, 18]
    assert longer[:3] == short
    assert longer[-1] == 66


# The manifold search runs off the loop too
async def test_find_manifolds():
    reports = await find_manifolds_async(SchlafliSymbol(3, 3, 6), 3, config=SearchConfig(limit=1), with_quotients=False)
    assert len(reports) == 1
    assert reports[0].quotient_schemas == {}
