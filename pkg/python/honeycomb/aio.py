"""
Awaitable wrappers around the long-running entry points.

The pipeline itself is synchronous and CPU bound; these helpers run it on a
worker thread so it can be awaited from an event loop without blocking it.
"""

import asyncio
import functools
import logging
from typing import Any, Callable, List, Optional, TypeVar

from honeycomb.config import DEFAULT_TOLERANCES, LearnerConfig, SearchConfig, Tolerances
from honeycomb.geometry import SchlafliSymbol
from honeycomb.learner import LearnResult, learn
from honeycomb.quotient import ManifoldReport, find_manifolds
from honeycomb.rts import Rts, coordination_from_rts
from honeycomb.schema import HoneycombSchema
from honeycomb.verifier import VerificationReport, verify_rts

logger = logging.getLogger(__name__)

T = TypeVar("T")


async def _run(func: Callable[..., T], *args: Any, **kwargs: Any) -> T:
    loop = asyncio.get_running_loop()
    logger.debug("running %s on a worker thread", func.__name__)
    return await loop.run_in_executor(None, functools.partial(func, *args, **kwargs))


async def find_manifolds_async(
    symbol: SchlafliSymbol,
    prime: int,
    degree: int = 1,
    config: Optional[SearchConfig] = None,
    with_quotients: bool = True,
) -> List[ManifoldReport]:
    return await _run(find_manifolds, symbol, prime, degree, config, with_quotients)


async def learn_async(
    schema: HoneycombSchema,
    config: LearnerConfig = LearnerConfig(),
    tolerances: Tolerances = DEFAULT_TOLERANCES,
    verify: bool = True,
    threads: int = 1,
) -> LearnResult:
    return await _run(learn, schema, config, tolerances, verify=verify, threads=threads)


async def verify_async(
    rts: Rts, schema: HoneycombSchema, config: LearnerConfig = LearnerConfig(), threads: int = 1
) -> VerificationReport:
    return await _run(verify_rts, rts, schema, config, threads=threads)


async def coordination_sequence_async(rts: Rts, root_type: int, n: int) -> List[int]:
    return await _run(coordination_from_rts, rts, root_type, n)
