"""Shared test helpers: deterministic random traces of varying shape."""

from clocktrace.selfcheck import random_trace
from clocktrace.tracegen import SplitMix64
from clocktrace.trace import Trace

__all__ = ["random_trace", "corpus_trace"]


def corpus_trace(seed, max_events=500, max_threads=8, max_locks=4, max_vars=6):
    """One deterministic trace with shape parameters drawn from the seed:
    2..max_threads threads, 0..max_locks locks, 0..max_vars variables,
    and between max_events/10 and max_events events."""
    rng = SplitMix64(seed ^ 0xC0FFEE)
    threads = 2 + rng.below(max_threads - 1)
    locks = rng.below(max_locks + 1)
    variables = rng.below(max_vars + 1)
    lo = max(4, max_events // 10)
    events = lo + rng.below(max_events - lo + 1)
    if locks == 0 and variables == 0:
        variables = 1
    return random_trace(
        seed, events=events, threads=threads, locks=locks, variables=variables
    )
