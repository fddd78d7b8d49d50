"""Order-preserving process-pool map over independent trials."""

from __future__ import annotations

import multiprocessing as mp
from concurrent.futures import ProcessPoolExecutor

_SHARED = None


def _init(shared):
    global _SHARED
    _SHARED = shared


def _call(args):
    fn, task = args
    return fn(_SHARED, task)


def parallel_map(fn, tasks, *, shared, workers: int = 1) -> list:
    """Return ``[fn(shared, t) for t in tasks]``.

    With ``workers > 1`` every worker process owns a private copy of
    ``shared`` (a process is stateful, so copies must never be shared).
    Results come back in task order, so the output never depends on the
    worker count.
    """
    tasks = list(tasks)
    if workers <= 1 or len(tasks) <= 1:
        return [fn(shared, t) for t in tasks]
    ctx = mp.get_context("fork")
    chunk = max(1, len(tasks) // (4 * workers))
    with ProcessPoolExecutor(max_workers=workers, mp_context=ctx,
                             initializer=_init, initargs=(shared,)) as pool:
        return list(pool.map(_call, [(fn, t) for t in tasks], chunksize=chunk))
