"""Record-parallel map with deterministic, input-ordered results."""

from __future__ import annotations

import multiprocessing
from typing import Callable, Iterable, Sequence, TypeVar

T = TypeVar("T")
R = TypeVar("R")

_current_fn = None


def _invoke(item):
    return _current_fn(item)


def _init(fn):
    global _current_fn
    _current_fn = fn


def map_ordered(fn: Callable[[T], R], items: Sequence[T], workers: int = 1) -> list[R]:
    """Apply `fn` to every item; results keep input order regardless of workers.

    `fn` must be pure. With workers > 1 a fork pool is used, so results are
    byte-identical to the sequential path.
    """
    if workers <= 1 or len(items) < 2:
        return [fn(item) for item in items]
    ctx = multiprocessing.get_context("fork")
    chunk = max(1, len(items) // (workers * 4))
    with ctx.Pool(workers, initializer=_init, initargs=(fn,)) as pool:
        return pool.map(_invoke, items, chunksize=chunk)
