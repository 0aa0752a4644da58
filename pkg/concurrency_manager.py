#!/usr/bin/env python3
"""
CONCURRENCY MANAGER
===================

Runs a pure function over disjoint chunks in worker processes and folds
the partial results in submission order, so the reduced value does not
depend on the worker count or on completion order.

At most `max_pending_per_worker` chunks per worker are in flight, which
keeps memory flat on long chunk streams.
"""

import time
from collections import deque
from concurrent.futures import Future, ProcessPoolExecutor
from typing import Any, Callable, Deque, Dict, Iterable, Optional, TypeVar
import logging

from config import default_workers

logger = logging.getLogger(__name__)

R = TypeVar("R")


class ConcurrencyManager:
    def __init__(self, max_workers: Optional[int] = None, max_pending_per_worker: int = 4):
        self.max_workers = max_workers if max_workers is not None else default_workers()
        if self.max_workers < 1:
            raise ValueError(f"max_workers must be >= 1, got {self.max_workers}")
        self.max_pending = self.max_workers * max_pending_per_worker
        self.chunks_submitted = 0
        self.chunks_completed = 0
        self.elapsed = 0.0

    def map_reduce(self, func: Callable[[Any], R], chunks: Iterable[Any],
                   reduce: Callable[[R, R], R], initial: R,
                   on_result: Optional[Callable[[R], None]] = None) -> R:
        """Fold reduce(acc, func(chunk)) over chunks, in chunk order.

        `on_result` sees the accumulator after each fold and may raise to
        stop the run; pending chunks are then cancelled.
        """
        start_time = time.time()
        acc = initial
        try:
            if self.max_workers == 1:
                for chunk in chunks:
                    self.chunks_submitted += 1
                    acc = self._fold(acc, func(chunk), reduce, on_result)
            else:
                acc = self._map_reduce_pool(func, chunks, reduce, acc, on_result)
        finally:
            self.elapsed += time.time() - start_time
        logger.debug("Completed %d chunks on %d workers in %.2fs",
                     self.chunks_completed, self.max_workers, self.elapsed)
        return acc

    def _map_reduce_pool(self, func, chunks, reduce, acc, on_result):
        pending: Deque[Future] = deque()
        executor = ProcessPoolExecutor(max_workers=self.max_workers)
        try:
            for chunk in chunks:
                pending.append(executor.submit(func, chunk))
                self.chunks_submitted += 1
                if len(pending) >= self.max_pending:
                    acc = self._fold(acc, pending.popleft().result(), reduce, on_result)
            while pending:
                acc = self._fold(acc, pending.popleft().result(), reduce, on_result)
        except BaseException:
            logger.warning("Cancelling %d pending chunks", len(pending))
            for future in pending:
                future.cancel()
            executor.shutdown(wait=True, cancel_futures=True)
            raise
        executor.shutdown(wait=True)
        return acc

    def _fold(self, acc, result, reduce, on_result):
        acc = reduce(acc, result)
        self.chunks_completed += 1
        if on_result is not None:
            on_result(acc)
        return acc

    def get_stats(self) -> Dict[str, Any]:
        return {
            'max_workers': self.max_workers,
            'chunks_submitted': self.chunks_submitted,
            'chunks_completed': self.chunks_completed,
            'elapsed_seconds': round(self.elapsed, 3),
        }
