#!/usr/bin/env python3
"""
Unit tests for ConcurrencyManager
"""

import operator
import unittest

from concurrency_manager import ConcurrencyManager


def square(x):
    return x * x


def explode(x):
    if x == 3:
        raise ValueError("chunk 3")
    return x


class TestMapReduce(unittest.TestCase):
    """Test ordered map-reduce"""

    def test_inline_and_pool_agree(self):
        """Test one and several workers give the same fold"""
        chunks = list(range(50))
        expected = sum(x * x for x in chunks)
        for workers in (1, 2, 3):
            manager = ConcurrencyManager(workers, max_pending_per_worker=2)
            self.assertEqual(manager.map_reduce(square, chunks, operator.add, 0), expected)

    def test_submission_order(self):
        """Test a non-commutative fold sees chunks in submission order"""
        manager = ConcurrencyManager(3)
        result = manager.map_reduce(square, range(10), lambda acc, r: acc + [r], [])
        self.assertEqual(result, [x * x for x in range(10)])

    def test_on_result_can_stop(self):
        """Test an exception from on_result ends the run"""
        def stop(acc):
            if acc > 10:
                raise RuntimeError("cap")

        for workers in (1, 2):
            with self.assertRaises(RuntimeError):
                ConcurrencyManager(workers).map_reduce(square, range(100), operator.add, 0,
                                                       on_result=stop)

    def test_worker_error_propagates(self):
        """Test a failing chunk surfaces its exception"""
        with self.assertRaises(ValueError):
            ConcurrencyManager(2).map_reduce(explode, range(6), operator.add, 0)

    def test_stats(self):
        """Test chunk counters"""
        manager = ConcurrencyManager(1)
        manager.map_reduce(square, range(4), operator.add, 0)
        stats = manager.get_stats()
        self.assertEqual(stats['chunks_submitted'], 4)
        self.assertEqual(stats['chunks_completed'], 4)
        self.assertEqual(stats['max_workers'], 1)

    def test_rejects_zero_workers(self):
        """Test a worker count below one is refused"""
        with self.assertRaises(ValueError):
            ConcurrencyManager(0)


if __name__ == '__main__':
    unittest.main()
