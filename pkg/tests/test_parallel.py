"""
NC-Chern - Task Fan-Out Tests

Unit tests for ordered process-pool execution and timing metrics.
"""

import unittest

from src.utils.parallel import run_ordered
from src.utils.performance import PerformanceTimer, format_perf_report, get_metrics, timed


def _square_or_fail(value: int) -> int:
    if value < 0:
        raise ValueError(f"negative input {value}")
    return value * value


class TestRunOrdered(unittest.TestCase):
    """Test cases for run_ordered."""

    def test_inline_order(self):
        outcomes = run_ordered(_square_or_fail, [3, 1, 2])
        self.assertEqual([outcome.value for outcome in outcomes], [9, 1, 4])
        self.assertTrue(all(outcome.ok for outcome in outcomes))

    def test_pool_matches_inline(self):
        tasks = list(range(12))
        inline = run_ordered(_square_or_fail, tasks, workers=1)
        pooled = run_ordered(_square_or_fail, tasks, workers=2)
        self.assertEqual([o.value for o in inline], [o.value for o in pooled])
        self.assertEqual([o.index for o in pooled], tasks)

    def test_failures_are_captured(self):
        for workers in (1, 2):
            outcomes = run_ordered(_square_or_fail, [2, -1, 3], workers=workers)
            self.assertEqual([o.ok for o in outcomes], [True, False, True])
            self.assertIn("ValueError", outcomes[1].error)
            self.assertIsNone(outcomes[1].value)
            self.assertEqual(outcomes[2].value, 9)

    def test_empty(self):
        self.assertEqual(run_ordered(_square_or_fail, []), [])


class TestPerformanceMetrics(unittest.TestCase):
    """Test cases for the timing registry."""

    def setUp(self):
        get_metrics().clear()

    def tearDown(self):
        get_metrics().clear()

    def test_timer_records_stage(self):
        with PerformanceTimer("test.stage"):
            sum(range(1000))
        stats = get_metrics().get_stats("test.stage")
        self.assertEqual(stats["count"], 1)
        self.assertGreaterEqual(stats["avg"], 0.0)

    def test_decorator_records_calls(self):
        @timed("test.decorated")
        def work(x):
            return x + 1

        self.assertEqual(work(1), 2)
        self.assertEqual(work(2), 3)
        self.assertEqual(get_metrics().get_stats("test.decorated")["count"], 2)
        self.assertIn("test.decorated", format_perf_report())


if __name__ == "__main__":
    unittest.main()
