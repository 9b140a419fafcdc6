"""Tests for the evaluation scheduler."""

import time

import pytest

from wecfarm_cli.scheduler import EvaluationScheduler


@pytest.mark.unit
class TestEvaluationScheduler:
    """Test suite for EvaluationScheduler."""

    def test_sequential_when_single_worker(self):
        scheduler = EvaluationScheduler(max_workers=1)

        assert not scheduler.enable_parallel
        assert scheduler.map(lambda x: x * x, [1, 2, 3]) == [1, 4, 9]

    def test_results_in_submission_order(self):
        scheduler = EvaluationScheduler(max_workers=4)

        def slow_for_small(x):
            time.sleep(0.01 * (5 - x))
            return x

        assert scheduler.map(slow_for_small, [0, 1, 2, 3, 4]) == [0, 1, 2, 3, 4]

    def test_on_done_sees_every_index(self):
        seen = []
        EvaluationScheduler(max_workers=3).map(lambda x: x, list(range(6)), on_done=seen.append)

        assert sorted(seen) == list(range(6))

    def test_lowest_index_error_is_raised(self):
        def fail_odd(x):
            if x % 2:
                raise ValueError(f"bad {x}")
            return x

        with pytest.raises(ValueError, match="bad 1"):
            EvaluationScheduler(max_workers=4).map(fail_odd, [0, 1, 2, 3])

    def test_empty_input(self):
        assert EvaluationScheduler(max_workers=2).map(lambda x: x, []) == []
