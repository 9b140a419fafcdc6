"""Thread-pool scheduler for independent evaluations."""

import concurrent.futures
import logging
from typing import Callable, Dict, List, Optional, Sequence, TypeVar

logger = logging.getLogger(__name__)

T = TypeVar("T")
R = TypeVar("R")


class EvaluationScheduler:
    """
    Runs independent evaluations (frequencies, sea states, GA individuals)
    on a thread pool and returns results in submission order.

    Results never depend on completion order; reductions happen afterwards
    in index order.
    """

    def __init__(self, max_workers: int = 1, enable_parallel: bool = True):
        """
        Initialize the scheduler.

        Args:
            max_workers: Maximum worker threads
            enable_parallel: Whether to use the pool at all
        """
        self.max_workers = max(1, int(max_workers))
        self.enable_parallel = enable_parallel and self.max_workers > 1

    def map(
        self,
        func: Callable[[T], R],
        items: Sequence[T],
        on_done: Optional[Callable[[int], None]] = None,
    ) -> List[R]:
        """
        Apply func to every item.

        Args:
            func: Pure function of one item
            items: Inputs
            on_done: Called with the item index as each evaluation finishes

        Returns:
            Results in the same order as items

        Raises:
            Exception: The exception of the lowest-index failing item
        """
        if not self.enable_parallel or len(items) <= 1:
            results = []
            for i, item in enumerate(items):
                results.append(func(item))
                if on_done:
                    on_done(i)
            return results

        results: Dict[int, R] = {}
        errors: Dict[int, BaseException] = {}

        with concurrent.futures.ThreadPoolExecutor(max_workers=self.max_workers) as executor:
            future_to_index = {}
            for index, item in enumerate(items):
                future = executor.submit(func, item)
                future_to_index[future] = index

            for future in concurrent.futures.as_completed(future_to_index):
                index = future_to_index[future]
                try:
                    results[index] = future.result()
                except Exception as e:
                    errors[index] = e
                if on_done:
                    on_done(index)

        if errors:
            first = min(errors)
            logger.debug("%d of %d evaluations failed", len(errors), len(items))
            raise errors[first]

        return [results[i] for i in range(len(items))]
