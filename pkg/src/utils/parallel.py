"""
NC-Chern - Ordered Task Fan-Out

Runs independent tasks (disorder realizations, grid points) in a process pool
and hands results back in task order, so reductions never depend on the
schedule.
"""

import logging
import os
from concurrent.futures import ProcessPoolExecutor, as_completed
from dataclasses import dataclass
from typing import Any, Callable, Generic, List, Optional, Sequence, TypeVar


logger = logging.getLogger(__name__)

CPU_COUNT = min(os.cpu_count() or 4, 8)

T = TypeVar("T")


@dataclass
class TaskOutcome(Generic[T]):
    """Result slot of one task: value on success, error text otherwise."""
    index: int
    value: Optional[T] = None
    error: Optional[str] = None
    exception: Optional[BaseException] = None

    @property
    def ok(self) -> bool:
        return self.error is None


def run_ordered(
    func: Callable[[Any], T],
    tasks: Sequence[Any],
    workers: int = 1,
    label: str = "tasks",
) -> List[TaskOutcome[T]]:
    """
    Evaluate func on every task and return outcomes in task order.

    func and the tasks must be picklable (module-level function, plain data)
    when workers > 1. Failures are captured per task, never raised here.

    Args:
        func: Worker function
        tasks: Task payloads
        workers: Process count; <= 1 runs inline
        label: Name used in log lines

    Returns:
        One TaskOutcome per task, ordered like tasks
    """
    outcomes: List[TaskOutcome[T]] = [TaskOutcome(index=k) for k in range(len(tasks))]
    if not tasks:
        return outcomes

    workers = min(max(1, int(workers)), CPU_COUNT, len(tasks))
    if workers > 1:
        logger.info(f"[...] Running {len(tasks)} {label} on {workers} workers")
        with ProcessPoolExecutor(max_workers=workers) as executor:
            futures = {executor.submit(func, task): k for k, task in enumerate(tasks)}
            for future in as_completed(futures):
                k = futures[future]
                try:
                    outcomes[k].value = future.result()
                except Exception as error:
                    logger.error(f"[ERROR] {label} #{k} failed: {error}")
                    outcomes[k].error = f"{type(error).__name__}: {error}"
                    outcomes[k].exception = error
    else:
        # Inline for one worker
        for k, task in enumerate(tasks):
            try:
                outcomes[k].value = func(task)
            except Exception as error:
                logger.error(f"[ERROR] {label} #{k} failed: {error}")
                outcomes[k].error = f"{type(error).__name__}: {error}"
                outcomes[k].exception = error

    failed = sum(1 for outcome in outcomes if not outcome.ok)
    logger.debug(f"[DONE] {label}: {len(tasks) - failed} ok, {failed} failed")
    return outcomes
