"""Parallel execution of checks and lattice-sum terms."""

import asyncio
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, Iterable, List, Optional, Tuple

logger = logging.getLogger(__name__)


@dataclass
class Task:
    """A callable with its arguments."""

    fn: Callable[..., Any]
    args: Tuple[Any, ...] = ()
    kwargs: Dict[str, Any] = field(default_factory=dict)
    task_id: Optional[str] = None


class ParallelExecutor:
    """
    Run independent tasks on a thread pool and hand results back in submission order.

    Failed tasks come back as their exception object in place of a result; the
    caller decides whether to raise. numpy releases the GIL in the dense products,
    so threads are enough for the block-matrix work here.
    """

    def __init__(self, max_workers: int = 4):
        """
        Initialize parallel executor.

        Args:
            max_workers: Maximum number of parallel workers
        """
        if max_workers < 1:
            raise ValueError("max_workers must be >= 1")
        self.max_workers = max_workers
        self.executor = ThreadPoolExecutor(max_workers=max_workers)
        self.logger = logging.getLogger(f"qkz.{self.__class__.__name__}")

    def __enter__(self) -> "ParallelExecutor":
        return self

    def __exit__(self, exc_type, exc, tb) -> None:
        self.shutdown()

    def run_ordered(self, tasks: List[Task]) -> List[Any]:
        """
        Execute tasks in parallel.

        Args:
            tasks: List of Task objects

        Returns:
            Results in the same order as the input, exceptions in place
        """
        if not tasks:
            return []
        self.logger.debug(f"Executing {len(tasks)} tasks on {self.max_workers} workers")
        return asyncio.run(self._gather(tasks))

    def map_ordered(self, fn: Callable[[Any], Any], items: Iterable[Any]) -> List[Any]:
        """run_ordered for a single-argument function over items."""
        return self.run_ordered([Task(fn, (item,)) for item in items])

    async def _gather(self, tasks: List[Task]) -> List[Any]:
        results = await asyncio.gather(
            *(self._run_async(task) for task in tasks), return_exceptions=True
        )
        for i, result in enumerate(results):
            if isinstance(result, Exception):
                label = tasks[i].task_id or i
                self.logger.error(f"Task {label} failed: {result}")
        return list(results)

    async def _run_async(self, task: Task) -> Any:
        loop = asyncio.get_running_loop()
        return await loop.run_in_executor(self.executor, lambda: task.fn(*task.args, **task.kwargs))

    def shutdown(self):
        """Shutdown executor."""
        self.executor.shutdown(wait=True)
