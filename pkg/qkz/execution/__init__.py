"""Parallel execution framework."""

from .parallel_executor import ParallelExecutor, Task

__all__ = ["ParallelExecutor", "Task"]
