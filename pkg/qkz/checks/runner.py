"""Suite runner: seeded cases, worker pool, ordered report collection."""

import logging
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Optional, Tuple

from ..config import SuiteConfig
from ..execution import ParallelExecutor, Task
from ..logging_config import log_with_context
from .base import Check, CheckReport
from .report import write_reports

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_CONFIG = 2


@dataclass
class SuiteResult:
    """Reports in submission order plus the process exit status."""

    reports: List[CheckReport] = field(default_factory=list)
    exit_code: int = EXIT_OK
    output: Optional[Path] = None
    wall_time: float = 0.0

    @property
    def passed(self) -> bool:
        return self.exit_code == EXIT_OK

    @property
    def failures(self) -> List[CheckReport]:
        return [r for r in self.reports if not r.passed]


def build_checks(config: SuiteConfig) -> List[Check]:
    from . import CHECKS

    return [CHECKS[name](config) for name in config.checks]


def build_tasks(config: SuiteConfig) -> List[Tuple[Check, Task]]:
    """One task per (check, case); case draws come from each check's own generator."""
    tasks = []
    for check in build_checks(config):
        for k, case in enumerate(check.cases(check.rng())):
            tasks.append((check, Task(check.execute, kwargs=case, task_id=f"{check.name}[{k}]")))
    return tasks


def _crashed(check: Check, task: Task, error: BaseException) -> CheckReport:
    return CheckReport(
        check=check.name,
        inputs=task.kwargs,
        residuals={},
        tolerance=check.tolerance,
        passed=False,
        wall_time=0.0,
        seed=check.config.seed,
        error=f"{type(error).__name__}: {error}",
    )


def run_suite(config: SuiteConfig, write: bool = True) -> SuiteResult:
    """
    Run every requested check over its seeded cases.

    The configuration is validated before anything is computed, so a ConfigError
    reaches the caller with no report written. Failing checks still produce full
    reports; the exit code is 0 when all pass and 1 otherwise.
    """
    config.validate()
    start = time.perf_counter()
    pairs = build_tasks(config)
    tasks = [task for _, task in pairs]
    pool = config.workers
    workers = pool if len(tasks) == 1 else min(pool, max(len(tasks), 1))
    logger.info(f"Running {len(tasks)} check invocations for {', '.join(config.checks)} "
                f"on {workers} worker(s)")

    if workers <= 1:
        results = []
        for task in tasks:
            try:
                results.append(task.fn(*task.args, **task.kwargs))
            except Exception as e:
                logger.error(f"Task {task.task_id} failed: {e}")
                results.append(e)
    elif len(tasks) == 1:
        # A lone invocation spends the pool on its lattice-sum terms instead.
        with ParallelExecutor(workers) as executor:
            task = tasks[0]
            try:
                results = [task.fn(executor=executor, **task.kwargs)]
            except Exception as e:
                logger.error(f"Task {task.task_id} failed: {e}")
                results = [e]
    else:
        with ParallelExecutor(workers) as executor:
            results = executor.run_ordered(tasks)

    reports = []
    for (check, task), result in zip(pairs, results):
        if isinstance(result, BaseException):
            result = _crashed(check, task, result)
        reports.append(result)

    exit_code = EXIT_OK if all(r.passed for r in reports) else EXIT_FAILED
    output = write_reports(reports, config.output) if write else None
    elapsed = time.perf_counter() - start
    failed = sum(1 for r in reports if not r.passed)
    log_with_context(
        logger, logging.INFO,
        f"Suite finished in {elapsed:.2f}s: {len(reports) - failed} passed, {failed} failed",
        checks=list(config.checks), passed=len(reports) - failed, failed=failed, seed=config.seed,
    )
    return SuiteResult(reports=reports, exit_code=exit_code, output=output, wall_time=elapsed)
