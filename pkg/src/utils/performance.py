"""
NC-Chern - Stage Timing

Wall-clock timing of named numerical stages (diagonalization, derivations,
matrix products, quadrature). Measurements land in a process-local registry
and are summarized by format_perf_report() at the end of a verbose run.

Usage:
    from src.utils.performance import timed, PerformanceTimer

    @timed("chern.realspace")
    def realspace_chern(...):
        ...

    with PerformanceTimer("hamiltonian.eigh") as timer:
        ...
    # timer.elapsed_ms available after the block
"""

import logging
import time
from functools import wraps
from typing import Any, Callable, Dict, List, Optional

logger = logging.getLogger(__name__)

DEFAULT_SLOW_MS = 60_000.0


class PerformanceMetrics:
    """
    Registry of stage timings.

    One instance per process; worker processes keep their own.
    """

    _instance: Optional["PerformanceMetrics"] = None

    def __new__(cls) -> "PerformanceMetrics":
        if cls._instance is None:
            cls._instance = super().__new__(cls)
            cls._instance._metrics: Dict[str, List[float]] = {}
            cls._instance._enabled = True
        return cls._instance

    def record(self, stage: str, elapsed_ms: float) -> None:
        if self._enabled:
            self._metrics.setdefault(stage, []).append(elapsed_ms)

    def get_stats(self, stage: str) -> Dict[str, float]:
        """
        Statistics for one stage.

        Returns:
            Dict with count, total, avg, max
        """
        measurements = self._metrics.get(stage, [])
        if not measurements:
            return {"count": 0, "total": 0.0, "avg": 0.0, "max": 0.0}
        total = sum(measurements)
        return {
            "count": len(measurements),
            "total": total,
            "avg": total / len(measurements),
            "max": max(measurements),
        }

    def get_all_stats(self) -> Dict[str, Dict[str, float]]:
        return {stage: self.get_stats(stage) for stage in self._metrics}

    def clear(self) -> None:
        self._metrics.clear()

    def enable(self) -> None:
        self._enabled = True

    def disable(self) -> None:
        self._enabled = False


def get_metrics() -> PerformanceMetrics:
    """Get the process-wide PerformanceMetrics instance."""
    return PerformanceMetrics()


class PerformanceTimer:
    """Context manager timing one stage; logs at WARNING above log_threshold_ms."""

    def __init__(self, stage: str, log_threshold_ms: float = DEFAULT_SLOW_MS):
        self.stage = stage
        self.log_threshold_ms = log_threshold_ms
        self.start_time: float = 0.0
        self.elapsed_ms: float = 0.0

    def __enter__(self) -> "PerformanceTimer":
        self.start_time = time.perf_counter()
        return self

    def __exit__(self, exc_type, exc_val, exc_tb) -> None:
        self.elapsed_ms = (time.perf_counter() - self.start_time) * 1000
        get_metrics().record(self.stage, self.elapsed_ms)
        if self.elapsed_ms >= self.log_threshold_ms:
            logger.warning(f"[PERF] {self.stage}: {self.elapsed_ms / 1000:.1f}s (slow stage)")
        else:
            logger.debug(f"[PERF] {self.stage}: {self.elapsed_ms:.1f}ms")


def timed(stage: str, log_threshold_ms: float = DEFAULT_SLOW_MS) -> Callable:
    """
    Decorator timing every call of a function as one stage.

    Args:
        stage: Registry key
        log_threshold_ms: WARNING threshold in milliseconds
    """
    def decorator(func: Callable) -> Callable:
        @wraps(func)
        def wrapper(*args, **kwargs) -> Any:
            with PerformanceTimer(stage, log_threshold_ms):
                return func(*args, **kwargs)
        return wrapper
    return decorator


def format_perf_report() -> str:
    """Multi-line stage report, slowest total first."""
    all_stats = get_metrics().get_all_stats()
    if not all_stats:
        return "[PERF] No stage timings recorded"

    lines = ["[PERF] Stage report:", "-" * 60]
    for stage, stats in sorted(all_stats.items(), key=lambda item: item[1]["total"], reverse=True):
        lines.append(
            f"  {stage}: total={stats['total']:.1f}ms, avg={stats['avg']:.1f}ms, "
            f"max={stats['max']:.1f}ms, count={stats['count']}"
        )
    lines.append("-" * 60)
    return "\n".join(lines)
