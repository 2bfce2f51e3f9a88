"""Wall-clock and deterministic virtual-clock budgets.

The virtual clock advances only by explicit charges from the planners, with
unit costs roughly calibrated to real per-operation cost on a desktop. It
exists so that sequential runs are bit-for-bit reproducible: a trial's
"elapsed time" and its timeout decisions then depend only on the work
performed, never on the host.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

# Approximate per-operation costs in (virtual) seconds.
COST_GROW_ITER = 2.0e-3
COST_MMP_ITER = 4.0e-4
COST_MMP_EXTEND = 1.2e-3
COST_GAIT_SEGMENT = 2.0e-3
COST_JUNCTION = 1.0e-3
COST_ROUTE_SEARCH = 2.0e-3


class RealClock:
    """Monotonic wall clock; explicit charges are no-ops."""

    def now(self) -> float:
        return time.perf_counter()

    def charge(self, dt: float) -> None:
        pass


class VirtualClock:
    """Deterministic clock that advances only when charged."""

    def __init__(self):
        self._t = 0.0

    def now(self) -> float:
        return self._t

    def charge(self, dt: float) -> None:
        self._t += dt


@dataclass
class Budget:
    """A deadline against a clock, shared by a planning run and its sub-planners."""

    clock: object
    limit: float
    _start: float = field(init=False)

    def __post_init__(self):
        if self.limit <= 0.0:
            raise ValueError("budget limit must be > 0")
        self._start = self.clock.now()

    def elapsed(self) -> float:
        return self.clock.now() - self._start

    def remaining(self) -> float:
        return self.limit - self.elapsed()

    def exceeded(self) -> bool:
        return self.elapsed() >= self.limit

    def charge(self, dt: float) -> None:
        self.clock.charge(dt)


def unlimited() -> Budget:
    return Budget(RealClock(), float("inf"))
