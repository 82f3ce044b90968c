"""Power-law step sizes ``alpha(n) = a/(n+1+s)^p`` and ``beta(n) = b/(n+1+s)^q``.

Indexing starts at ``n = 0``.  A schedule is admissible when

* ``alpha(0) < 1`` and ``beta(0) < 1``                       (``initial_step``)
* ``sum alpha = sum beta = inf``, i.e. ``p <= 1``           (``divergent``)
* ``sum alpha^2 + beta^2 < inf``, i.e. ``q > 1/2``          (``square_summable``)
* ``alpha(n) / beta(n) -> 0``, i.e. ``p > q``               (``ratio``)
* both sequences strictly decrease                           (``monotone``)

The infinite-sum conditions are certified by the exponents; numeric prefix
sums in :class:`ScheduleReport` are informational.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidScheduleError


def _power_law(c: float, e: float, s: int, n):
    # math.pow per element: numpy's vectorised power can differ from the scalar
    # result in the last bit, and a step must not depend on how it was computed
    arr = np.asarray(n, dtype=float)
    vals = [c / math.pow(k + 1.0 + s, e) for k in arr.ravel().tolist()]
    return np.array(vals, dtype=float).reshape(arr.shape)


@dataclass(frozen=True)
class StepSchedule:
    a: float = 0.9
    p: float = 1.0
    b: float = 0.9
    q: float = 0.6
    offset: int = 0

    def alpha(self, n):
        return _power_law(self.a, self.p, self.offset, n)

    def beta(self, n):
        return _power_law(self.b, self.q, self.offset, n)

    def check(self) -> None:
        """Raise :class:`InvalidScheduleError` naming the first violated condition."""
        if self.offset < 0 or int(self.offset) != self.offset:
            raise InvalidScheduleError("initial_step", f"offset must be a nonnegative integer, got {self.offset}")
        if not (self.a > 0 and self.b > 0):
            raise InvalidScheduleError("initial_step", "step scales a and b must be positive")
        if self.p > 1:
            raise InvalidScheduleError(
                "divergent", f"sum of alpha(n) must diverge, which needs p <= 1 (got p={self.p})"
            )
        if self.q <= 0.5:
            raise InvalidScheduleError(
                "square_summable",
                f"sum of alpha(n)^2 + beta(n)^2 must be finite, which needs q > 0.5 (got q={self.q})",
            )
        if self.p <= self.q:
            raise InvalidScheduleError(
                "ratio", f"ratio condition alpha(n)/beta(n) -> 0 needs p > q (got p={self.p}, q={self.q})"
            )
        if not (self.alpha(0) < 1 and self.beta(0) < 1):
            raise InvalidScheduleError("initial_step", "alpha(0) and beta(0) must both be < 1")


def step_values(sched: StepSchedule, n: int) -> tuple[float, float]:
    return float(sched.alpha(n)), float(sched.beta(n))


@dataclass(frozen=True)
class ScheduleReport:
    horizon: int
    ratio_tail: float
    sq_partial_sum: float
    sum_alpha: float
    sum_beta: float
    monotone_ok: bool

    def lines(self) -> list[str]:
        return [
            f"horizon         {self.horizon}",
            f"alpha/beta at N {self.ratio_tail:.6g}",
            f"sum a^2+b^2     {self.sq_partial_sum:.12g}",
            f"sum alpha       {self.sum_alpha:.12g}",
            f"sum beta        {self.sum_beta:.12g}",
            f"monotone        {'ok' if self.monotone_ok else 'VIOLATED'}",
        ]


def validate(sched: StepSchedule, horizon: int) -> ScheduleReport:
    """Analytic checks plus prefix sums over ``n = 0..horizon``."""
    if horizon < 1000:
        raise ValueError("horizon must be at least 1000")
    sched.check()
    n = np.arange(horizon + 1)
    al, be = sched.alpha(n), sched.beta(n)
    monotone = bool(np.all(np.diff(al) < 0) and np.all(np.diff(be) < 0))
    return ScheduleReport(
        horizon=horizon,
        ratio_tail=float((sched.a / sched.b) * (horizon + 1.0 + sched.offset) ** (sched.q - sched.p)),
        sq_partial_sum=math.fsum(np.concatenate([al * al, be * be])),
        sum_alpha=math.fsum(al),
        sum_beta=math.fsum(be),
        monotone_ok=monotone,
    )
