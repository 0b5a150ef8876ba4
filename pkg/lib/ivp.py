"""Initial-value problem data model and the fixed-step integration driver.

Every one-step method advances a solution the same way: new value = old value + slope * step.
The driver below owns the grid, the final partial step, evaluation counting and blow-up
detection; the steppers in ``lib.steppers`` only supply the slope.
"""

import inspect
import logging
import math
from collections.abc import Callable
from dataclasses import dataclass
from enum import StrEnum
from functools import partial
from lib.exceptions import InvalidConfig, NonFiniteEvaluation
from typing import Any, Protocol

logger = logging.getLogger(__name__)

RhsFunction = Callable[[float, float], float]

# |y| beyond this is treated as divergence even while still representable
BLOWUP_LIMIT = 1e12

_GRID_RTOL = 1e-9
_FD_REL_STEP = 1e-6


class Stepper(Protocol):
    def __call__(self, rhs: RhsFunction, x: float, y: float, h: float, /) -> Any: ...


class Status(StrEnum):
    COMPLETED = "completed"
    BLOW_UP = "blow_up"
    STEP_UNDERFLOW = "step_underflow"


@dataclass(frozen=True)
class IvpProblem:
    """dy/dx = rhs(x, y) with y(x0) = y0, integrated over [x0, x_end]."""

    rhs: RhsFunction
    x0: float
    y0: float
    x_end: float

    def __post_init__(self):
        for name in ("x0", "y0", "x_end"):
            if not math.isfinite(getattr(self, name)):
                raise InvalidConfig(f"{name} must be finite, got {getattr(self, name)!r}")
        if not self.x_end > self.x0:
            raise InvalidConfig(f"empty interval: x_end={self.x_end!r} must exceed x0={self.x0!r}")

    @property
    def span(self) -> float:
        return self.x_end - self.x0


@dataclass(frozen=True)
class CorrectorConfig:
    """Iterated Heun corrector: stop when |eps_a| <= tol_percent or after max_iters re-applications."""

    max_iters: int = 10
    tol_percent: float = 1e-6

    def __post_init__(self):
        if self.max_iters < 0:
            raise InvalidConfig(f"max_iters must be >= 0, got {self.max_iters!r}")
        if not self.tol_percent > 0:
            raise InvalidConfig(f"tol_percent must be > 0, got {self.tol_percent!r}")


@dataclass(frozen=True)
class FixedStepConfig:
    h: float
    corrector: CorrectorConfig | None = None

    def __post_init__(self):
        if not (math.isfinite(self.h) and self.h > 0):
            raise InvalidConfig(f"step size h must be positive and finite, got {self.h!r}")


@dataclass(frozen=True)
class RunStats:
    rhs_evaluations: int = 0
    steps_accepted: int = 0
    steps_rejected: int = 0


@dataclass(frozen=True)
class Trajectory:
    """Accepted (x, y) samples of one integration run.

    ``x_fail`` is set for BlowUp and StepUnderflow and equals the abscissa of the last
    finite sample, i.e. where the failing step started.
    """

    samples: tuple[tuple[float, float], ...]
    status: Status
    stats: RunStats
    x_fail: float | None = None

    @property
    def xs(self) -> list[float]:
        return [x for x, _ in self.samples]

    @property
    def ys(self) -> list[float]:
        return [y for _, y in self.samples]

    @property
    def final(self) -> tuple[float, float]:
        return self.samples[-1]

    @property
    def completed(self) -> bool:
        return self.status is Status.COMPLETED


class CountingRhs:
    """Wraps an rhs and counts every call, including calls made by a step that later fails."""

    def __init__(self, rhs: RhsFunction):
        self.rhs = rhs
        self.calls = 0

    def __call__(self, x: float, y: float) -> float:
        self.calls += 1
        return self.rhs(x, y)


def diverged(y: float) -> bool:
    return not math.isfinite(y) or abs(y) > BLOWUP_LIMIT


def grid_steps(span: float, h: float) -> int:
    """Number of steps covering ``span``; a trailing remainder becomes one shortened step."""
    ratio = span / h
    nearest = round(ratio)
    if nearest >= 1 and math.isclose(ratio, nearest, rel_tol=_GRID_RTOL):
        return nearest
    return math.ceil(ratio)


def integrate_fixed(problem: IvpProblem, stepper: Stepper, config: FixedStepConfig) -> Trajectory:
    """Advance ``problem`` from x0 to x_end with a one-step method at constant step size.

    The last step is shortened to land exactly on x_end. A non-finite or runaway y ends
    the run with status BlowUp; the trajectory keeps every sample up to the failure.
    """
    if config.h > problem.span * (1 + _GRID_RTOL):
        raise InvalidConfig(f"step size h={config.h!r} exceeds the interval length {problem.span!r}")

    step = stepper
    if config.corrector is not None:
        if "corrector" not in inspect.signature(stepper).parameters:
            raise InvalidConfig(f"{getattr(stepper, '__name__', stepper)!r} does not take a corrector")
        step = partial(stepper, corrector=config.corrector)

    rhs = CountingRhs(problem.rhs)
    n_steps = grid_steps(problem.span, config.h)
    x, y = problem.x0, problem.y0
    samples = [(x, y)]

    for i in range(n_steps):
        last = i == n_steps - 1
        h = problem.x_end - x if last else config.h
        try:
            y_next = step(rhs, x, y, h).y_next
        except NonFiniteEvaluation as exc:
            logger.info("blow-up: non-finite slope at x=%r (from step starting at x=%r)", exc.x, x)
            return Trajectory(tuple(samples), Status.BLOW_UP, RunStats(rhs.calls, i), x_fail=x)
        if diverged(y_next):
            logger.info("blow-up: y=%r after the step starting at x=%r", y_next, x)
            return Trajectory(tuple(samples), Status.BLOW_UP, RunStats(rhs.calls, i), x_fail=x)
        x = problem.x_end if last else problem.x0 + (i + 1) * config.h
        y = y_next
        samples.append((x, y))

    return Trajectory(tuple(samples), Status.COMPLETED, RunStats(rhs.calls, n_steps))


def finite_slope(rhs: RhsFunction, x: float, y: float) -> float:
    try:
        value = rhs(x, y)
    except (OverflowError, ZeroDivisionError) as exc:
        raise NonFiniteEvaluation(x, y) from exc
    if not math.isfinite(value):
        raise NonFiniteEvaluation(x, y, value)
    return value


def estimate_local_truncation_error(problem: IvpProblem, x: float, y: float, h: float) -> float:
    """Approximate local truncation error of one Euler step, f'(x, y) / 2! * h**2.

    The total derivative f' = df/dx + f * df/dy is taken by central differences, with
    perturbations max(1e-6, 1e-6*|x|) in x and max(1e-6, 1e-6*|y|) in y.
    """
    if not h > 0:
        raise InvalidConfig(f"step size h must be positive, got {h!r}")
    f = problem.rhs
    dx = max(_FD_REL_STEP, _FD_REL_STEP * abs(x))
    dy = max(_FD_REL_STEP, _FD_REL_STEP * abs(y))

    slope = finite_slope(f, x, y)
    dfdx = (finite_slope(f, x + dx, y) - finite_slope(f, x - dx, y)) / (2 * dx)
    dfdy = (finite_slope(f, x, y + dy) - finite_slope(f, x, y - dy)) / (2 * dy)
    return (dfdx + slope * dfdy) / 2 * h**2
