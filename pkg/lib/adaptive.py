"""Embedded 5(4) Runge-Kutta pair with error-controlled step size."""

import logging
import math
from dataclasses import dataclass, replace
from fractions import Fraction as F
from lib.exceptions import InvalidConfig, NonFiniteEvaluation
from lib.ivp import CountingRhs, IvpProblem, RhsFunction, RunStats, Status, Trajectory, diverged
from lib.steppers import ButcherTableau, advance, stage_slopes

logger = logging.getLogger(__name__)

# fifth-order solution; its weights double as the last coupling row (first same as last)
DORMAND_PRINCE = ButcherTableau(
    "rk45",
    weights=(F(35, 384), 0, F(500, 1113), F(125, 192), F(-2187, 6784), F(11, 84), 0),
    nodes=(F(1, 5), F(3, 10), F(4, 5), F(8, 9), 1, 1),
    coupling=(
        (F(1, 5),),
        (F(3, 40), F(9, 40)),
        (F(44, 45), F(-56, 15), F(32, 9)),
        (F(19372, 6561), F(-25360, 2187), F(64448, 6561), F(-212, 729)),
        (F(9017, 3168), F(-355, 33), F(46732, 5247), F(49, 176), F(-5103, 18656)),
        (F(35, 384), 0, F(500, 1113), F(125, 192), F(-2187, 6784), F(11, 84)),
    ),
)

EMBEDDED_WEIGHTS = (F(5179, 57600), 0, F(7571, 16695), F(393, 640), F(-92097, 339200), F(187, 2100), F(1, 40))

ORDER = 5


@dataclass(frozen=True)
class AdaptiveConfig:
    """Tolerances and step bounds; ``None`` step bounds are filled from the interval by ``resolved``."""

    rel_tol: float = 1e-6
    abs_tol: float = 1e-9
    h_initial: float | None = None
    h_min: float | None = None
    h_max: float | None = None
    safety: float = 0.9
    growth_limit: float = 5.0
    shrink_limit: float = 0.2

    def __post_init__(self):
        if not self.rel_tol > 0:
            raise InvalidConfig(f"rel_tol must be > 0, got {self.rel_tol!r}")
        if not self.abs_tol >= 0:
            raise InvalidConfig(f"abs_tol must be >= 0, got {self.abs_tol!r}")
        if not 0 < self.safety < 1:
            raise InvalidConfig(f"safety must lie in (0, 1), got {self.safety!r}")
        if not 0 < self.shrink_limit < 1 < self.growth_limit:
            raise InvalidConfig(
                f"need 0 < shrink_limit < 1 < growth_limit, got {self.shrink_limit!r} and {self.growth_limit!r}"
            )
        for name in ("h_initial", "h_min", "h_max"):
            value = getattr(self, name)
            if value is not None and not (math.isfinite(value) and value > 0):
                raise InvalidConfig(f"{name} must be positive and finite, got {value!r}")
        if None not in (self.h_min, self.h_initial, self.h_max) and not self.h_min <= self.h_initial <= self.h_max:
            raise InvalidConfig(
                f"need h_min <= h_initial <= h_max, got {self.h_min!r}, {self.h_initial!r}, {self.h_max!r}"
            )

    def resolved(self, span: float) -> "AdaptiveConfig":
        h_max = self.h_max if self.h_max is not None else span
        h_initial = self.h_initial if self.h_initial is not None else min(span / 100, h_max)
        h_min = self.h_min if self.h_min is not None else min(span * 1e-12, h_initial)
        return replace(self, h_initial=h_initial, h_min=h_min, h_max=h_max)


@dataclass(frozen=True)
class StepOutcome:
    """One attempted step. On rejection y5 and y4 are not usable; the caller keeps its old y."""

    accepted: bool
    y5: float
    y4: float
    err_est: float
    h_used: float
    h_next: float
    rhs_evaluations: int


def error_ratio(y: float, y5: float, y4: float, config: AdaptiveConfig) -> float:
    """|y5 - y4| scaled by abs_tol + rel_tol * max(|y|, |y5|); <= 1 means the step is acceptable."""
    diff = abs(y5 - y4)
    scale = config.abs_tol + config.rel_tol * max(abs(y), abs(y5))
    if scale == 0:
        return 0.0 if diff == 0 else math.inf
    return diff / scale


def step_factor(err_est: float, config: AdaptiveConfig) -> float:
    if err_est == 0:
        return config.growth_limit
    factor = config.safety * err_est ** (-1 / ORDER)
    return min(config.growth_limit, max(config.shrink_limit, factor))


def _rejected(y: float, h: float, config: AdaptiveConfig) -> StepOutcome:
    return StepOutcome(False, y, y, math.inf, h, max(h * config.shrink_limit, config.h_min), DORMAND_PRINCE.stages)


def dopri45_step(rhs: RhsFunction, x: float, y: float, h: float, config: AdaptiveConfig) -> StepOutcome:
    """Attempt one step of size h and propose the next step size.

    ``config`` must be resolved. A non-finite slope or solution rejects the step with an
    infinite error estimate; the caller decides whether the shrunk step is still usable.
    """
    if not (math.isfinite(h) and h > 0):
        raise InvalidConfig(f"step size h must be positive and finite, got {h!r}")

    try:
        slopes = stage_slopes(DORMAND_PRINCE, rhs, x, y, h)
    except NonFiniteEvaluation as exc:
        logger.debug("rk45: non-finite slope at x=%r, rejecting h=%r", exc.x, h)
        return _rejected(y, h, config)

    y5 = advance(y, h, DORMAND_PRINCE.weights, slopes)
    if not math.isfinite(y5):
        return _rejected(y, h, config)
    y4 = advance(y, h, EMBEDDED_WEIGHTS, slopes)

    err_est = error_ratio(y, y5, y4, config)
    h_next = min(config.h_max, max(config.h_min, h * step_factor(err_est, config)))
    return StepOutcome(err_est <= 1, y5, y4, err_est, h, h_next, DORMAND_PRINCE.stages)


def integrate_adaptive(problem: IvpProblem, config: AdaptiveConfig | None = None) -> Trajectory:
    """Integrate with the embedded pair, landing exactly on x_end.

    Rejected attempts at h_min (or with h below the floating-point resolution of x) end
    the run with StepUnderflow; a runaway accepted value ends it with BlowUp.
    """
    config = (config or AdaptiveConfig()).resolved(problem.span)
    rhs = CountingRhs(problem.rhs)
    x, y = problem.x0, problem.y0
    h = config.h_initial
    samples = [(x, y)]
    accepted = rejected = 0

    def stats() -> RunStats:
        return RunStats(rhs.calls, accepted, rejected)

    while x < problem.x_end:
        remaining = problem.x_end - x
        landing = x + h >= problem.x_end or remaining - h < config.h_min
        if landing:
            h = remaining

        outcome = dopri45_step(rhs, x, y, h, config)
        if outcome.accepted:
            accepted += 1
            x = problem.x_end if landing else x + h
            y = outcome.y5
            if diverged(y):
                logger.info("rk45 blow-up: y=%r at x=%r", y, x)
                return Trajectory(tuple(samples), Status.BLOW_UP, stats(), x_fail=samples[-1][0])
            samples.append((x, y))
            h = outcome.h_next
            continue

        rejected += 1
        logger.debug("rk45: rejected h=%r at x=%r (err=%r)", h, x, outcome.err_est)
        if h <= config.h_min or x + outcome.h_next == x:
            logger.info("rk45 step underflow at x=%r (h=%r)", x, h)
            return Trajectory(tuple(samples), Status.STEP_UNDERFLOW, stats(), x_fail=x)
        h = outcome.h_next

    return Trajectory(tuple(samples), Status.COMPLETED, stats())
