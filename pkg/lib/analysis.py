"""Relative-error metrics against reference series and observed convergence orders."""

import logging
import math
import numpy as np
from collections.abc import Callable, Sequence
from dataclasses import dataclass
from enum import StrEnum
from lib.exceptions import DegenerateError, InvalidConfig, NoOverlap, ZeroReferenceSum
from lib.ivp import FixedStepConfig, IvpProblem, Stepper, Trajectory, integrate_fixed

logger = logging.getLogger(__name__)

Pair = tuple[float, float]


class ReferenceKind(StrEnum):
    EXPERIMENTAL = "experimental"
    EMPIRICAL = "empirical"


@dataclass(frozen=True)
class ReferenceSeries:
    kind: ReferenceKind
    points: tuple[Pair, ...]

    def __post_init__(self):
        if len(self.points) < 2:
            raise InvalidConfig(f"{self.kind} reference needs at least 2 points, got {len(self.points)}")
        for t, value in self.points:
            if not (math.isfinite(t) and math.isfinite(value)):
                raise InvalidConfig(f"{self.kind} reference has a non-finite point ({t!r}, {value!r})")
        for (t_prev, _), (t, _) in zip(self.points, self.points[1:], strict=False):
            if not t > t_prev:
                raise InvalidConfig(f"{self.kind} reference t must strictly increase, got {t_prev!r} then {t!r}")

    @property
    def ts(self) -> list[float]:
        return [t for t, _ in self.points]

    @property
    def values(self) -> list[float]:
        return [v for _, v in self.points]

    @classmethod
    def sampled(cls, kind: ReferenceKind, oracle: Callable[[float], float], x0: float, x_end: float, n: int) -> "ReferenceSeries":
        return cls(kind, tuple((float(t), oracle(float(t))) for t in np.linspace(x0, x_end, n)))


@dataclass(frozen=True)
class Alignment:
    pairs: tuple[Pair, ...]
    truncated: bool


@dataclass(frozen=True)
class ErrorReport:
    signed_relative: float
    mean_abs_relative: float
    n_points_compared: int
    blowup_truncated: bool


@dataclass(frozen=True)
class OrderRow:
    h: float
    error: float
    observed_order: float | None


def align_series(trajectory: Trajectory, reference: ReferenceSeries) -> Alignment:
    """Pair each reference value with the trajectory interpolated linearly at its t.

    Only reference points inside the trajectory's x-range are kept. When the run stopped early,
    the points past its last sample are dropped and the alignment is flagged as truncated.
    """
    xs, ys = trajectory.xs, trajectory.ys
    lo, hi = xs[0], xs[-1]
    inside = [(t, v) for t, v in reference.points if lo <= t <= hi]
    truncated = not trajectory.completed and any(t > hi for t in reference.ts)
    if not inside:
        if truncated:
            return Alignment((), True)
        raise NoOverlap(f"{reference.kind} reference [{reference.ts[0]!r}, {reference.ts[-1]!r}] misses [{lo!r}, {hi!r}]")

    estimates = np.interp([t for t, _ in inside], xs, ys)
    return Alignment(tuple((v, float(x)) for (_, v), x in zip(inside, estimates, strict=True)), truncated)


def error_wrt_reference(pairs: Sequence[Pair]) -> float:
    """sum(R_i - X_i) / sum(R_i). Signed: over- and underestimates cancel."""
    if not pairs:
        raise NoOverlap("no (reference, estimate) pairs to compare")
    total = math.fsum(r for r, _ in pairs)
    if total == 0:
        raise ZeroReferenceSum("reference values sum to zero")
    return math.fsum(r - x for r, x in pairs) / total


def mean_abs_relative(pairs: Sequence[Pair]) -> float:
    """sum(|R_i - X_i|) / sum(|R_i|)."""
    if not pairs:
        raise NoOverlap("no (reference, estimate) pairs to compare")
    total = math.fsum(abs(r) for r, _ in pairs)
    if total == 0:
        raise ZeroReferenceSum("reference values are all zero")
    return math.fsum(abs(r - x) for r, x in pairs) / total


def compare(trajectory: Trajectory, reference: ReferenceSeries) -> ErrorReport:
    alignment = align_series(trajectory, reference)
    if not alignment.pairs:
        return ErrorReport(math.nan, math.nan, 0, True)
    pairs = alignment.pairs
    return ErrorReport(error_wrt_reference(pairs), mean_abs_relative(pairs), len(pairs), alignment.truncated)


def estimate_convergence_order(
    problem: IvpProblem,
    exact: Callable[[float], float],
    stepper: Stepper,
    h_values: Sequence[float],
) -> list[OrderRow]:
    """Global error at x_end for each h and the order observed between consecutive h's.

    Args:
        problem: Problem to integrate.
        exact: Analytic solution, evaluated at ``problem.x_end``.
        stepper: Fixed-step one-step method.
        h_values: Strictly decreasing step sizes, at least two.

    Returns:
        One row per h; the first row, and any row next to a zero error, has no order.

    Raises:
        InvalidConfig: If ``h_values`` is too short or not strictly decreasing.
        DegenerateError: If a run does not complete or no order can be computed.
    """
    if len(h_values) < 2:
        raise InvalidConfig(f"need at least two step sizes, got {len(h_values)}")
    for h_prev, h in zip(h_values, h_values[1:], strict=False):
        if not h < h_prev:
            raise InvalidConfig(f"step sizes must strictly decrease, got {h_prev!r} then {h!r}")

    target = exact(problem.x_end)
    errors = []
    for h in h_values:
        trajectory = integrate_fixed(problem, stepper, FixedStepConfig(h))
        if not trajectory.completed:
            raise DegenerateError(f"run with h={h!r} ended with {trajectory.status} at x={trajectory.x_fail!r}")
        errors.append(abs(trajectory.final[1] - target))

    rows = [OrderRow(h_values[0], errors[0], None)]
    for i in range(1, len(h_values)):
        order = None
        if errors[i] > 0 and errors[i - 1] > 0:
            order = math.log(errors[i - 1] / errors[i]) / math.log(h_values[i - 1] / h_values[i])
        else:
            logger.info("global error vanished near h=%r; order undefined", h_values[i])
        rows.append(OrderRow(h_values[i], errors[i], order))

    if all(row.observed_order is None for row in rows):
        raise DegenerateError("global error is zero; the method is exact on this problem")
    return rows
