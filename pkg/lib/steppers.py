"""Fixed-step one-step methods and the tableau-driven explicit Runge-Kutta engine.

Each method supplies the increment function phi of y_next = y + phi * h. Tableau
coefficients are kept as exact fractions and every linear combination of slopes is
summed over the row's common denominator, ``y + h * (n_1*k_1 + ... + n_s*k_s) / d``.
The dedicated steppers are written in that same arithmetic, so a tableau and its
hand-written counterpart produce identical floats.
"""

import logging
import math
from collections.abc import Sequence
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from lib.exceptions import InvalidTableau, ZeroDenominator
from lib.ivp import CorrectorConfig, RhsFunction, finite_slope

logger = logging.getLogger(__name__)

Coefficient = Fraction | int | float | str

WEIGHT_SUM_TOL = 1e-12


@dataclass(frozen=True)
class StepResult:
    y_next: float
    rhs_evaluations: int
    corrector_iterations: int = 0
    final_epsilon_a: float | None = None
    epsilon_undefined: bool = False


def _fraction(value: Coefficient) -> Fraction:
    if isinstance(value, float):
        if not math.isfinite(value):
            raise InvalidTableau(f"coefficient {value!r} is not finite")
    return Fraction(value)


@dataclass(frozen=True)
class ButcherTableau:
    """Explicit Runge-Kutta coefficients.

    ``weights`` are a_1..a_n, ``nodes`` are p_1..p_{n-1} and ``coupling`` row i holds
    q_{i,1}..q_{i,i}, so stage i+1 reads only the slopes of stages 1..i.
    """

    name: str
    weights: tuple[Fraction, ...]
    nodes: tuple[Fraction, ...] = ()
    coupling: tuple[tuple[Fraction, ...], ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "weights", tuple(_fraction(a) for a in self.weights))
        object.__setattr__(self, "nodes", tuple(_fraction(p) for p in self.nodes))
        object.__setattr__(self, "coupling", tuple(tuple(_fraction(q) for q in row) for row in self.coupling))

        n = len(self.weights)
        if n < 1:
            raise InvalidTableau(f"{self.name}: a tableau needs at least one stage")
        if len(self.nodes) != n - 1:
            raise InvalidTableau(f"{self.name}: expected {n - 1} nodes for {n} stages, got {len(self.nodes)}")
        if len(self.coupling) != n - 1:
            raise InvalidTableau(f"{self.name}: expected {n - 1} coupling rows for {n} stages, got {len(self.coupling)}")
        for i, row in enumerate(self.coupling, start=1):
            if len(row) != i:
                raise InvalidTableau(f"{self.name}: coupling row {i} must have {i} entries (explicit method), got {len(row)}")
        if abs(float(sum(self.weights)) - 1.0) > WEIGHT_SUM_TOL:
            raise InvalidTableau(f"{self.name}: weights sum to {float(sum(self.weights))!r}, not 1")

    @property
    def stages(self) -> int:
        return len(self.weights)


@lru_cache(maxsize=256)
def integer_row(coefficients: tuple[Fraction, ...]) -> tuple[int, tuple[tuple[int, int], ...]]:
    """Common denominator d and the (index, c_j * d) pairs of the nonzero coefficients."""
    denominator = math.lcm(*(c.denominator for c in coefficients if c))
    return denominator, tuple((j, c.numerator * (denominator // c.denominator)) for j, c in enumerate(coefficients) if c)


def advance(base: float, h: float, coefficients: tuple[Fraction, ...], slopes: Sequence[float]) -> float:
    """base + h * sum(c_j * k_j), with the sum taken over the coefficients' common denominator."""
    denominator, terms = integer_row(coefficients)
    if not terms:
        return base
    (j, n), *rest = terms
    total = n * slopes[j]
    for j, n in rest:
        total = total + n * slopes[j]
    return base + h * total / denominator


def offset(x: float, h: float, node: Fraction) -> float:
    return x + h * node.numerator / node.denominator


def stage_slopes(tableau: ButcherTableau, rhs: RhsFunction, x: float, y: float, h: float) -> list[float]:
    """k_1..k_n of one step; each k reads the slopes before it (the RK recurrence)."""
    slopes = [finite_slope(rhs, x, y)]
    for node, row in zip(tableau.nodes, tableau.coupling, strict=True):
        slopes.append(finite_slope(rhs, offset(x, h, node), advance(y, h, row, slopes)))
    return slopes


def general_rk_step(tableau: ButcherTableau, rhs: RhsFunction, x: float, y: float, h: float) -> StepResult:
    slopes = stage_slopes(tableau, rhs, x, y, h)
    return StepResult(advance(y, h, tableau.weights, slopes), tableau.stages)


F = Fraction

EULER = ButcherTableau("euler", weights=(1,))
HEUN = ButcherTableau("heun", weights=(F(1, 2), F(1, 2)), nodes=(1,), coupling=((1,),))
MIDPOINT = ButcherTableau("midpoint", weights=(0, 1), nodes=(F(1, 2),), coupling=((F(1, 2),),))
RK4 = ButcherTableau(
    "rk4",
    weights=(F(1, 6), F(1, 3), F(1, 3), F(1, 6)),
    nodes=(F(1, 2), F(1, 2), 1),
    coupling=((F(1, 2),), (0, F(1, 2)), (0, 0, 1)),
)


def euler_step(rhs: RhsFunction, x: float, y: float, h: float) -> StepResult:
    return StepResult(y + h * finite_slope(rhs, x, y), 1)


def relative_change_percent(current: float, previous: float) -> float:
    """|eps_a| = |(current - previous) / current| * 100%."""
    if current == 0.0:
        raise ZeroDenominator(f"relative change against zero (previous iterate {previous!r})")
    return abs((current - previous) / current) * 100.0


def heun_step(rhs: RhsFunction, x: float, y: float, h: float, corrector: CorrectorConfig | None = None) -> StepResult:
    """Predictor y0 = y + f(x, y) h, corrector y + (f(x, y) + f(x + h, y0)) / 2 * h.

    With ``corrector`` set, the corrector is re-applied to its own output until the
    percent relative change drops to ``tol_percent`` or ``max_iters`` re-applications ran.
    """
    k1 = finite_slope(rhs, x, y)
    x_next = x + h
    predicted = y + h * k1
    y_next = y + h * (k1 + finite_slope(rhs, x_next, predicted)) / 2
    if corrector is None:
        return StepResult(y_next, 2)

    iterations = 0
    previous = predicted
    while True:
        try:
            epsilon = relative_change_percent(y_next, previous)
        except ZeroDenominator:
            logger.warning("heun corrector: iterate reached exactly 0 at x=%r, eps_a undefined", x_next)
            return StepResult(y_next, 2 + iterations, iterations, None, epsilon_undefined=True)
        if epsilon <= corrector.tol_percent or iterations >= corrector.max_iters:
            return StepResult(y_next, 2 + iterations, iterations, epsilon)
        previous = y_next
        y_next = y + h * (k1 + finite_slope(rhs, x_next, previous)) / 2
        iterations += 1


def midpoint_step(rhs: RhsFunction, x: float, y: float, h: float) -> StepResult:
    k1 = finite_slope(rhs, x, y)
    k2 = finite_slope(rhs, x + h / 2, y + h * k1 / 2)
    return StepResult(y + h * k2, 2)


def rk4_step(rhs: RhsFunction, x: float, y: float, h: float) -> StepResult:
    k1 = finite_slope(rhs, x, y)
    k2 = finite_slope(rhs, x + h / 2, y + h * k1 / 2)
    k3 = finite_slope(rhs, x + h / 2, y + h * k2 / 2)
    k4 = finite_slope(rhs, x + h, y + h * k3)
    return StepResult(y + h * (k1 + 2 * k2 + 2 * k3 + k4) / 6, 4)


FIXED_STEPPERS = {
    "euler": euler_step,
    "heun": heun_step,
    "midpoint": midpoint_step,
    "rk4": rk4_step,
}

TABLEAUS = {
    "euler": EULER,
    "heun": HEUN,
    "midpoint": MIDPOINT,
    "rk4": RK4,
}
