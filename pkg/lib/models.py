"""Case-study ODE models, their right-hand sides and closed-form solutions.

Each model is a frozen dataclass validated on construction. ``MODELS`` is the registry the
scenario loader, the convergence command and the fixture generator resolve names through.
"""

import math
from collections.abc import Callable
from dataclasses import dataclass, field, fields
from lib.exceptions import ValidationError
from lib.ivp import RhsFunction
from typing import Any


def _require(condition: bool, name: str, message: str) -> None:
    if not condition:
        raise ValidationError(name, message)


def _require_finite(model: Any, prefix: str = "") -> None:
    for f in fields(model):
        value = getattr(model, f.name)
        if isinstance(value, float | int) and not math.isfinite(value):
            raise ValidationError(f"{prefix}{f.name}", f"must be finite, got {value!r}")


@dataclass(frozen=True)
class LogisticModel:
    """dP/dt = r P (1 - P/K)."""

    r: float
    K: float
    P0: float

    def __post_init__(self):
        _require_finite(self)
        _require(self.r > 0, "r", f"growth rate must be > 0, got {self.r!r}")
        _require(self.K > 0, "K", f"carrying capacity must be > 0, got {self.K!r}")
        _require(self.P0 > 0, "P0", f"initial population must be > 0, got {self.P0!r}")


@dataclass(frozen=True)
class AmbientProfile:
    """M(t) = A + B sin(2 pi t / period)."""

    A: float
    B: float
    period: float

    def __post_init__(self):
        _require_finite(self, "ambient.")
        _require(self.period > 0, "ambient.period", f"must be > 0, got {self.period!r}")

    @property
    def omega(self) -> float:
        return 2 * math.pi / self.period

    def __call__(self, t: float) -> float:
        return self.A + self.B * math.sin(self.omega * t)


@dataclass(frozen=True)
class TemperatureModel:
    """dT/dt = k (M(t) - T): a building relaxing toward a periodic outdoor temperature."""

    k: float
    T0: float
    ambient: AmbientProfile = field(default_factory=lambda: AmbientProfile(20.0, 5.0, 24.0))

    def __post_init__(self):
        _require_finite(self)
        _require(self.k > 0, "k", f"exchange coefficient must be > 0, got {self.k!r}")


@dataclass(frozen=True)
class MarketModel:
    """dp/dt = adjust (D(p) - S(p)) / (p_c - lam t), D(p) = d0 - d1 p, S(p) = s0 + s1 p.

    The adjustment law holds only before the crisis time p_c / lam; past it the slope is NaN.
    """

    adjust: float
    d0: float
    d1: float
    s0: float
    s1: float
    p0: float
    p_c: float
    lam: float

    def __post_init__(self):
        _require_finite(self)
        _require(self.adjust > 0, "adjust", f"adjustment speed must be > 0, got {self.adjust!r}")
        _require(self.d1 > 0, "d1", f"demand slope must be > 0, got {self.d1!r}")
        _require(self.s1 > 0, "s1", f"supply slope must be > 0, got {self.s1!r}")
        _require(self.p_c > 0, "p_c", f"must be > 0, got {self.p_c!r}")

    @property
    def equilibrium(self) -> float:
        return (self.d0 - self.s0) / (self.d1 + self.s1)

    @property
    def pole(self) -> float | None:
        """Crisis time p_c / lam, or None when the denominator never vanishes."""
        return self.p_c / self.lam if self.lam > 0 else None


@dataclass(frozen=True)
class ExponentialModel:
    """dy/dt = rate y, the linear test problem."""

    rate: float
    y0: float

    def __post_init__(self):
        _require_finite(self)


def logistic_rhs(model: LogisticModel) -> RhsFunction:
    r, K = model.r, model.K

    def rhs(t: float, P: float) -> float:
        return r * P * (1 - P / K)

    return rhs


def logistic_exact(model: LogisticModel, t: float) -> float:
    return model.K / (1 + (model.K - model.P0) / model.P0 * math.exp(-model.r * t))


def temperature_rhs(model: TemperatureModel) -> RhsFunction:
    k, ambient = model.k, model.ambient

    def rhs(t: float, T: float) -> float:
        return k * (ambient(t) - T)

    return rhs


def temperature_exact(model: TemperatureModel, t: float) -> float:
    """T(t) = A + C1 e^{-kt} + kB/(k^2 + w^2) (k sin wt - w cos wt), with C1 set by T(0) = T0."""
    k, A, B, w = model.k, model.ambient.A, model.ambient.B, model.ambient.omega
    gain = k * B / (k**2 + w**2)
    c1 = model.T0 - A + gain * w
    return A + c1 * math.exp(-k * t) + gain * (k * math.sin(w * t) - w * math.cos(w * t))


def market_rhs(model: MarketModel) -> RhsFunction:
    m = model

    def rhs(t: float, p: float) -> float:
        gap = m.p_c - m.lam * t
        if gap <= 0:
            return math.nan
        return m.adjust * ((m.d0 - m.d1 * p) - (m.s0 + m.s1 * p)) / gap

    return rhs


def market_exact(model: MarketModel, t: float) -> float:
    """Separable price path p* + (p0 - p*) |1 - lam t / p_c|^a with a = adjust (d1 + s1) / lam.

    Past the pole the magnitude form keeps the series defined; it is the reference the
    solvers fail to follow there.
    """
    p_star = model.equilibrium
    rate = model.adjust * (model.d1 + model.s1)
    if model.lam == 0:
        return p_star + (model.p0 - p_star) * math.exp(-rate * t / model.p_c)
    return p_star + (model.p0 - p_star) * abs(1 - model.lam * t / model.p_c) ** (rate / model.lam)


def exponential_rhs(model: ExponentialModel) -> RhsFunction:
    rate = model.rate

    def rhs(t: float, y: float) -> float:
        return rate * y

    return rhs


def exponential_exact(model: ExponentialModel, t: float) -> float:
    return model.y0 * math.exp(model.rate * t)


@dataclass(frozen=True)
class ModelEntry:
    """Registry record: how to build, integrate and check one model kind."""

    model_type: type
    rhs: Callable[[Any], RhsFunction]
    exact: Callable[[Any, float], float]
    initial_field: str
    defaults: dict[str, Any]
    interval: tuple[float, float]
    h: float

    def build(self, **params: Any) -> Any:
        """Instantiate the model from ``defaults`` overridden by ``params``.

        Args:
            **params: Model fields; temperature accepts ``ambient`` as a mapping.

        Returns:
            A validated model instance.

        Raises:
            ValidationError: If a field is unknown or violates the model's invariants.
        """
        known = {f.name for f in fields(self.model_type)}
        unknown = sorted(set(params) - known)
        if unknown:
            raise ValidationError(unknown[0], f"unknown parameter for {self.model_type.__name__}")
        merged = {**self.defaults, **params}
        if isinstance(merged.get("ambient"), dict):
            merged["ambient"] = AmbientProfile(**{**self.defaults["ambient"], **merged["ambient"]})
        return self.model_type(**merged)

    def initial_value(self, model: Any) -> float:
        return getattr(model, self.initial_field)


MODELS: dict[str, ModelEntry] = {
    "logistic": ModelEntry(
        LogisticModel,
        logistic_rhs,
        logistic_exact,
        "P0",
        {"r": 0.1, "K": 1000.0, "P0": 100.0},
        (0.0, 100.0),
        0.01,
    ),
    "temperature": ModelEntry(
        TemperatureModel,
        temperature_rhs,
        temperature_exact,
        "T0",
        {"k": 0.5, "T0": 30.0, "ambient": {"A": 20.0, "B": 5.0, "period": 24.0}},
        (0.0, 72.0),
        0.5,
    ),
    "market": ModelEntry(
        MarketModel,
        market_rhs,
        market_exact,
        "p0",
        {"adjust": 1.0, "d0": 10.0, "d1": 1.0, "s0": 2.0, "s1": 1.0, "p0": 3.0, "p_c": 10.0, "lam": 1.0},
        (0.0, 20.0),
        0.1,
    ),
    "exponential": ModelEntry(
        ExponentialModel,
        exponential_rhs,
        exponential_exact,
        "y0",
        {"rate": 1.0, "y0": 1.0},
        (0.0, 1.0),
        0.1,
    ),
}

# models with a noisy synthetic "experimental" series
CASE_STUDIES = ("logistic", "temperature", "market")
