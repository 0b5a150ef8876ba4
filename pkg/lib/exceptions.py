"""Error hierarchy shared by the library modules and the CLI."""


class OdeBenchError(Exception):
    """Base class for every error raised by odebench."""


class InvalidConfig(OdeBenchError, ValueError):
    """A solver or problem configuration violates its invariants."""


class InvalidTableau(InvalidConfig):
    """A Butcher tableau is malformed or inconsistent."""


class NonFiniteEvaluation(OdeBenchError, ArithmeticError):
    """The right-hand side returned (or raised instead of returning) a non-finite value."""

    def __init__(self, x: float, y: float, value: float | None = None):
        self.x = x
        self.y = y
        self.value = value
        super().__init__(f"non-finite rhs evaluation at x={x!r}, y={y!r} (got {value!r})")


class ZeroDenominator(OdeBenchError, ZeroDivisionError):
    """A percent relative change was requested against an exact zero."""


class ZeroReferenceSum(OdeBenchError, ZeroDivisionError):
    """The reference values of an error comparison sum to zero."""


class NoOverlap(OdeBenchError, ValueError):
    """A reference series shares no abscissa range with a trajectory."""


class DegenerateError(OdeBenchError, ArithmeticError):
    """An observed convergence order cannot be computed."""


class ParseError(OdeBenchError, ValueError):
    """A scenario document is malformed."""

    def __init__(self, message: str, line: int | None = None, key: str | None = None):
        self.line = line
        self.key = key
        context = []
        if line is not None:
            context.append(f"line {line}")
        if key is not None:
            context.append(f"key '{key}'")
        prefix = f"{', '.join(context)}: " if context else ""
        super().__init__(f"{prefix}{message}")


class ValidationError(OdeBenchError, ValueError):
    """A scenario or model value violates a type invariant."""

    def __init__(self, field: str, message: str):
        self.field = field
        super().__init__(f"{field}: {message}")


class OutputError(OdeBenchError, OSError):
    """An output directory cannot be created or written."""
