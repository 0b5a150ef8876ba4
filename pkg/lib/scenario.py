"""Scenario documents: YAML mappings describing one benchmark run.

```yaml
name: logistic
problem: {x0: 0, x_end: 100}
model: {kind: logistic, r: 0.1, K: 1000, P0: 100}
solvers:
  methods: [euler, heun, midpoint, rk4, rk45]
  h: 0.01
  corrector: {max_iters: 10, tol_percent: 1.0e-6}   # optional, heun only
  adaptive: {rel_tol: 1.0e-6, h_max: 0.01}          # optional
reference:
  empirical: true                                  # model oracle sampled on the interval
  experimental: ../fixtures/logistic.csv           # optional, relative to this file
  samples: 101
```

Structural problems (bad YAML, unknown keys, wrong types) raise ``ParseError`` with the
line and key; values outside a type's invariants raise ``ValidationError`` naming the field.
"""

import math
import yaml
from collections.abc import Callable
from dataclasses import dataclass, fields
from lib.adaptive import DORMAND_PRINCE, AdaptiveConfig
from lib.exceptions import InvalidConfig, ParseError, ValidationError
from lib.ivp import CorrectorConfig, FixedStepConfig, IvpProblem
from lib.models import MODELS, AmbientProfile
from lib.steppers import FIXED_STEPPERS
from pathlib import Path
from typing import Any

ADAPTIVE_SOLVER = DORMAND_PRINCE.name
SOLVER_NAMES = (*FIXED_STEPPERS, ADAPTIVE_SOLVER)

SECTION_KEYS = {
    "": {"name", "problem", "model", "solvers", "reference"},
    "problem": {"x0", "x_end"},
    "solvers": {"methods", "h", "corrector", "adaptive"},
    "solvers.corrector": {f.name for f in fields(CorrectorConfig)},
    "solvers.adaptive": {f.name for f in fields(AdaptiveConfig)},
    "reference": {"empirical", "experimental", "samples"},
}
REQUIRED_KEYS = {
    "": {"problem", "model", "solvers"},
    "problem": {"x_end"},
    "solvers": {"methods", "h"},
}


@dataclass(frozen=True)
class ReferenceSpec:
    empirical: bool = True
    experimental: Path | None = None
    samples: int = 101


@dataclass(frozen=True)
class Scenario:
    name: str
    model_kind: str
    model: Any
    problem: IvpProblem
    solvers: tuple[str, ...]
    fixed: FixedStepConfig
    adaptive: AdaptiveConfig
    reference: ReferenceSpec

    @property
    def exact(self) -> Callable[[float], float]:
        oracle = MODELS[self.model_kind].exact
        return lambda t: oracle(self.model, t)


def _key_lines(node: yaml.Node, prefix: str = "", lines: dict[str, int] | None = None) -> dict[str, int]:
    """Map dotted key paths to 1-based source lines."""
    lines = {} if lines is None else lines
    if isinstance(node, yaml.MappingNode):
        for key_node, value_node in node.value:
            path = f"{prefix}.{key_node.value}" if prefix else str(key_node.value)
            lines.setdefault(path, key_node.start_mark.line + 1)
            _key_lines(value_node, path, lines)
    return lines


class _Reader:
    """Typed access to the loaded document with line-aware ParseErrors."""

    def __init__(self, data: dict[str, Any], lines: dict[str, int]):
        self.data = data
        self.lines = lines

    def fail(self, path: str, message: str) -> ParseError:
        section = path.rpartition(".")[0]
        line = self.lines.get(path) or self.lines.get(section)
        return ParseError(message, line=line, key=path or None)

    def section(self, path: str) -> dict[str, Any]:
        value = self.get(path)
        if value is None:
            value = {}
        if not isinstance(value, dict):
            raise self.fail(path, f"expected a mapping, got {type(value).__name__}")
        allowed = SECTION_KEYS.get(path)
        if allowed is not None:
            for key in value:
                if key not in allowed:
                    raise self.fail(f"{path}.{key}" if path else str(key), "unknown key")
        missing = sorted(REQUIRED_KEYS.get(path, set()) - set(value))
        if missing:
            raise self.fail(path, f"missing required key '{missing[0]}'")
        return value

    def get(self, path: str, default: Any = None) -> Any:
        node: Any = self.data
        for part in filter(None, path.split(".")):
            if not isinstance(node, dict) or part not in node:
                return default
            node = node[part]
        return node

    def number(self, path: str, default: float | None = None, required: bool = False) -> float | None:
        value = self.get(path, default)
        if value is None:
            if required:
                raise self.fail(path, "expected a number, got null")
            return None
        if isinstance(value, bool) or not isinstance(value, int | float):
            raise self.fail(path, f"expected a number, got {value!r}")
        return float(value)

    def integer(self, path: str, default: int) -> int:
        value = self.get(path, default)
        if isinstance(value, bool) or not isinstance(value, int):
            raise self.fail(path, f"expected an integer, got {value!r}")
        return value

    def flag(self, path: str, default: bool) -> bool:
        value = self.get(path, default)
        if not isinstance(value, bool):
            raise self.fail(path, f"expected true or false, got {value!r}")
        return value

    def string(self, path: str, default: str | None = None) -> str | None:
        value = self.get(path, default)
        if value is not None and not isinstance(value, str):
            raise self.fail(path, f"expected a string, got {value!r}")
        return value


def _model(reader: _Reader) -> tuple[str, Any]:
    section = reader.section("model")
    kind = reader.string("model.kind")
    if kind is None:
        raise reader.fail("model", "missing required key 'kind'")
    if kind not in MODELS:
        raise reader.fail("model.kind", f"unknown model '{kind}' (choose from {', '.join(MODELS)})")
    entry = MODELS[kind]

    allowed = {f.name for f in fields(entry.model_type)}
    params: dict[str, Any] = {}
    for key in section:
        if key == "kind":
            continue
        if key not in allowed:
            raise reader.fail(f"model.{key}", f"unknown parameter for model '{kind}'")
        if key == "ambient":
            ambient = reader.section("model.ambient")
            ambient_fields = {f.name for f in fields(AmbientProfile)}
            for sub in ambient:
                if sub not in ambient_fields:
                    raise reader.fail(f"model.ambient.{sub}", "unknown key")
            params["ambient"] = {sub: reader.number(f"model.ambient.{sub}", required=True) for sub in ambient}
        else:
            params[key] = reader.number(f"model.{key}", required=True)

    try:
        return kind, entry.build(**params)
    except ValidationError as exc:
        raise ValidationError(f"model.{exc.field}", str(exc).partition(": ")[2]) from exc


def _solvers(reader: _Reader, span: float) -> tuple[tuple[str, ...], FixedStepConfig, AdaptiveConfig]:
    section = reader.section("solvers")
    methods = section["methods"]
    if not isinstance(methods, list) or not methods:
        raise reader.fail("solvers.methods", "expected a non-empty list of solver names")
    for name in methods:
        if name not in SOLVER_NAMES:
            raise reader.fail("solvers.methods", f"unknown solver '{name}' (choose from {', '.join(SOLVER_NAMES)})")
    if len(set(methods)) != len(methods):
        raise reader.fail("solvers.methods", "solvers must be listed at most once")

    h = reader.number("solvers.h", required=True)
    corrector = None
    if "corrector" in section:
        reader.section("solvers.corrector")
        try:
            corrector = CorrectorConfig(
                max_iters=reader.integer("solvers.corrector.max_iters", CorrectorConfig.max_iters),
                tol_percent=reader.number("solvers.corrector.tol_percent", CorrectorConfig.tol_percent),
            )
        except InvalidConfig as exc:
            raise ValidationError("solvers.corrector", str(exc)) from exc
    try:
        fixed = FixedStepConfig(h, corrector)
    except InvalidConfig as exc:
        raise ValidationError("solvers.h", str(exc)) from exc
    if h > span:
        raise ValidationError("solvers.h", f"step size {h!r} exceeds the interval length {span!r}")

    options = {key: reader.number(f"solvers.adaptive.{key}") for key in reader.section("solvers.adaptive")}
    try:
        adaptive = AdaptiveConfig(**options)
    except InvalidConfig as exc:
        raise ValidationError("solvers.adaptive", str(exc)) from exc
    return tuple(methods), fixed, adaptive


def _reference(reader: _Reader, base_dir: Path | None, x0: float) -> ReferenceSpec:
    reader.section("reference")
    empirical = reader.flag("reference.empirical", True)
    samples = reader.integer("reference.samples", ReferenceSpec.samples)
    if samples < 2:
        raise ValidationError("reference.samples", f"need at least 2 samples, got {samples}")
    if empirical and x0 != 0:
        raise ValidationError("problem.x0", "the empirical reference assumes the model starts at t = 0")

    experimental = reader.string("reference.experimental")
    path = None
    if experimental is not None:
        path = Path(experimental)
        if not path.is_absolute():
            path = (base_dir or Path.cwd()) / path
        if not path.is_file():
            raise ValidationError("reference.experimental", f"file not found: {path}")
    return ReferenceSpec(empirical, path, samples)


def parse_scenario(text: str, base_dir: Path | None = None) -> Scenario:
    """Parse and validate a scenario document.

    Args:
        text: YAML source.
        base_dir: Directory relative reference paths resolve against (defaults to the cwd).

    Returns:
        The validated scenario.

    Raises:
        ParseError: If the document is malformed, has unknown keys or mistyped values.
        ValidationError: If a value violates a model, problem or solver invariant.
    """
    try:
        root = yaml.compose(text, Loader=yaml.SafeLoader)
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        raise ParseError(str(getattr(exc, "problem", None) or exc), line=mark.line + 1 if mark else None) from exc
    if root is None:
        raise ParseError("empty scenario document")
    if not isinstance(data, dict):
        raise ParseError("a scenario must be a mapping of sections", line=root.start_mark.line + 1)

    reader = _Reader(data, _key_lines(root))
    reader.section("")

    kind, model = _model(reader)
    entry = MODELS[kind]

    reader.section("problem")
    x0 = reader.number("problem.x0", 0.0, required=True)
    x_end = reader.number("problem.x_end", required=True)
    if not math.isfinite(x0):
        raise ValidationError("problem.x0", f"must be finite, got {x0!r}")
    try:
        problem = IvpProblem(entry.rhs(model), x0, entry.initial_value(model), x_end)
    except InvalidConfig as exc:
        raise ValidationError("problem.x_end", str(exc)) from exc

    solvers, fixed, adaptive = _solvers(reader, problem.span)
    reference = _reference(reader, base_dir, x0)
    name = reader.string("name", kind)
    return Scenario(name, kind, model, problem, solvers, fixed, adaptive, reference)


def load_scenario(path: Path) -> Scenario:
    """Read a scenario file; relative reference paths resolve against its directory."""
    path = Path(path)
    return parse_scenario(path.read_text(encoding="utf-8"), base_dir=path.parent)
