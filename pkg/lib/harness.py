"""Scenario runs: integrate every selected solver, compare against references, write artifacts."""

import logging
import numpy as np
import time
from collections.abc import Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from lib.adaptive import integrate_adaptive
from lib.analysis import ErrorReport, ReferenceKind, ReferenceSeries, compare
from lib.csvfiles import ensure_dir, write_csv
from lib.exceptions import InvalidConfig
from lib.ivp import FixedStepConfig, Trajectory, grid_steps, integrate_fixed
from lib.odebench import read_reference_csv
from lib.plot import render_svg
from lib.scenario import ADAPTIVE_SOLVER, SOLVER_NAMES, Scenario
from lib.steppers import FIXED_STEPPERS
from pathlib import Path

logger = logging.getLogger(__name__)

TRAJECTORIES_CSV = "trajectories.csv"
ERRORS_CSV = "errors.csv"
COSTS_CSV = "costs.csv"
PLOT_SVG = "plot.svg"


@dataclass(frozen=True)
class SolverRun:
    name: str
    trajectory: Trajectory
    wall_ms: float


@dataclass(frozen=True)
class ErrorRow:
    solver: str
    reference: ReferenceKind
    report: ErrorReport


@dataclass(frozen=True)
class RunArtifact:
    """Everything one scenario run produced, in solver order."""

    scenario_name: str
    grid: tuple[float, ...]
    runs: tuple[SolverRun, ...]
    references: tuple[ReferenceSeries, ...]
    errors: tuple[ErrorRow, ...]

    def __post_init__(self):
        names = [run.name for run in self.runs]
        if len(set(names)) != len(names):
            raise InvalidConfig(f"a solver appears more than once: {names}")
        for run in self.runs:
            stats = run.trajectory.stats
            if min(stats.rhs_evaluations, stats.steps_accepted, stats.steps_rejected) < 0 or run.wall_ms < 0:
                raise InvalidConfig(f"{run.name}: negative cost counter")

    def run(self, name: str) -> SolverRun:
        for run in self.runs:
            if run.name == name:
                return run
        raise KeyError(name)

    def reports(self, solver: str) -> dict[ReferenceKind, ErrorReport]:
        return {row.reference: row.report for row in self.errors if row.solver == solver}


def select_solvers(scenario: Scenario, solvers: Sequence[str] | None = None) -> tuple[str, ...]:
    """The scenario's solver list, or ``solvers`` (any known names, in the given order) when set."""
    if not solvers:
        return scenario.solvers
    unknown = [name for name in solvers if name not in SOLVER_NAMES]
    if unknown:
        raise InvalidConfig(f"unknown solver '{unknown[0]}' (choose from {', '.join(SOLVER_NAMES)})")
    return tuple(dict.fromkeys(solvers))


def run_solver(scenario: Scenario, name: str) -> SolverRun:
    start = time.perf_counter()
    if name == ADAPTIVE_SOLVER:
        trajectory = integrate_adaptive(scenario.problem, scenario.adaptive)
    else:
        config = scenario.fixed if name == "heun" else FixedStepConfig(scenario.fixed.h)
        trajectory = integrate_fixed(scenario.problem, FIXED_STEPPERS[name], config)
    wall_ms = (time.perf_counter() - start) * 1000
    logger.debug("%s: %s, %d rhs evaluations in %.1f ms", name, trajectory.status, trajectory.stats.rhs_evaluations, wall_ms)
    return SolverRun(name, trajectory, wall_ms)


def load_references(scenario: Scenario) -> tuple[ReferenceSeries, ...]:
    spec, problem = scenario.reference, scenario.problem
    references = []
    if spec.empirical:
        references.append(
            ReferenceSeries.sampled(ReferenceKind.EMPIRICAL, scenario.exact, problem.x0, problem.x_end, spec.samples)
        )
    if spec.experimental is not None:
        references.append(read_reference_csv(spec.experimental, ReferenceKind.EXPERIMENTAL))
    return tuple(references)


def output_grid(scenario: Scenario) -> tuple[float, ...]:
    """x0 + i*h for every full step, then x_end."""
    problem, h = scenario.problem, scenario.fixed.h
    n = grid_steps(problem.span, h)
    return (*(problem.x0 + i * h for i in range(n)), problem.x_end)


def run_scenario(scenario: Scenario, solvers: Sequence[str] | None = None, workers: int = 1) -> RunArtifact:
    """Integrate each selected solver and compare it with every reference.

    Args:
        scenario: Validated scenario.
        solvers: Optional override of the scenario's solver list.
        workers: Thread pool size; results keep solver order regardless.

    Returns:
        The run artifact.
    """
    if workers < 1:
        raise InvalidConfig(f"workers must be >= 1, got {workers}")
    names = select_solvers(scenario, solvers)
    references = load_references(scenario)

    with ThreadPoolExecutor(max_workers=workers) as pool:
        runs = tuple(pool.map(lambda name: run_solver(scenario, name), names))

    errors = tuple(
        ErrorRow(run.name, reference.kind, compare(run.trajectory, reference)) for run in runs for reference in references
    )
    return RunArtifact(scenario.name, output_grid(scenario), runs, references, errors)


def _resample(xs: Sequence[float], ys: Sequence[float], grid: Sequence[float]) -> list[float | None]:
    """Linear interpolation on ``grid``, blank outside [xs[0], xs[-1]]."""
    values = np.interp(grid, xs, ys)
    return [float(v) if xs[0] <= x <= xs[-1] else None for x, v in zip(grid, values, strict=True)]


def write_artifacts(artifact: RunArtifact, out_dir: Path, include_timing: bool = False) -> list[Path]:
    """Write trajectories.csv, errors.csv, costs.csv and plot.svg into ``out_dir``.

    ``wall_ms`` stays blank unless ``include_timing`` is set, so repeated runs give
    byte-identical CSVs.
    """
    out_dir = ensure_dir(out_dir)
    grid = artifact.grid

    columns = [_resample(run.trajectory.xs, run.trajectory.ys, grid) for run in artifact.runs]
    columns += [_resample(ref.ts, ref.values, grid) for ref in artifact.references]
    header = ["t", *(run.name for run in artifact.runs), *(str(ref.kind) for ref in artifact.references)]
    trajectories = write_csv(out_dir / TRAJECTORIES_CSV, header, ([x, *row] for x, row in zip(grid, zip(*columns), strict=True)))

    errors = write_csv(
        out_dir / ERRORS_CSV,
        ["solver", "reference", "signed_relative", "mean_abs_relative", "n_points", "blowup_truncated"],
        (
            [
                row.solver,
                str(row.reference),
                row.report.signed_relative,
                row.report.mean_abs_relative,
                row.report.n_points_compared,
                "true" if row.report.blowup_truncated else "false",
            ]
            for row in artifact.errors
        ),
    )

    costs = write_csv(
        out_dir / COSTS_CSV,
        ["solver", "rhs_evaluations", "steps", "rejected", "status", "wall_ms"],
        (
            [
                run.name,
                run.trajectory.stats.rhs_evaluations,
                run.trajectory.stats.steps_accepted,
                run.trajectory.stats.steps_rejected,
                str(run.trajectory.status),
                round(run.wall_ms, 3) if include_timing else None,
            ]
            for run in artifact.runs
        ),
    )

    plot = render_svg(
        out_dir / PLOT_SVG,
        artifact.scenario_name,
        {run.name: run.trajectory for run in artifact.runs},
        {str(ref.kind): ref for ref in artifact.references},
    )
    return [trajectories, errors, costs, plot]
