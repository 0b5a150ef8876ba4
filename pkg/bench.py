#!/usr/bin/env python

"""
odebench

Compare explicit one-step ODE solvers on case-study initial-value problems.

Usage:
    odebench run <SCENARIO> --out DIR [--solvers euler,heun,midpoint,rk4,rk45] [--timing] [--workers N] [--verbose]
    odebench convergence --model NAME --steppers LIST --h LIST --out DIR
    odebench fixtures --out DIR [--seed N]

Commands:
    run: Integrate a scenario with each solver; write trajectories.csv, errors.csv, costs.csv and plot.svg
    convergence: Observed global convergence orders against a model's closed-form solution (orders.csv)
    fixtures: Regenerate the synthetic experimental series (oracle plus seeded noise) for the case studies

Exit codes:
    0 success (solver blow-ups are results, not failures)
    2 invalid scenario, option or model
    3 output directory not writable

Note:
    Defaults can be provided via environment variables or a .env file:
    ODEBENCH_LOG_LEVEL, ODEBENCH_WORKERS, ODEBENCH_FIXTURE_SEED, ODEBENCH_FIXTURE_NOISE, ODEBENCH_FIXTURE_POINTS
"""

import click
import logging
import sys
from lib.analysis import estimate_convergence_order
from lib.csvfiles import ensure_dir, write_csv
from lib.exceptions import OdeBenchError, OutputError
from lib.harness import run_scenario, write_artifacts
from lib.ivp import IvpProblem
from lib.models import MODELS
from lib.odebench import load_config, write_fixtures
from lib.scenario import load_scenario
from lib.steppers import FIXED_STEPPERS
from pathlib import Path
from rich.console import Console
from rich.logging import RichHandler
from rich.panel import Panel
from rich.table import Table

console = Console()
err_console = Console(stderr=True)

EXIT_INVALID = 2
EXIT_OUTPUT = 3


def setup_logging(level: str) -> None:
    logging.basicConfig(
        level=level,
        format="%(message)s",
        datefmt="[%X]",
        handlers=[RichHandler(console=err_console, show_path=False)],
        force=True,
    )


def fail(error: Exception) -> None:
    err_console.print(f"[red]Error: {error}[/red]")
    sys.exit(EXIT_OUTPUT if isinstance(error, OutputError) else EXIT_INVALID)


def split_list(value: str) -> list[str]:
    return [item.strip() for item in value.split(",") if item.strip()]


def parse_step_sizes(ctx, param, value: str) -> list[float]:
    try:
        h_values = [float(item) for item in split_list(value)]
    except ValueError as e:
        raise click.BadParameter(f"expected comma-separated numbers, got {value!r}") from e
    if len(h_values) < 2:
        raise click.BadParameter("need at least two step sizes")
    return h_values


def fmt(value: float | None) -> str:
    return "-" if value is None else f"{value:.6g}"


@click.group()
def cli():
    """Explicit ODE solver benchmark"""
    pass


@cli.command()
@click.argument("scenario", type=click.Path(path_type=Path))
@click.option("--out", "out_dir", required=True, type=click.Path(path_type=Path), help="Output directory")
@click.option("--solvers", help="Comma-separated solvers to run instead of the scenario's list")
@click.option("--timing", is_flag=True, help="Record wall-clock time per solver in costs.csv")
@click.option("--workers", type=int, help="Solver thread pool size (default: ODEBENCH_WORKERS)")
@click.option("--verbose", "-v", is_flag=True, help="Debug logging")
def run(scenario, out_dir, solvers, timing, workers, verbose):
    """Run every solver of a scenario and write CSV and SVG artifacts"""
    config = load_config()
    setup_logging("DEBUG" if verbose else config["log_level"])
    workers = workers or config["workers"]

    try:
        loaded = load_scenario(scenario)
    except OSError as e:
        err_console.print(f"[red]Error: cannot read scenario {scenario}: {e.strerror or e}[/red]")
        sys.exit(EXIT_INVALID)
    except OdeBenchError as e:
        fail(e)

    console.print(Panel(f"Scenario: {loaded.name} ({loaded.model_kind}, h={loaded.fixed.h!r})", style="bold cyan"))

    try:
        artifact = run_scenario(loaded, split_list(solvers) if solvers else None, workers=workers)
        written = write_artifacts(artifact, out_dir, include_timing=timing)
    except OdeBenchError as e:
        fail(e)

    table = Table(show_header=True, header_style="bold magenta")
    table.add_column("Solver", style="cyan")
    table.add_column("Status")
    table.add_column("RHS evals", justify="right")
    table.add_column("Steps", justify="right")
    table.add_column("Final y", justify="right", style="green")
    for reference in artifact.references:
        table.add_column(f"Error wrt {reference.kind}", justify="right", style="yellow")

    for solver_run in artifact.runs:
        trajectory = solver_run.trajectory
        if trajectory.completed:
            status = "[green]completed[/green]"
        else:
            status = f"[red]{trajectory.status} at {fmt(trajectory.x_fail)}[/red]"
        reports = artifact.reports(solver_run.name)
        table.add_row(
            solver_run.name,
            status,
            str(trajectory.stats.rhs_evaluations),
            str(trajectory.stats.steps_accepted),
            fmt(trajectory.final[1]),
            *(fmt(reports[reference.kind].signed_relative) for reference in artifact.references),
        )

    console.print(table)
    for path in written:
        console.print(f"[dim]wrote {path}[/dim]")


@cli.command()
@click.option("--model", "model_name", required=True, help=f"Model name ({', '.join(MODELS)})")
@click.option("--steppers", required=True, help=f"Comma-separated fixed-step methods ({', '.join(FIXED_STEPPERS)})")
@click.option("--h", "h_values", required=True, callback=parse_step_sizes, help="Comma-separated decreasing step sizes")
@click.option("--out", "out_dir", required=True, type=click.Path(path_type=Path), help="Output directory")
def convergence(model_name, steppers, h_values, out_dir):
    """Observed global convergence orders against the model's closed-form solution"""
    config = load_config()
    setup_logging(config["log_level"])

    if model_name not in MODELS:
        fail(OdeBenchError(f"unknown model '{model_name}' (choose from {', '.join(MODELS)})"))
    names = split_list(steppers)
    unknown = [name for name in names if name not in FIXED_STEPPERS]
    if not names or unknown:
        fail(OdeBenchError(f"unknown stepper '{(unknown or [''])[0]}' (choose from {', '.join(FIXED_STEPPERS)})"))

    entry = MODELS[model_name]
    model = entry.build()
    problem = IvpProblem(entry.rhs(model), entry.interval[0], entry.initial_value(model), entry.interval[1])

    console.print(Panel(f"Convergence: {model_name} on [{problem.x0:g}, {problem.x_end:g}]", style="bold cyan"))

    rows = []
    try:
        for name in names:
            for row in estimate_convergence_order(problem, lambda t: entry.exact(model, t), FIXED_STEPPERS[name], h_values):
                rows.append((name, row))
        ensure_dir(out_dir)
        path = write_csv(
            out_dir / "orders.csv",
            ["stepper", "h", "error", "observed_order"],
            ([name, row.h, row.error, row.observed_order] for name, row in rows),
        )
    except OdeBenchError as e:
        fail(e)

    table = Table(show_header=True, header_style="bold magenta")
    table.add_column("Stepper", style="cyan")
    table.add_column("h", justify="right")
    table.add_column("Global error", justify="right", style="yellow")
    table.add_column("Observed order", justify="right", style="green")
    for name, row in rows:
        table.add_row(name, fmt(row.h), fmt(row.error), fmt(row.observed_order))

    console.print(table)
    console.print(f"[dim]wrote {path}[/dim]")


@cli.command()
@click.option("--out", "out_dir", required=True, type=click.Path(path_type=Path), help="Output directory")
@click.option("--seed", type=int, help="Random seed (default: ODEBENCH_FIXTURE_SEED)")
def fixtures(out_dir, seed):
    """Regenerate the synthetic experimental reference series"""
    config = load_config()
    setup_logging(config["log_level"])
    seed = config["fixture_seed"] if seed is None else seed

    try:
        written = write_fixtures(out_dir, seed=seed, noise=config["fixture_noise"], points=config["fixture_points"])
    except OdeBenchError as e:
        fail(e)

    console.print(Panel(f"Fixtures (seed={seed}, noise={config['fixture_noise']!r})", style="bold cyan"))
    for path in written:
        console.print(f"[green]✓[/green] {path}")


if __name__ == "__main__":
    cli()
