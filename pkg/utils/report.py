#!/usr/bin/env -S uv run --script

# /// script
# requires-python = ">=3.13,<3.14"
# dependencies = [
#     "click>=8.1.0",
#     "rich>=13.0.0",
# ]
# ///

"""
Render the error and cost tables of an `odebench run` directory as Markdown.

Usage:
    report.py <RUN_DIR> [--output FILE]

One row per solver, one column per reference kind, followed by the cost table.
"""

import click
import sys

# Import shared utilities
from lib.csvfiles import read_csv
from pathlib import Path
from rich.console import Console
from rich.markdown import Markdown

console = Console()


def _cell(value: str) -> str:
    if value == "":
        return "-"
    try:
        return f"{float(value):.4e}"
    except ValueError:
        return value


def error_table(run_dir: Path) -> str:
    header, rows = read_csv(run_dir / "errors.csv")
    col = {name: i for i, name in enumerate(header)}
    solvers = list(dict.fromkeys(row[col["solver"]] for row in rows))
    references = list(dict.fromkeys(row[col["reference"]] for row in rows))
    signed = {(row[col["solver"]], row[col["reference"]]): row for row in rows}

    lines = [
        "| Method | " + " | ".join(f"Error wrt {ref}" for ref in references) + " |",
        "|--------|" + "|".join("-" * (len(ref) + 11) for ref in references) + "|",
    ]
    for solver in solvers:
        cells = []
        for ref in references:
            row = signed.get((solver, ref))
            if row is None:
                cells.append("-")
                continue
            mark = " †" if row[col["blowup_truncated"]] == "true" else ""
            cells.append(_cell(row[col["signed_relative"]]) + mark)
        lines.append(f"| {solver} | " + " | ".join(cells) + " |")
    return "\n".join(lines)


def cost_table(run_dir: Path) -> str:
    header, rows = read_csv(run_dir / "costs.csv")
    lines = [
        "| " + " | ".join(header) + " |",
        "|" + "|".join("-" * (len(name) + 2) for name in header) + "|",
    ]
    for row in rows:
        lines.append("| " + " | ".join(cell or "-" for cell in row) + " |")
    return "\n".join(lines)


def render_markdown(run_dir: Path) -> str:
    run_dir = Path(run_dir)
    parts = [
        f"# Solver comparison: {run_dir.name}",
        "## Relative error",
        error_table(run_dir),
        "† comparison truncated where the solver stopped (blow-up or step underflow).",
        "## Solution cost",
        cost_table(run_dir),
    ]
    return "\n\n".join(parts) + "\n"


@click.command()
@click.argument("run_dir", type=click.Path(exists=True, file_okay=False, path_type=Path))
@click.option("--output", "-o", type=click.Path(path_type=Path), help="Output file path")
def main(run_dir: Path, output: Path | None) -> None:
    """Render errors.csv and costs.csv of a run directory as Markdown."""
    try:
        markdown = render_markdown(run_dir)
    except FileNotFoundError as e:
        console.print(f"[red]❌ Error: Required file not found - {e.filename}[/red]")
        sys.exit(1)

    if output:
        output.write_text(markdown, encoding="utf-8")
        console.print(f"[green]✓ Report saved to {output}[/green]")
    else:
        console.print(Markdown(markdown))


if __name__ == "__main__":
    main()
