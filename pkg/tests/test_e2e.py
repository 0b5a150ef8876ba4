#!/usr/bin/env python

"""
End-to-end tests for bench.py CLI workflows

Tests verify complete user workflows: regenerate fixtures, run each case study,
compare repeated runs byte for byte, and the exit codes for bad input.
"""

import pytest
import sys
from pathlib import Path

# Add parent directory to path to import bench module
sys.path.insert(0, str(Path(__file__).parent.parent))

from bench import EXIT_INVALID, EXIT_OUTPUT, cli
from click.testing import CliRunner
from lib.csvfiles import read_csv

CSV_ARTIFACTS = ("trajectories.csv", "errors.csv", "costs.csv")


@pytest.fixture
def runner():
    """Create a Click test runner"""
    return CliRunner()


def orders(out_dir: Path) -> dict[str, list[float]]:
    header, rows = read_csv(out_dir / "orders.csv")
    assert header == ["stepper", "h", "error", "observed_order"]
    observed: dict[str, list[float]] = {}
    for stepper, _, _, order in rows:
        observed.setdefault(stepper, [])
        if order:
            observed[stepper].append(float(order))
    return observed


class TestRunWorkflow:
    """Test fixtures → run → rerun for every case study"""

    @pytest.mark.parametrize("name", ["logistic", "temperature", "market"])
    def test_run_is_reproducible(self, runner, case_dir, name):
        """Test two runs of the same scenario write byte-identical CSVs"""
        scenario = str(case_dir / "scenarios" / f"{name}.yaml")

        first = runner.invoke(cli, ["run", scenario, "--out", str(case_dir / "first")])
        assert first.exit_code == 0, f"Command failed with output: {first.output}"
        second = runner.invoke(cli, ["run", scenario, "--out", str(case_dir / "second")])
        assert second.exit_code == 0, f"Command failed with output: {second.output}"

        for artifact in CSV_ARTIFACTS:
            assert (case_dir / "first" / artifact).read_bytes() == (case_dir / "second" / artifact).read_bytes()
        assert (case_dir / "first" / "plot.svg").exists()

    @pytest.mark.parametrize("name", ["temperature", "market"])
    def test_shipped_scenario_runs_from_checkout(self, runner, tmp_path, name):
        """Test a scenario in scenarios/ runs against the committed fixtures without setup"""
        scenario = Path(__file__).parent.parent / "scenarios" / f"{name}.yaml"

        result = runner.invoke(cli, ["run", str(scenario), "--out", str(tmp_path)])

        assert result.exit_code == 0, f"Command failed with output: {result.output}"
        _, rows = read_csv(tmp_path / "errors.csv")
        assert {row[1] for row in rows} == {"empirical", "experimental"}

    def test_market_failures_are_results(self, runner, case_dir):
        """Test every solver failing still exits 0 and reports the failures"""
        out_dir = case_dir / "market-run"

        result = runner.invoke(cli, ["run", str(case_dir / "scenarios" / "market.yaml"), "--out", str(out_dir)])

        assert result.exit_code == 0, f"Command failed with output: {result.output}"
        _, rows = read_csv(out_dir / "costs.csv")
        assert {row[4] for row in rows} == {"blow_up", "step_underflow"}

    def test_solver_subset_and_timing(self, runner, case_dir):
        """Test --solvers narrows the run and --timing fills wall_ms"""
        out_dir = case_dir / "subset"

        result = runner.invoke(
            cli,
            ["run", str(case_dir / "scenarios" / "temperature.yaml"), "--out", str(out_dir), "--solvers", "rk4,heun", "--timing"],
        )

        assert result.exit_code == 0, f"Command failed with output: {result.output}"
        header, _ = read_csv(out_dir / "trajectories.csv")
        assert header == ["t", "rk4", "heun", "empirical", "experimental"]
        _, rows = read_csv(out_dir / "costs.csv")
        assert all(row[5] != "" for row in rows)

    def test_workers_option(self, runner, case_dir):
        """Test a thread pool gives the same CSVs as a serial run"""
        scenario = str(case_dir / "scenarios" / "temperature.yaml")

        serial = runner.invoke(cli, ["run", scenario, "--out", str(case_dir / "serial")])
        parallel = runner.invoke(cli, ["run", scenario, "--out", str(case_dir / "parallel"), "--workers", "4"])

        assert serial.exit_code == parallel.exit_code == 0
        for artifact in CSV_ARTIFACTS:
            assert (case_dir / "serial" / artifact).read_bytes() == (case_dir / "parallel" / artifact).read_bytes()


class TestRunErrors:
    """Test exit codes of the run command"""

    def test_unknown_solver(self, runner, case_dir):
        """Test an unknown solver exits 2"""
        scenario = str(case_dir / "scenarios" / "logistic.yaml")
        result = runner.invoke(cli, ["run", scenario, "--out", str(case_dir / "out"), "--solvers", "euler,leapfrog"])

        assert result.exit_code == EXIT_INVALID
        assert "leapfrog" in result.output

    def test_invalid_scenario(self, runner, case_dir):
        """Test a model invariant violation exits 2 and names the field"""
        scenario = case_dir / "scenarios" / "logistic.yaml"
        scenario.write_text(scenario.read_text().replace("K: 1000", "K: -5"))

        result = runner.invoke(cli, ["run", str(scenario), "--out", str(case_dir / "out")])

        assert result.exit_code == EXIT_INVALID
        assert "model.K" in result.output

    def test_missing_scenario(self, runner, tmp_path):
        """Test an unreadable scenario file exits 2"""
        result = runner.invoke(cli, ["run", str(tmp_path / "nope.yaml"), "--out", str(tmp_path / "out")])

        assert result.exit_code == EXIT_INVALID

    def test_output_not_writable(self, runner, case_dir):
        """Test an output path occupied by a file exits 3"""
        target = case_dir / "taken"
        target.write_text("")

        result = runner.invoke(cli, ["run", str(case_dir / "scenarios" / "temperature.yaml"), "--out", str(target)])

        assert result.exit_code == EXIT_OUTPUT


class TestConvergenceCommand:
    """Test observed orders written by the convergence command"""

    def test_euler_on_logistic(self, runner, tmp_path):
        """Test Euler is first order on the logistic model"""
        result = runner.invoke(
            cli, ["convergence", "--model", "logistic", "--steppers", "euler", "--h", "1,0.5,0.25", "--out", str(tmp_path)]
        )

        assert result.exit_code == 0, f"Command failed with output: {result.output}"
        observed = orders(tmp_path)
        assert len(observed["euler"]) == 2
        assert all(0.8 <= order <= 1.2 for order in observed["euler"])

    def test_rk4_on_logistic(self, runner, tmp_path):
        """Test RK4 is fourth order on the logistic model"""
        result = runner.invoke(
            cli, ["convergence", "--model", "logistic", "--steppers", "rk4", "--h", "1,0.5,0.25", "--out", str(tmp_path)]
        )

        assert result.exit_code == 0, f"Command failed with output: {result.output}"
        observed = orders(tmp_path)
        assert len(observed["rk4"]) == 2
        assert all(3.6 <= order <= 4.4 for order in observed["rk4"])

    def test_midpoint_and_heun_share_order(self, runner, tmp_path):
        """Test the two second-order methods converge at the same rate on the logistic model"""
        result = runner.invoke(
            cli,
            ["convergence", "--model", "logistic", "--steppers", "midpoint,heun", "--h", "1,0.5,0.25", "--out", str(tmp_path)],
        )

        assert result.exit_code == 0, f"Command failed with output: {result.output}"
        observed = orders(tmp_path)
        for midpoint, heun in zip(observed["midpoint"], observed["heun"], strict=True):
            assert 1.8 <= midpoint <= 2.2
            assert abs(midpoint - heun) <= 0.1

    def test_all_steppers_on_exponential(self, runner, tmp_path):
        """Test each fixed-step method reaches its order on y' = y"""
        result = runner.invoke(
            cli,
            [
                "convergence",
                "--model",
                "exponential",
                "--steppers",
                "euler,heun,midpoint,rk4",
                "--h",
                "0.1,0.05,0.025",
                "--out",
                str(tmp_path),
            ],
        )

        assert result.exit_code == 0, f"Command failed with output: {result.output}"
        observed = orders(tmp_path)
        expected = {"euler": 1.0, "heun": 2.0, "midpoint": 2.0, "rk4": 4.0}
        for stepper, order in expected.items():
            assert all(abs(value - order) <= 0.1 * order for value in observed[stepper]), stepper

    @pytest.mark.parametrize(
        "args",
        [
            ["--model", "market", "--steppers", "rk4", "--h", "0.1,0.05"],
            ["--model", "lotka", "--steppers", "rk4", "--h", "0.1,0.05"],
            ["--model", "logistic", "--steppers", "rk45", "--h", "0.1,0.05"],
            ["--model", "logistic", "--steppers", "euler", "--h", "0.1"],
            ["--model", "logistic", "--steppers", "euler", "--h", "0.05,0.1"],
        ],
    )
    def test_invalid_requests(self, runner, tmp_path, args):
        """Test a failing model, unknown names or bad step sizes exit 2"""
        result = runner.invoke(cli, ["convergence", *args, "--out", str(tmp_path)])

        assert result.exit_code == EXIT_INVALID


class TestFixturesCommand:
    """Test fixture regeneration"""

    def test_fixtures_are_deterministic(self, runner, tmp_path):
        """Test the same seed writes identical files with the header after the comment"""
        first = runner.invoke(cli, ["fixtures", "--out", str(tmp_path / "a"), "--seed", "11"])
        second = runner.invoke(cli, ["fixtures", "--out", str(tmp_path / "b"), "--seed", "11"])

        assert first.exit_code == second.exit_code == 0
        for name in ("logistic.csv", "temperature.csv", "market.csv"):
            text = (tmp_path / "a" / name).read_text()
            assert text == (tmp_path / "b" / name).read_text()
            assert text.splitlines()[0].startswith(f"# model={name[:-4]} seed=11 ")
            assert text.splitlines()[1] == "t,value"

    def test_points_from_environment(self, runner, tmp_path, monkeypatch):
        """Test ODEBENCH_FIXTURE_POINTS sets the series length"""
        monkeypatch.setenv("ODEBENCH_FIXTURE_POINTS", "11")

        result = runner.invoke(cli, ["fixtures", "--out", str(tmp_path)])

        assert result.exit_code == 0, f"Command failed with output: {result.output}"
        _, rows = read_csv(tmp_path / "logistic.csv")
        assert len(rows) == 11

    def test_fixtures_feed_a_run(self, runner, tmp_path):
        """Test generated fixtures are picked up as the experimental reference"""
        result = runner.invoke(cli, ["fixtures", "--out", str(tmp_path / "fixtures")])
        assert result.exit_code == 0
        scenarios = tmp_path / "scenarios"
        scenarios.mkdir()
        source = Path(__file__).parent.parent / "scenarios" / "temperature.yaml"
        (scenarios / "temperature.yaml").write_text(source.read_text())

        result = runner.invoke(cli, ["run", str(scenarios / "temperature.yaml"), "--out", str(tmp_path / "run")])

        assert result.exit_code == 0, f"Command failed with output: {result.output}"
        _, rows = read_csv(tmp_path / "run" / "errors.csv")
        assert {row[1] for row in rows} == {"empirical", "experimental"}
