"""Tests for the CLI module."""

import json

from wickcalc.cli import cli

MODELS = ["cylinder", "su11-prime", "su11-variant1", "su11-variant2", "su2-sphere", "zeeman"]


def test_cli_help(runner):
    """Test that the CLI shows help."""
    result = runner.invoke(cli, ["--help"])
    assert result.exit_code == 0
    assert "wickcalc" in result.output


def test_cli_version(runner):
    """Test the version command."""
    result = runner.invoke(cli, ["version"])
    assert result.exit_code == 0
    assert "wickcalc Version Information" in result.output


def test_list_models(runner):
    """Models are listed alphabetically, one per line."""
    result = runner.invoke(cli, ["list-models"])
    assert result.exit_code == 0
    assert result.output.split() == MODELS


def test_run_list_models_flag(runner):
    """The --list-models flag on run prints the same listing."""
    result = runner.invoke(cli, ["run", "--list-models"])
    assert result.exit_code == 0
    assert result.output.split() == MODELS


def test_list_checks(runner):
    """Sphere and cylinder checks include their headline identities."""
    sphere = runner.invoke(cli, ["list-checks", "su2-sphere"])
    assert sphere.exit_code == 0
    assert "casimir-1-plus-hbar" in sphere.output.split()

    cylinder = runner.invoke(cli, ["run", "--list-checks", "cylinder"])
    assert cylinder.exit_code == 0
    assert "tunneling-slope" in cylinder.output.split()
    assert cylinder.output.split() == sorted(cylinder.output.split())


def test_list_checks_unknown_model(runner):
    """An unknown model exits with the configuration error code."""
    result = runner.invoke(cli, ["list-checks", "torus"])
    assert result.exit_code == 2
    assert "su2-sphere" in result.output


def test_suites(runner):
    """The suite table names every suite."""
    result = runner.invoke(cli, ["suites"])
    assert result.exit_code == 0
    for name in ("acceptance", "properties", "quaternion", "tunneling"):
        assert name in result.output


def test_run_unknown_model(runner, write_scenario, tmp_path):
    """A scenario with an unregistered model exits 2 and lists the registry."""
    path = write_scenario("model: torus\n")
    result = runner.invoke(cli, ["run", "-c", str(path), "--out", str(tmp_path / "out")])
    assert result.exit_code == 2
    assert "registered" in result.output
    assert "cylinder" in result.output
    assert not (tmp_path / "out").exists()


def test_run_unknown_suite(runner, write_scenario, tmp_path):
    """An unknown suite is a configuration error."""
    path = write_scenario("model: su2-sphere\n")
    result = runner.invoke(
        cli, ["run", "-c", str(path), "--suite", "nope", "--out", str(tmp_path / "out")]
    )
    assert result.exit_code == 2


def test_run_missing_config(runner, tmp_path):
    """A missing scenario file is a configuration error."""
    result = runner.invoke(cli, ["run", "-c", str(tmp_path / "absent.yml")])
    assert result.exit_code == 2
    assert "Error" in result.output


def test_run_quaternion_suite(runner, write_scenario, tmp_path):
    """The level-1 sphere reproduces the quaternion table."""
    path = write_scenario("model: su2-sphere\nparams:\n  N: 1\nexport_operators: false\n")
    out = tmp_path / "out"
    result = runner.invoke(
        cli, ["-q", "run", "-c", str(path), "--suite", "quaternion", "--out", str(out)]
    )
    assert result.exit_code == 0, result.output

    report = json.loads((out / "report.json").read_text())
    assert report["model"]["name"] == "su2-sphere"
    assert len(report["checks"]) == 10
    assert all(check["passed"] for check in report["checks"])
    assert "runtime_ms" not in report["checks"][0]
    assert set(report["timing"]) == {check["id"] for check in report["checks"]}


def test_run_is_deterministic(runner, write_scenario, tmp_path):
    """Two runs of the same scenario give the same check section."""
    path = write_scenario(
        "model: su2-sphere\nparams:\n  N: 1\nchecks: [quaternion-x1x2, quaternion-casimir]\n"
        "export_operators: false\n"
    )
    sections = []
    for name in ("a", "b"):
        out = tmp_path / name
        result = runner.invoke(cli, ["-q", "run", "-c", str(path), "--out", str(out), "-j", "2"])
        assert result.exit_code == 0, result.output
        sections.append(json.loads((out / "report.json").read_text())["checks"])
    assert json.dumps(sections[0]) == json.dumps(sections[1])


def test_check_command(runner, write_scenario):
    """A single check prints its verdict."""
    path = write_scenario("model: cylinder\n")
    result = runner.invoke(cli, ["check", "kernel-functional-equation", "-c", str(path)])
    assert result.exit_code == 0, result.output
    assert "PASS" in result.output
