#!/usr/bin/env python3
"""
wickcalc - CLI Interface

Numerical workbench for Wick-type star products: runs check suites against the
quantized models and writes machine-readable reports and plot tables.
"""

import os
import sys
from pathlib import Path
from typing import NoReturn

import click
from dotenv import load_dotenv
from loguru import logger
from rich.console import Console
from rich.markup import escape
from rich.table import Table

from . import __version__
from .checks import (
    CHECKS,
    SUITES,
    CheckContext,
    CheckResult,
    list_checks,
    list_models,
    run_check,
    select_checks,
)
from .config import ScenarioConfig, load_config
from .console_logger import log_check
from .errors import EXIT_CHECK_FAILED, EXIT_OK, WickCalcError, exit_code_for
from .runner import run_scenario
from .utils import format_float, setup_logging

console = Console()
err_console = Console(stderr=True)

load_dotenv(Path.cwd() / ".env")


def fail(error: WickCalcError) -> NoReturn:
    """Print a library error and exit with its code."""
    logger.debug(f"Exiting on {error.code.value}")
    err_console.print(f"[red]Error: {escape(str(error))}[/red]")
    sys.exit(exit_code_for(error))


def print_models() -> None:
    for name in list_models():
        console.print(name)


def print_checks(model: str) -> None:
    try:
        check_ids = list_checks(model)
    except WickCalcError as e:
        fail(e)
    for check_id in check_ids:
        console.print(check_id)


def results_table(model: str, results: list[CheckResult]) -> Table:
    table = Table(title=f"Checks on {model}")
    table.add_column("Check", style="cyan")
    table.add_column("Value", justify="right")
    table.add_column("Target", justify="right")
    table.add_column("Tolerance", justify="right")
    table.add_column("Status")

    for result in results:
        status = "[green]PASS[/green]" if result.passed else "[red]FAIL[/red]"
        table.add_row(
            result.id,
            format_float(result.value, 8),
            format_float(result.target, 8),
            format_float(result.tolerance, 3),
            status,
        )
    return table


@click.group()
@click.option("--verbose", "-v", is_flag=True, help="Enable verbose output")
@click.option("--quiet", "-q", is_flag=True, help="Only log warnings and errors")
@click.pass_context
def cli(ctx: click.Context, verbose: bool, quiet: bool) -> None:
    """wickcalc - Check star products, kernels and coherent states numerically."""
    if verbose:
        level = "DEBUG"
    elif quiet:
        level = "WARNING"
    else:
        level = os.environ.get("WICKCALC_LOG_LEVEL", "INFO").upper()
    setup_logging(level)
    ctx.obj = {"log_level": level, "level_forced": verbose or quiet}
    logger.debug(f"wickcalc {__version__} started")


@cli.command()
@click.option("--config", "-c", "config_path", help="Scenario file (YAML or JSON)")
@click.option("--suite", "-s", help=f"Check suite: {', '.join(SUITES)}")
@click.option("--out", "-o", help="Output directory for report.json and CSV tables")
@click.option(
    "--jobs",
    "-j",
    type=click.IntRange(1, 64),
    default=None,
    help="Number of checks run in parallel (env: WICKCALC_JOBS)",
)
@click.option("--list-models", "show_models", is_flag=True, help="List registered models and exit")
@click.option("--list-checks", "checks_model", metavar="MODEL", help="List checks of MODEL and exit")
@click.pass_context
def run(
    ctx: click.Context,
    config_path: str | None,
    suite: str | None,
    out: str | None,
    jobs: int | None,
    show_models: bool,
    checks_model: str | None,
) -> None:
    """Run a check suite and write the report."""
    if show_models:
        print_models()
        return
    if checks_model:
        print_checks(checks_model)
        return

    try:
        config: ScenarioConfig = load_config(config_path)
    except WickCalcError as e:
        fail(e)

    if not ctx.obj["level_forced"] and (
        config.log_level != ctx.obj["log_level"] or config.log_file
    ):
        setup_logging(config.log_level, Path(config.log_file) if config.log_file else None)

    output_directory = Path(out) if out else None
    try:
        outputs = run_scenario(config, suite, output_directory, jobs)
    except WickCalcError as e:
        fail(e)

    console.print(results_table(outputs.model, outputs.results))
    for path in outputs.table_paths:
        logger.debug(f"Table written to {path}")

    if outputs.failed:
        for check_id in outputs.failed:
            err_console.print(f"[red]FAILED {check_id}[/red]")
        err_console.print(
            f"[red]Error: {len(outputs.failed)} of {len(outputs.results)} checks failed[/red]"
        )
        sys.exit(EXIT_CHECK_FAILED)

    console.print(
        f"[green]✓ {len(outputs.results)} checks passed; report written to "
        f"{outputs.report_path}[/green]"
    )
    sys.exit(EXIT_OK)


@cli.command("list-models")
def list_models_command() -> None:
    """List the registered models."""
    print_models()


@cli.command("list-checks")
@click.argument("model")
@click.option("--describe", "-d", is_flag=True, help="Show a one-line summary per check")
def list_checks_command(model: str, describe: bool) -> None:
    """List the checks registered for MODEL."""
    if not describe:
        print_checks(model)
        return

    try:
        check_ids = list_checks(model)
    except WickCalcError as e:
        fail(e)

    table = Table(title=f"Checks for {model}")
    table.add_column("Check", style="cyan")
    table.add_column("Suites", style="yellow")
    table.add_column("Summary", style="green")
    for check_id in check_ids:
        spec = CHECKS[check_id]
        table.add_row(check_id, ", ".join(spec.suites) or "-", spec.summary)
    console.print(table)


@cli.command()
def suites() -> None:
    """List the check suites."""

    table = Table(title="Check Suites")
    table.add_column("Suite", style="cyan")
    table.add_column("Contents", style="green")
    for name, description in SUITES.items():
        table.add_row(name, description)
    console.print(table)


@cli.command()
def version() -> None:
    """Show wickcalc version information."""

    import platform

    import numpy
    import scipy

    table = Table(title="wickcalc Version Information")
    table.add_column("Component", style="cyan")
    table.add_column("Version", style="green")

    table.add_row("wickcalc", __version__)
    table.add_row("Python", platform.python_version())
    table.add_row("Platform", platform.system())
    table.add_row("NumPy", numpy.__version__)
    table.add_row("SciPy", scipy.__version__)

    console.print(table)


@cli.command()
@click.argument("check_id")
@click.option("--config", "-c", "config_path", help="Scenario file (YAML or JSON)")
def check(check_id: str, config_path: str | None) -> None:
    """Run a single check and print its verdict without writing files."""
    try:
        config = load_config(config_path)
        context = CheckContext(config)
        select_checks(context.model.name, ids=[check_id])
        result = run_check(check_id, context)
    except WickCalcError as e:
        fail(e)

    log_check(
        result.id,
        result.passed,
        f"value={format_float(result.value, 8)} target={format_float(result.target, 8)}",
    )
    if result.detail:
        console.print(result.detail)
    sys.exit(EXIT_OK if result.passed else EXIT_CHECK_FAILED)


def main() -> None:
    """Main entry point."""
    try:
        cli()
    except KeyboardInterrupt:
        console.print("\n[yellow]Interrupted by user[/yellow]")
        sys.exit(130)
    except Exception as e:
        logger.error(f"Unexpected error: {e}")
        console.print(f"[red]Unexpected error: {e}[/red]")
        sys.exit(1)


if __name__ == "__main__":
    main()
