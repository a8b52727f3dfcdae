"""
End-to-end commands: the verification pipeline and parameter sweeps over it.
"""

from typing import List, Optional

import click

from src.cli.options import experiment_options, load
from src.exceptions import CheckFailure
from src.services.runner import SWEEP_AXES, run_verify, sweep


@click.command("verify")
@experiment_options
def verify(
    config_path: str, out: Optional[str], workers: Optional[int], seed: Optional[int]
) -> None:
    """Run every stage and check v_emp >= 2||Q|| = (2/pi) ess sup dE/dN."""
    run = load("verify", config_path, out, workers, seed)
    report = run_verify(run.cfg, run.emitter, workers=run.workers)
    if not report.passed:
        failed = [check.name for check in report.checks if not check.passed]
        raise CheckFailure(f"{report.name}: failed checks {', '.join(failed)}")


def _values(ctx: click.Context, param: click.Parameter, text: str) -> List[float]:
    try:
        return [float(item) for item in text.split(",") if item.strip()]
    except ValueError as error:
        raise click.BadParameter(f"expected comma-separated numbers, got {text!r}") from error


@click.command("sweep")
@experiment_options
@click.option("--axis", required=True, type=click.Choice(SWEEP_AXES), help="Swept parameter.")
@click.option(
    "--values", "values", required=True, callback=_values,
    help="Comma-separated values of the swept parameter.",
)
def sweep_command(
    config_path: str, out: Optional[str], workers: Optional[int], seed: Optional[int],
    axis: str, values: List[float],
) -> None:
    """Verification at each value of one parameter, merged into a long-format table."""
    run = load("sweep", config_path, out, workers, seed)
    sweep(run.cfg, axis, values, run.emitter, workers=run.workers)


commands = [verify, sweep_command]
