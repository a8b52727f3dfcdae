"""
Main Application class that extends click.Group behavior.
"""

import logging
import sys
from typing import Any, Optional

import click
import numpy as np

from src.cli import cocycle, duality, runner, spectral, spinchain, transport
from src.config.settings import config
from src.exceptions import QplrException

logger = logging.getLogger(__name__)

LOG_LEVELS = ("DEBUG", "INFO", "WARNING", "ERROR")


def _set_level(ctx: click.Context, param: click.Parameter, value: Optional[str]) -> None:
    if value is not None:
        logging.getLogger().setLevel(value.upper())


class Application(click.Group):
    """
    Wrapper class for the qplr command line
    """

    def __init__(self) -> None:
        """COMMAND GROUP CONFIGURATION"""
        super().__init__(
            name=config["APP"]["NAME"],
            help="Quasiperiodic XY chains: spectra, transport, duality and light cones.",
            params=[
                click.Option(
                    ["--log-level"],
                    type=click.Choice(LOG_LEVELS, case_sensitive=False),
                    default=None,
                    expose_value=False,
                    is_eager=True,
                    callback=_set_level,
                    help="Overrides LOGGING.LEVEL.",
                ),
            ],
        )

    def bootstrap(self) -> None:
        """LOGGING AND COMMAND CONFIGURATION"""
        logging.basicConfig(
            level=config["LOGGING"]["LEVEL"],
            format=config["LOGGING"]["FORMAT"],
            stream=sys.stderr,
        )
        self.configure_commands()

    def configure_commands(self) -> None:
        """REGISTER COMMAND GROUPS"""
        for group in (spectral, transport, cocycle, duality, spinchain, runner):
            for command in group.commands:
                self.add_command(command)

    def invoke(self, ctx: click.Context) -> Any:
        """Run the subcommand; package errors become their exit codes."""
        try:
            return super().invoke(ctx)
        except QplrException as error:
            logger.debug("command failed", exc_info=True)
            click.echo(f"Error: {error}", err=True)
            ctx.exit(error.exit_code)
        except np.linalg.LinAlgError as error:
            click.echo(f"Error: linear algebra failure: {error}", err=True)
            ctx.exit(QplrException.exit_code)
