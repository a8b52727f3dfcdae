"""
Options shared by every subcommand and the loader that turns them into a
validated experiment plus an Emitter.
"""

import logging
import sys
from dataclasses import dataclass
from typing import Any, Callable, Optional

import click
from pydantic import ValidationError

from src.config.settings import config
from src.exceptions import ConfigurationError
from src.schemas.experiment import ExperimentConfig, load_experiment
from src.services.emitter import Emitter

logger = logging.getLogger(__name__)

STDOUT = "-"


@dataclass
class Invocation:
    cfg: ExperimentConfig
    emitter: Emitter
    workers: int


def experiment_options(command: Callable[..., Any]) -> Callable[..., Any]:
    """Decorator adding --config, --out, --workers and --seed to a command."""
    decorators = [
        click.option(
            "--config", "config_path", required=True,
            type=click.Path(dir_okay=False), help="Experiment YAML file.",
        ),
        click.option(
            "--out", default=None,
            help="Output directory, '-' for stdout (default: output_dir of the config).",
        ),
        click.option(
            "--workers", default=None, type=click.IntRange(min=1),
            help="Worker processes (RUNNER.WORKERS by default).",
        ),
        click.option("--seed", default=None, type=int, help="Overrides phases.seed."),
    ]
    for decorator in reversed(decorators):
        command = decorator(command)
    return command


def load(
    command: str,
    config_path: str,
    out: Optional[str],
    workers: Optional[int],
    seed: Optional[int],
) -> Invocation:
    """Function that prepares one command run

    Args:
        command (str): subcommand name, recorded in every output header.
        config_path (str): experiment YAML file.
        out (str, optional): output directory or '-' for stdout.
        workers (int, optional): worker processes.
        seed (int, optional): phase sampling seed.

    Returns:
        Invocation: validated config, emitter and worker count
    """
    cfg = load_experiment(config_path)
    try:
        cfg = cfg.with_overrides(seed=seed)
    except ValidationError as error:
        raise ConfigurationError(f"invalid command-line override:\n{error}") from error
    target = cfg.output_dir if out is None else out
    out_dir = None if target in (None, STDOUT) else target
    emitter = Emitter(out_dir, cfg.sha256(), command, stream=sys.stdout)
    n_workers = workers or config["RUNNER"]["WORKERS"]
    logger.info("%s: experiment %s (%s), %d workers, output %s",
                command, cfg.name, config_path, n_workers, out_dir or "stdout")
    return Invocation(cfg, emitter, n_workers)
