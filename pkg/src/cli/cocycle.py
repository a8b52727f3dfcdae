"""
Commands for the transfer-matrix cocycle: Lyapunov exponent, rotation number
and the Kotani density of states.
"""

from typing import Dict, Optional

import click
import numpy as np

from src.cli.options import Invocation, experiment_options, load
from src.services.cocycle import cocycle_estimates, kotani_estimate


def _estimates(run: Invocation) -> Dict[str, np.ndarray]:
    cfg = run.cfg
    return cocycle_estimates(
        cfg.build_potential(), cfg.frequency(), cfg.e_grid.values(), cfg.phase_point(),
        cfg.cocycle_length,
    )


@click.command("lyapunov")
@experiment_options
def lyapunov(
    config_path: str, out: Optional[str], workers: Optional[int], seed: Optional[int]
) -> None:
    """Lyapunov exponent on the E grid with a block standard error."""
    run = load("lyapunov", config_path, out, workers, seed)
    result = _estimates(run)
    run.emitter.write_csv(
        "lyapunov.csv", ["E", "value", "stderr"],
        zip(result["E"], result["lyapunov"], result["lyapunov_stderr"]),
    )


@click.command("rotation")
@experiment_options
def rotation(
    config_path: str, out: Optional[str], workers: Optional[int], seed: Optional[int]
) -> None:
    """Fibered rotation number on the E grid with a block standard error."""
    run = load("rotation", config_path, out, workers, seed)
    result = _estimates(run)
    run.emitter.write_csv(
        "rotation.csv", ["E", "value", "stderr"],
        zip(result["E"], result["rotation"], result["rotation_stderr"]),
    )


@click.command("kotani")
@experiment_options
def kotani(
    config_path: str, out: Optional[str], workers: Optional[int], seed: Optional[int]
) -> None:
    """dN/dE from the phase-averaged m-function on the Kotani grid."""
    run = load("kotani", config_path, out, workers, seed)
    cfg = run.cfg
    p, alpha = cfg.build_potential(), cfg.frequency()
    rows = []
    for E in cfg.kotani_grid.values():
        value, stderr = kotani_estimate(
            p, alpha, float(E), cfg.epsilon, cfg.kotani_phases,
            mode=cfg.phases.mode, seed=cfg.phases.seed,
        )
        rows.append((E, value, stderr))
    run.emitter.write_csv("kotani.csv", ["E", "value", "stderr"], rows)


commands = [lyapunov, rotation, kotani]
