"""
Commands exposing the integrated density of states and the group-velocity bound.
"""

from typing import Optional

import click

from src.cli.options import experiment_options, load
from src.models.results import IdsTable
from src.schemas.experiment import ExperimentConfig
from src.services.spectral import detect_gaps, gap_labels, group_velocity_bound, ids


def _ids_table(cfg: ExperimentConfig, workers: int) -> IdsTable:
    return ids(
        cfg.build_potential(), cfg.frequency(), cfg.ids_window, cfg.phases.count,
        cfg.e_grid.values(), mode=cfg.phases.mode, seed=cfg.phases.seed, workers=workers,
    )


@click.command("ids")
@experiment_options
def ids_command(
    config_path: str, out: Optional[str], workers: Optional[int], seed: Optional[int]
) -> None:
    """Phase-averaged IDS N(E) by eigenvalue counting, plus the labelled gaps."""
    run = load("ids", config_path, out, workers, seed)
    table = _ids_table(run.cfg, run.workers)
    run.emitter.write_csv("ids.csv", ["E", "N"], zip(table.grid, table.n_values))
    labelled = gap_labels(detect_gaps(table, run.cfg.gap_threshold), run.cfg.frequency())
    run.emitter.write_csv(
        "gaps.csv",
        ["e_left", "e_right", "N", "label", "residual"],
        [
            (gap.e_left, gap.e_right, gap.n_value, " ".join(map(str, k)), residual)
            for gap, k, residual in labelled
        ],
    )


@click.command("groupvel")
@experiment_options
def groupvel(
    config_path: str, out: Optional[str], workers: Optional[int], seed: Optional[int]
) -> None:
    """(1/pi) ess sup dE/dN and the Lieb-Robinson velocity bound twice that."""
    run = load("groupvel", config_path, out, workers, seed)
    table = _ids_table(run.cfg, run.workers)
    bound = group_velocity_bound(
        table, run.cfg.delta_n, run.cfg.gap_filter_factor, alpha=run.cfg.frequency()
    )
    run.emitter.write_json(
        "groupvel.json",
        {
            "q_norm_bound": bound,
            "lr_velocity_bound": 2.0 * bound,
            "deltaN": run.cfg.delta_n,
            "window": run.cfg.ids_window,
            "phases": run.cfg.phases.count,
        },
    )


commands = [ids_command, groupvel]
