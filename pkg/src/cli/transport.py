"""
Commands for one-particle transport: the Cesaro-averaged velocity norm, the
light cone of a site and phase-averaged position moments.
"""

from typing import Optional

import click

from src.cli.options import experiment_options, load
from src.schemas.experiment import centered_window
from src.services.model import build_effective, build_velocity, sample_phases
from src.services.transport import light_cone, phase_averaged_moment, q_norm_curve


@click.command("qnorm")
@experiment_options
def qnorm(
    config_path: str, out: Optional[str], workers: Optional[int], seed: Optional[int]
) -> None:
    """||Q_T|| on the central block and on the full window, per T."""
    run = load("qnorm", config_path, out, workers, seed)
    cfg = run.cfg
    op = build_effective(
        cfg.build_potential(), cfg.frequency(), cfg.phase_point(),
        centered_window(cfg.transport_window),
    )
    curve = q_norm_curve(op, build_velocity(op.window), cfg.t_grid.values())
    run.emitter.write_csv(
        "qnorm.csv", ["T", "central_norm", "full_norm"],
        zip(curve.t_grid, curve.central_norms, curve.full_norms),
    )


@click.command("lightcone")
@experiment_options
@click.option("--site", default=0, show_default=True, help="Source site of the light cone.")
def lightcone(
    config_path: str, out: Optional[str], workers: Optional[int], seed: Optional[int],
    site: int,
) -> None:
    """|(delta_r, exp(-iHt) delta_site)|^2 for every site r and every t of the T grid."""
    run = load("lightcone", config_path, out, workers, seed)
    cfg = run.cfg
    op = build_effective(
        cfg.build_potential(), cfg.frequency(), cfg.phase_point(),
        centered_window(cfg.transport_window),
    )
    grid = light_cone(op, site, cfg.t_grid.values())
    run.emitter.write_csv(
        "lightcone.csv", ["t", "r", "value"],
        [
            (t, int(r), value)
            for t, row in zip(grid.times, grid.values)
            for r, value in zip(grid.sites, row)
        ],
    )


@click.command("moments")
@experiment_options
def moments(
    config_path: str, out: Optional[str], workers: Optional[int], seed: Optional[int]
) -> None:
    """Phase-averaged moments sum |n|^p |psi(t)_n|^2 from site 0, for each configured p."""
    run = load("moments", config_path, out, workers, seed)
    cfg = run.cfg
    alpha, times = cfg.frequency(), cfg.t_grid.values()
    phases = sample_phases(cfg.phases.count, alpha.dimension, cfg.phases.mode, cfg.phases.seed)
    rows = []
    for power in cfg.moment_powers:
        values = phase_averaged_moment(
            cfg.build_potential(), alpha, centered_window(cfg.transport_window), phases,
            0, times, power, workers=run.workers,
        )
        rows += [(t, power, value) for t, value in zip(times, values)]
    run.emitter.write_csv("moments.csv", ["t", "p", "value"], rows)


commands = [qnorm, lightcone, moments]
