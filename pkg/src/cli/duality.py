"""
Commands for the Aubry-dual side: the dual diagonal of Q~(theta) and the
spectral matching of H(x) with H~(theta).
"""

from typing import Optional

import click

from src.cli.options import experiment_options, load
from src.schemas.experiment import centered_window
from src.services.duality import d_theta, dual_Q_diagonal, dual_spectrum_check, orbit_sup
from src.services.model import build_dual
from src.services.spectral import eigensolve


@click.command("dual")
@experiment_options
def dual(
    config_path: str, out: Optional[str], workers: Optional[int], seed: Optional[int]
) -> None:
    """Diagonal of Q~(theta) in the bulk dual eigenbasis, one row per eigenvector."""
    run = load("dual", config_path, out, workers, seed)
    cfg = run.cfg
    s = eigensolve(
        build_dual(cfg.build_potential(), cfg.frequency(), cfg.theta,
                   centered_window(cfg.dual_window))
    )
    diagonal = dual_Q_diagonal(s, cfg.frequency(), cfg.theta, bulk_only=True)
    run.emitter.write_csv(
        "dual.csv", ["theta", "k_center", "eigenvalue", "diagonal_entry"], diagonal.rows()
    )


@click.command("dualcheck")
@experiment_options
def dualcheck(
    config_path: str, out: Optional[str], workers: Optional[int], seed: Optional[int]
) -> None:
    """Hausdorff distance of the bulk spectra, d(theta) and the sup over the theta-orbit."""
    run = load("dualcheck", config_path, out, workers, seed)
    cfg = run.cfg
    p, alpha, window = cfg.build_potential(), cfg.frequency(), centered_window(cfg.dual_window)
    distance = dual_spectrum_check(p, alpha, cfg.theta, cfg.phase_point(), window)
    centred = d_theta(eigensolve(build_dual(p, alpha, cfg.theta, window)), alpha, cfg.theta)
    run.emitter.write_json(
        "dualcheck.json",
        {
            "hausdorff_distance": distance,
            "d_theta": centred.value,
            "d_theta_ambiguous": centred.ambiguous,
            "orbit_k": cfg.orbit_k,
            "orbit_sup": orbit_sup(p, alpha, cfg.theta, window, cfg.orbit_k),
        },
    )


commands = [dual, dualcheck]
