"""
Experiment orchestration: the end-to-end verification pipeline
spectral -> transport -> duality -> spinchain -> cocycle and parameter sweeps
over it. Stage failures are re-raised with their stage tag.
"""

import logging
from contextlib import contextmanager
from typing import Iterator, List, Optional, Sequence, Tuple

import numpy as np
from pydantic import ValidationError

from src.exceptions import ConfigurationError, QplrException, StageError
from src.schemas.experiment import AmoPotentialSpec, ExperimentConfig, centered_window
from src.schemas.report import CheckOutcome, VerificationReport
from src.services.cocycle import lyapunov
from src.services.duality import dual_Q_diagonal
from src.services.emitter import Emitter
from src.services.model import build_dual, build_effective, build_velocity, chain_field
from src.services.spectral import (
    density_of_states,
    detect_gaps,
    eigensolve,
    group_velocity_bound,
    ids,
    inverse_ids,
)
from src.services.spinchain import (
    build_chain,
    covariance_check,
    jordan_wigner,
    lr_velocity_fit,
)
from src.services.transport import q_norm_curve
from src.services.worker import Executor

logger = logging.getLogger(__name__)

SWEEP_AXES = ("lambda", "alpha", "window", "phase")
SPECTRUM_QUANTILES = (0.25, 0.5, 0.75)

SweepTable = List[Tuple[float, Optional[VerificationReport]]]


@contextmanager
def stage(name: str) -> Iterator[None]:
    """Tag package and linear algebra errors raised inside the block with the stage name."""
    logger.info("stage %s", name)
    try:
        yield
    except StageError:
        raise
    except (QplrException, np.linalg.LinAlgError) as error:
        raise StageError(name, error) from error


def _relative(value: float, reference: float) -> float:
    return abs(value - reference) / abs(reference) if reference else float("inf")


def run_verify(
    cfg: ExperimentConfig, emitter: Optional[Emitter] = None, workers: int = 1
) -> VerificationReport:
    """Function that runs every stage on one configuration and checks consistency

    The three checks are: transport plateau vs (1/pi) ess sup dE/dN, light-cone
    velocity vs 2 ||Q|| and the sup of the dual diagonal vs ||Q||.

    Args:
        cfg (ExperimentConfig): validated experiment.
        emitter (Emitter, optional): receives every intermediate table. Defaults to None.
        workers (int, optional): worker processes of the IDS phase sweep. Defaults to 1.

    Returns:
        VerificationReport: measured quantities and the outcome of each check
    """
    p, alpha, x = cfg.build_potential(), cfg.frequency(), cfg.phase_point()
    tol = cfg.tolerances

    with stage("spectral"):
        table = ids(
            p, alpha, cfg.ids_window, cfg.phases.count, cfg.e_grid.values(),
            mode=cfg.phases.mode, seed=cfg.phases.seed, workers=workers,
        )
        gv_bound = group_velocity_bound(
            table, cfg.delta_n, cfg.gap_filter_factor, alpha=alpha
        )
        gaps = detect_gaps(table, cfg.gap_threshold)
        if emitter is not None:
            emitter.write_csv(
                "ids.csv", ["E", "N", "dos"],
                zip(table.grid, table.n_values, density_of_states(table)),
            )
            emitter.write_csv(
                "gaps.csv", ["e_left", "e_right", "N"],
                [(g.e_left, g.e_right, g.n_value) for g in gaps.gaps],
            )

    with stage("transport"):
        op = build_effective(p, alpha, x, centered_window(cfg.transport_window))
        curve = q_norm_curve(op, build_velocity(op.window), cfg.t_grid.values())
        if emitter is not None:
            emitter.write_csv(
                "qnorm.csv", ["T", "central_norm", "full_norm"],
                zip(curve.t_grid, curve.central_norms, curve.full_norms),
            )

    with stage("duality"):
        dual = eigensolve(build_dual(p, alpha, cfg.theta, centered_window(cfg.dual_window)))
        diagonal = dual_Q_diagonal(dual, alpha, cfg.theta, bulk_only=True)
        if emitter is not None:
            emitter.write_csv(
                "dual.csv", ["theta", "k_center", "eigenvalue", "diagonal_entry"],
                diagonal.rows(),
            )

    with stage("spinchain"):
        fit = lr_velocity_fit(
            p, alpha, x, centered_window(cfg.transport_window), cfg.lr_times(),
            threshold=cfg.front_threshold,
        )
        nu = chain_field(p, alpha, x, cfg.chain_sites)
        chain, frame = build_chain(nu, cfg.chain_sites), jordan_wigner(cfg.chain_sites)
        covariance = max(covariance_check(chain, frame, t) for t in cfg.chain_times)
        if emitter is not None:
            emitter.write_csv("lrfit.csv", ["T", "front_radius"], fit.rows())

    with stage("cocycle"):
        energies = np.atleast_1d(inverse_ids(table)(np.array(SPECTRUM_QUANTILES)))
        gamma = float(np.mean(lyapunov(p, alpha, energies, x, cfg.cocycle_length)))

    q_norm = curve.plateau
    checks = [
        CheckOutcome(
            name="q_vs_groupvel",
            value=_relative(q_norm, gv_bound),
            reference=gv_bound,
            tolerance=tol.q_vs_groupvel,
            passed=_relative(q_norm, gv_bound) < tol.q_vs_groupvel,
        ),
        CheckOutcome(
            name="velocity_lower_bound",
            value=fit.v_emp,
            reference=2.0 * q_norm,
            tolerance=tol.velocity_margin,
            passed=fit.v_emp >= 2.0 * q_norm - tol.velocity_margin,
        ),
        CheckOutcome(
            name="dual_vs_q",
            value=_relative(diagonal.sup, q_norm),
            reference=q_norm,
            tolerance=tol.dual_vs_q,
            passed=_relative(diagonal.sup, q_norm) < tol.dual_vs_q,
        ),
    ]
    report = VerificationReport(
        name=cfg.name,
        q_norm=q_norm,
        q_band=curve.band,
        group_velocity_bound=gv_bound,
        dual_sup=diagonal.sup,
        v_emp=fit.v_emp,
        v_emp_stderr=fit.stderr,
        kernel_proxy=curve.kernel_proxy,
        lyapunov_on_spectrum=gamma,
        covariance_max_dev=covariance,
        gap_count=len(gaps),
        checks=checks,
    )
    for check in checks:
        log = logger.info if check.passed else logger.warning
        log("check %s: value %.6g (reference %.6g, tolerance %g) %s",
            check.name, check.value, check.reference, check.tolerance,
            "passed" if check.passed else "FAILED")
    if emitter is not None:
        emitter.write_json("report.json", report.flat())
    return report


def sweep_variant(cfg: ExperimentConfig, axis: str, value: float) -> ExperimentConfig:
    """Configuration with one parameter replaced."""
    data = cfg.model_dump()
    if axis == "lambda":
        if not isinstance(cfg.potential, AmoPotentialSpec):
            raise ConfigurationError("a lambda sweep needs an amo potential")
        data["potential"]["coupling"] = float(value)
    elif axis == "alpha":
        data["alpha"] = [float(value)] + list(cfg.alpha[1:])
    elif axis == "window":
        size = int(value)
        data.update(ids_window=size, transport_window=size, dual_window=size + 1 - size % 2)
    elif axis == "phase":
        data["x"] = [float(value)] + [float(c) for c in np.atleast_1d(cfg.x)[1:]]
    else:
        raise ConfigurationError(f"unknown sweep axis {axis!r}, expected one of {SWEEP_AXES}")
    data["name"] = f"{cfg.name}[{axis}={value:g}]"
    try:
        return ExperimentConfig.model_validate(data)
    except ValidationError as error:
        message = f"{axis}={value:g} gives an invalid experiment:\n{error}"
        raise ConfigurationError(message) from error


def _sweep_point(cfg: ExperimentConfig) -> Optional[VerificationReport]:
    try:
        return run_verify(cfg)
    except QplrException as error:
        logger.warning("%s failed: %s", cfg.name, error)
        return None


def sweep(
    cfg: ExperimentConfig,
    axis: str,
    values: Sequence[float],
    emitter: Optional[Emitter] = None,
    workers: int = 1,
) -> SweepTable:
    """One verification per value of `axis`, run in parallel, merged in input order.

    Values whose pipeline fails are logged and kept in the table without a report.
    """
    if axis not in SWEEP_AXES:
        raise ConfigurationError(f"unknown sweep axis {axis!r}, expected one of {SWEEP_AXES}")
    variants = [sweep_variant(cfg, axis, value) for value in values]
    logger.info("sweep over %s: %d values, %d workers", axis, len(variants), workers)
    with Executor(workers) as executor:
        reports = executor.map(_sweep_point, [(variant,) for variant in variants])
    table: SweepTable = list(zip([float(v) for v in values], reports))
    if emitter is not None:
        rows = []
        for value, report in table:
            if report is None:
                rows.append((axis, value, "failed", 1.0))
                continue
            rows += [(axis, value, key, number) for key, number in report.metrics().items()]
        emitter.write_csv("sweep.csv", ["axis", "value", "metric", "number"], rows)
    return table
