"""
Time evolution on a truncation window, the Cesaro average Q_T of the
velocity observable, propagator light cones and ballistic moments.

Everything is done in the eigenbasis of one eigensolve: e^{-iHt} is
U e^{-i Lambda t} U^H and the time average of e^{iHt} A e^{-iHt} over [0, T]
is an entrywise kernel in that basis, so no time stepping is involved.
"""

import logging
from typing import Optional, Sequence, Union

import numpy as np

from src.exceptions import (
    ConfigurationError,
    ContainmentError,
    DimensionMismatchError,
    SiteIndexError,
)
from src.models.operators import (
    FrequencyVector,
    Potential,
    SpectralData,
    TruncatedOperator,
    VelocityObservable,
    Window,
)
from src.models.results import CesaroResult, LightConeGrid, QNormCurve
from src.services.model import build_effective, sample_phases
from src.services.spectral import eigensolve
from src.services.worker import Executor

logger = logging.getLogger(__name__)

NORM_TOL = 1e-10

OperatorLike = Union[TruncatedOperator, SpectralData]


def containment_limit(window_size: int, scale: float = 1.0) -> float:
    """Largest time for which the front of e^{-i scale H t} (speed 2 scale) stays inside."""
    return window_size / (8.0 * scale)


def check_containment(window_size: int, times: Sequence[float], scale: float = 1.0) -> None:
    """Raise ContainmentError when max(times) lets the front reach the window edges."""
    limit = containment_limit(window_size, scale)
    latest = float(np.max(np.abs(times))) if len(times) else 0.0
    if latest > limit:
        raise ContainmentError(
            f"time {latest:g} exceeds the light-cone containment limit {limit:g} "
            f"for a window of {window_size} sites"
        )


def central_block(size: int) -> slice:
    """Middle half of the window: indices [size // 4, size - size // 4)."""
    return slice(size // 4, size - size // 4)


def _spectral(op: OperatorLike) -> SpectralData:
    if isinstance(op, SpectralData):
        if op.eigenvectors is None:
            raise DimensionMismatchError("spectral data without eigenvectors")
        return op
    return eigensolve(op, eigenvectors=True)


def _site_index(s: SpectralData, site: int) -> int:
    n_min, n_max = s.window
    if not n_min <= site <= n_max:
        raise SiteIndexError(f"site {site} outside the window [{n_min}, {n_max}]")
    return int(site - n_min)


def evolve(s: SpectralData, psi0: np.ndarray, t: float) -> np.ndarray:
    """Function that applies e^{-iHt} to a window vector

    Args:
        s (SpectralData): eigen-decomposition of the window.
        psi0 (np.ndarray): initial vector, one entry per site.
        t (float): time.

    Returns:
        np.ndarray: U e^{-i Lambda t} U^H psi0
    """
    s = _spectral(s)
    psi0 = np.asarray(psi0)
    if psi0.shape != (s.size,):
        raise DimensionMismatchError(
            f"vector of shape {psi0.shape} does not live on a window of {s.size} sites"
        )
    U = s.eigenvectors
    psi = U @ (np.exp(-1j * s.eigenvalues * t) * (U.conj().T @ psi0))
    drift = abs(np.linalg.norm(psi) - np.linalg.norm(psi0))
    if drift > NORM_TOL * max(1.0, float(np.linalg.norm(psi0))):
        logger.warning("evolution at t=%g changed the norm by %.3e", t, drift)
    return psi


def propagator_element(s: SpectralData, l: int, r: int, t: float) -> complex:
    """(delta_r, e^{-iHt} delta_l) = sum_j e^{-i lambda_j t} U_rj conj(U_lj), by site label."""
    s = _spectral(s)
    U = s.eigenvectors
    row_l, row_r = U[_site_index(s, l)], U[_site_index(s, r)]
    return complex(np.sum(np.exp(-1j * s.eigenvalues * t) * row_r * row_l.conj()))


def _cesaro_kernel(eigenvalues: np.ndarray, T: float) -> np.ndarray:
    """phi((lambda_j - lambda_k) T), phi(s) = (e^{is} - 1)/(is) = e^{is/2} sinc(s / 2pi)."""
    phase = (eigenvalues[:, None] - eigenvalues[None, :]) * T
    return np.exp(0.5j * phase) * np.sinc(phase / (2.0 * np.pi))


def cesaro_Q(s: SpectralData, A: VelocityObservable, T: float) -> CesaroResult:
    """Cesaro average Q_T = (1/T) int_0^T e^{iHt} A e^{-iHt} dt in closed form.

    Args:
        s (SpectralData): eigen-decomposition of the window.
        A (VelocityObservable): observable on the same window.
        T (float): averaging time, > 0.

    Returns:
        CesaroResult: Q_T in the site basis with its central-block and full norms
    """
    if T <= 0:
        raise ConfigurationError(f"averaging time must be positive, got {T}")
    s = _spectral(s)
    if A.size != s.size:
        raise DimensionMismatchError(f"observable on {A.size} sites, window has {s.size}")
    if s.size == 1:
        return CesaroResult(T, np.zeros((1, 1), dtype=complex), 0.0, 0.0)
    U = s.eigenvectors
    B = U.conj().T @ A.apply(U)
    return _conjugate_back(U, B, s.eigenvalues, T)


def _conjugate_back(
    U: np.ndarray, B: np.ndarray, eigenvalues: np.ndarray, T: float
) -> CesaroResult:
    Q = U @ (B * _cesaro_kernel(eigenvalues, T)) @ U.conj().T
    Q = 0.5 * (Q + Q.conj().T)
    block = central_block(Q.shape[0])
    return CesaroResult(
        T=float(T),
        matrix=Q,
        central_norm=float(np.linalg.norm(Q[block, block], 2)),
        full_norm=float(np.linalg.norm(Q, 2)),
    )


def kernel_proxy(result: CesaroResult) -> float:
    """Smallest singular value of the central block of Q_T."""
    block = central_block(result.matrix.shape[0])
    return float(np.linalg.svd(result.matrix[block, block], compute_uv=False).min())


def q_norm_curve(
    op: OperatorLike, A: VelocityObservable, T_grid: Sequence[float]
) -> QNormCurve:
    """Function that traces ||Q_T|| along a time grid

    The plateau estimate is the median of the last quartile of central norms and
    the band is their spread; convergence is only expected along a subsequence,
    so both are reported.

    Args:
        op (TruncatedOperator | SpectralData): window of H(x) or its eigen-decomposition.
        A (VelocityObservable): velocity observable on the window.
        T_grid (Sequence[float]): positive averaging times, max <= window/8.

    Returns:
        QNormCurve: norms per T, plateau, band and the kernel proxy at the last T
    """
    times = np.asarray(T_grid, dtype=float)
    if times.size == 0 or np.any(times <= 0):
        raise ConfigurationError("T grid must be non-empty and positive")
    s = _spectral(op)
    check_containment(s.size, times)
    logger.info("q-norm curve: window=%d, %d times up to T=%g", s.size, times.size, times[-1])
    if A.size != s.size:
        raise DimensionMismatchError(f"observable on {A.size} sites, window has {s.size}")
    U = s.eigenvectors
    B = U.conj().T @ A.apply(U)
    results = [_conjugate_back(U, B, s.eigenvalues, T) for T in times]
    central = np.array([r.central_norm for r in results])
    tail = central[-max(1, int(np.ceil(central.size / 4))):]
    return QNormCurve(
        t_grid=times,
        central_norms=central,
        full_norms=np.array([r.full_norm for r in results]),
        plateau=float(np.median(tail)),
        band=float(tail.max() - tail.min()),
        kernel_proxy=kernel_proxy(results[-1]),
    )


def light_cone(op: OperatorLike, l: int, T_grid: Sequence[float]) -> LightConeGrid:
    """|(delta_r, e^{-iHt} delta_l)|^2 for every site r of the window and every t."""
    times = np.asarray(T_grid, dtype=float)
    s = _spectral(op)
    check_containment(s.size, times)
    U = s.eigenvectors
    source = U[_site_index(s, l)].conj()
    phases = np.exp(-1j * np.outer(times, s.eigenvalues))
    amplitudes = (phases * source[None, :]) @ U.T
    return LightConeGrid(times, np.asarray(s.sites), np.abs(amplitudes) ** 2, origin=int(l))


def front_radius(grid: LightConeGrid, l: int, threshold: float) -> np.ndarray:
    """Largest |r - l| with value >= threshold, per time (0 when nothing reaches it)."""
    distance = np.abs(grid.sites - l)[None, :]
    reached = grid.values >= threshold
    return np.where(reached, distance, 0).max(axis=1).astype(float)


def position_moment(
    op: OperatorLike, psi0: np.ndarray, t: float, p: float, center: Optional[float] = None
) -> float:
    """sum_n |n - n_center|^p |psi(t)_n|^2, n_center the window centre unless given."""
    s = _spectral(op)
    check_containment(s.size, [t])
    psi = evolve(s, psi0, t)
    origin = s.center_site if center is None else center
    return float(np.sum(np.abs(s.sites - origin) ** p * np.abs(psi) ** 2))


def _moment_at_phase(
    p: Potential, alpha: FrequencyVector, x: np.ndarray, window: Window,
    site: int, times: np.ndarray, power: float,
) -> np.ndarray:
    s = eigensolve(build_effective(p, alpha, x, window), eigenvectors=True)
    psi0 = np.zeros(s.size)
    psi0[_site_index(s, site)] = 1.0
    return np.array([position_moment(s, psi0, t, power, center=site) for t in times])


def phase_averaged_moment(
    p: Potential,
    alpha: FrequencyVector,
    window: Window,
    phases: Union[int, np.ndarray],
    psi0_site: int,
    t: Union[float, Sequence[float]],
    power: float = 1.0,
    workers: int = 1,
) -> np.ndarray:
    """Average over phases x of sum_n |n - psi0_site|^power |(e^{-iH(x)t} delta_site)_n|^2.

    `phases` is either a count (equidistributed sample) or an explicit (k, d) array.
    Returns one value per time.
    """
    if np.ndim(phases) == 0:
        points = sample_phases(int(phases), alpha.dimension)
    else:
        points = np.asarray(phases, dtype=float).reshape(-1, alpha.dimension)
    times = np.atleast_1d(np.asarray(t, dtype=float))
    logger.info("phase-averaged moment over %d phases, power %g", len(points), power)
    with Executor(workers) as executor:
        moments = executor.map(
            _moment_at_phase,
            [(p, alpha, x, window, psi0_site, times, power) for x in points],
        )
    return np.mean(np.array(moments), axis=0)
