"""
Transfer-matrix cocycle of the quasiperiodic operator: products, Lyapunov
exponent, fibered rotation number and the half-line m-function entering the
Kotani formula dN/dE = (1/2 pi) int dx / Im m(E, x).

Orbits are propagated as a single vector (psi_n, psi_{n-1}) renormalised at
every step; energies are handled as a vector so one pass over the orbit
serves a whole E-grid.
"""

import logging
from typing import Dict, Optional, Tuple, Union

import numpy as np

from src.exceptions import ConfigurationError, ConvergenceError
from src.models.operators import FrequencyVector, PhasePoint, Potential, as_point
from src.models.results import CocycleTrace, IdsTable, TransferMatrix
from src.services.model import eval_potential, orbit_points, sample_phases

logger = logging.getLogger(__name__)

MIN_LENGTH = 1000
MONOTONICITY_NOISE = 2e-3
DETERMINANT_TOL = 1e-10

# initial direction off every rational slope, so no energy starts on an eigendirection
_START = np.array([1.0, np.pi / np.sqrt(13.0)]) / np.hypot(1.0, np.pi / np.sqrt(13.0))

Energies = Union[float, np.ndarray]


def _check_length(N: int) -> None:
    if N < MIN_LENGTH:
        raise ConfigurationError(f"cocycle length {N} below the minimum {MIN_LENGTH}")


def _projective_offset(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Angle of (a, b) measured from the line a = 0, reduced to [0, pi)."""
    return np.mod(np.arctan2(b, a) - 0.5 * np.pi, np.pi)


def _walk(
    p: Potential,
    alpha: FrequencyVector,
    E: np.ndarray,
    x0: PhasePoint,
    N: int,
    blocks: int = 1,
) -> Tuple[np.ndarray, np.ndarray]:
    """Propagate (psi_n, psi_{n-1}) for n = 0..N-1 at every energy.

    Returns per-block log-norm sums and per-block projective lifts (radians),
    both of shape (blocks, len(E)); block sums telescope to the whole orbit.
    """
    potential = p.evaluate(orbit_points(alpha, x0, np.arange(N)))
    edges = np.linspace(0, N, blocks + 1).astype(int)
    a = np.full(E.shape, _START[0])
    b = np.full(E.shape, _START[1])
    log_sums = np.zeros((blocks, E.size))
    lifts = np.zeros((blocks, E.size))
    for block in range(blocks):
        start_offset = _projective_offset(a, b)
        crossings = np.zeros(E.shape)
        log_sum = np.zeros(E.shape)
        for n in range(edges[block], edges[block + 1]):
            a_next = (E - potential[n]) * a - b
            # the projective angle only crosses a = 0 counterclockwise
            crossings += ((a > 0) & (a_next <= 0)) | ((a < 0) & (a_next >= 0))
            norm = np.hypot(a_next, a)
            a, b = a_next / norm, a / norm
            log_sum += np.log(norm)
        log_sums[block] = log_sum
        lifts[block] = np.pi * crossings + _projective_offset(a, b) - start_offset
    return log_sums, lifts


def _scalar_or_array(values: np.ndarray, E: Energies) -> Energies:
    return float(values[0]) if np.ndim(E) == 0 else values


def transfer(p: Potential, alpha: FrequencyVector, E: float, x: PhasePoint) -> TransferMatrix:
    """One-step transfer matrix S_{v,E}(x) = [[E - v(x), -1], [1, 0]]; det = 1 exactly."""
    return TransferMatrix(np.array([[E - eval_potential(p, x), -1.0], [1.0, 0.0]]))


def cocycle_product(
    p: Potential, alpha: FrequencyVector, E: float, x0: PhasePoint, N: int
) -> Tuple[np.ndarray, float]:
    """Function that multiplies N steps of the cocycle along the orbit of x0

    Args:
        p (Potential): potential.
        alpha (FrequencyVector): frequencies.
        E (float): energy.
        x0 (PhasePoint): starting phase.
        N (int): number of steps.

    Returns:
        Tuple[np.ndarray, float]: (M, s) with S(x0+(N-1)alpha)...S(x0) = exp(s) M,
            M renormalised to unit spectral norm
    """
    potential = p.evaluate(orbit_points(alpha, x0, np.arange(N)))
    product = np.eye(2)
    log_scale = 0.0
    for value in potential:
        product = np.array([[E - value, -1.0], [1.0, 0.0]]) @ product
        norm = np.linalg.norm(product, 2)
        product /= norm
        log_scale += np.log(norm)
    # det(exp(s) M) = 1 means det M = exp(-2s)
    drift = abs(np.linalg.det(product) - np.exp(-2.0 * log_scale))
    if drift > DETERMINANT_TOL:
        raise ConvergenceError(f"cocycle product lost unimodularity (drift {drift:.3e})")
    return product, float(log_scale)


def cocycle_trace(
    p: Potential, alpha: FrequencyVector, E: float, x0: PhasePoint, N: int
) -> CocycleTrace:
    """Accumulated log-norm and winding (units of pi) of one orbit at one energy."""
    log_sums, lifts = _walk(p, alpha, np.atleast_1d(float(E)), x0, N)
    point = as_point(x0, alpha.dimension)
    return CocycleTrace(
        E=float(E),
        x0=tuple(float(c) for c in point),
        length=N,
        log_norm_sum=float(log_sums.sum()),
        winding=float(lifts.sum() / np.pi),
    )


def lyapunov(
    p: Potential, alpha: FrequencyVector, E: Energies, x0: PhasePoint, N: int
) -> Energies:
    """Lyapunov exponent gamma(E) = (1/N) sum log renormalisation factors, >= 0."""
    _check_length(N)
    energies = np.atleast_1d(np.asarray(E, dtype=float))
    log_sums, _ = _walk(p, alpha, energies, x0, N)
    return _scalar_or_array(np.maximum(log_sums.sum(axis=0) / N, 0.0), E)


def rotation_number(
    p: Potential, alpha: FrequencyVector, E: Energies, x0: PhasePoint, N: int
) -> Energies:
    """Fibered rotation number rho(E) in [0, 1/2] from the Sturm lift of the orbit.

    Args:
        p (Potential): potential.
        alpha (FrequencyVector): frequencies.
        E (float | np.ndarray): energy or ascending energy grid.
        x0 (PhasePoint): starting phase.
        N (int): orbit length, at least 1000.

    Returns:
        float | np.ndarray: lift / (2 pi N), folded into [0, 1/2]
    """
    _check_length(N)
    energies = np.atleast_1d(np.asarray(E, dtype=float))
    _, lifts = _walk(p, alpha, energies, x0, N)
    rho = np.clip(lifts.sum(axis=0) / (2.0 * np.pi * N), 0.0, 0.5)
    if rho.size > 1:
        rises = np.diff(rho)[np.diff(energies) > 0]
        if rises.size and rises.max() > MONOTONICITY_NOISE:
            logger.warning(
                "rotation number increases by %.3e along the E-grid (noise %.1e)",
                rises.max(), MONOTONICITY_NOISE,
            )
    return _scalar_or_array(rho, E)


def cocycle_estimates(
    p: Potential,
    alpha: FrequencyVector,
    E: np.ndarray,
    x0: PhasePoint,
    N: int,
    blocks: int = 10,
) -> Dict[str, np.ndarray]:
    """Lyapunov exponent and rotation number with block standard errors.

    The orbit is cut into `blocks` consecutive pieces; the standard error is the
    spread of the per-block estimates over sqrt(blocks).
    """
    _check_length(N)
    energies = np.atleast_1d(np.asarray(E, dtype=float))
    log_sums, lifts = _walk(p, alpha, energies, x0, N, blocks)
    sizes = np.diff(np.linspace(0, N, blocks + 1).astype(int))[:, None]
    block_gamma = log_sums / sizes
    block_rho = lifts / (2.0 * np.pi * sizes)
    spread = np.sqrt(blocks - 1) if blocks > 1 else 1.0
    return {
        "E": energies,
        "lyapunov": np.maximum(log_sums.sum(axis=0) / N, 0.0),
        "lyapunov_stderr": block_gamma.std(axis=0) / spread,
        "rotation": np.clip(lifts.sum(axis=0) / (2.0 * np.pi * N), 0.0, 0.5),
        "rotation_stderr": block_rho.std(axis=0) / spread,
    }


def ids_from_rotation(
    p: Potential, alpha: FrequencyVector, E_grid: np.ndarray, x0: PhasePoint, N: int
) -> IdsTable:
    """N(E) = 1 - 2 rho(E) on an energy grid, as an IdsTable of one orbit of length N."""
    grid = np.asarray(E_grid, dtype=float)
    rho = np.atleast_1d(rotation_number(p, alpha, grid, x0, N))
    return IdsTable(grid, 1.0 - 2.0 * rho, phase_count=1, window_size=N)


def _strip(
    p: Potential, alpha: FrequencyVector, phases: np.ndarray, z: complex, depth: int,
    chunk: int = 4096,
) -> Tuple[np.ndarray, np.ndarray]:
    """Backward recursion m_n = 1/(v(x + n alpha) - z - m_{n+1}) down to n = 1.

    Runs from the seed i at n = 2 depth and, sharing the potential values, from
    a second seed i at n = depth. Returns (m at depth, m at 2 depth).
    """
    deep = np.full(phases.shape[0], 1j)
    shallow = np.full(phases.shape[0], 1j)
    alpha_vector = alpha.as_array()
    for stop in range(2 * depth, 0, -chunk):
        start = max(stop - chunk, 0)
        n = np.arange(start + 1, stop + 1, dtype=float)
        orbit = phases[None, :, :] + n[:, None, None] * alpha_vector[None, None, :]
        potential = p.evaluate(orbit - np.floor(orbit))
        for row in range(stop - start - 1, -1, -1):
            deep = 1.0 / (potential[row] - z - deep)
            if start + row < depth:
                shallow = 1.0 / (potential[row] - z - shallow)
    return shallow, deep


def m_function(
    p: Potential,
    alpha: FrequencyVector,
    z: complex,
    x: Union[PhasePoint, np.ndarray],
    depth: int = 1000,
    tol: float = 1e-8,
) -> Union[complex, np.ndarray]:
    """Function that computes the right half-line Weyl function m_+(z; x)

    m_+(z; x) = <delta_1, (H_+(x) - z)^-1 delta_1> by coefficient stripping,
    once at `depth` and once at `2 depth`; the two must agree to `tol`.

    Args:
        p (Potential): potential.
        alpha (FrequencyVector): frequencies.
        z (complex): spectral parameter, Im z > 0.
        x (PhasePoint | np.ndarray): one phase, or an array of phases of shape (k, d).
        depth (int, optional): recursion depth, at least 1000. Defaults to 1000.
        tol (float, optional): relative agreement between depths. Defaults to 1e-8.

    Returns:
        complex | np.ndarray: m in the open upper half-plane, one value per phase
    """
    z = complex(z)
    if z.imag <= 0:
        raise ConfigurationError(f"m-function needs Im z > 0, got {z}")
    if depth < MIN_LENGTH:
        raise ConfigurationError(f"m-function depth {depth} below the minimum {MIN_LENGTH}")
    points = np.asarray(x, dtype=float)
    single = points.ndim == 0 or (points.ndim == 1 and points.size == alpha.dimension)
    phases = points.reshape(-1, alpha.dimension)
    shallow, deep = _strip(p, alpha, phases, z, depth)
    deviation = float(np.max(np.abs(shallow - deep) / np.maximum(1.0, np.abs(deep))))
    if deviation > tol:
        raise ConvergenceError(
            f"m-function at z={z} changed by {deviation:.3e} from depth {depth} to {2 * depth}"
        )
    logger.debug("m-function at z=%s over %d phases, depth %d", z, phases.shape[0], depth)
    return complex(deep[0]) if single else deep


def kotani_estimate(
    p: Potential,
    alpha: FrequencyVector,
    E: float,
    epsilon: float = 1e-4,
    phase_samples: int = 200,
    depth: Optional[int] = None,
    mode: str = "equidistributed",
    seed: Optional[int] = 0,
) -> Tuple[float, float]:
    """dN/dE ~ (1/2 pi) <1 / Im m(E + i epsilon, x)>_x and its standard error over phases."""
    if not 1e-6 <= epsilon <= 1e-2:
        raise ConfigurationError(f"epsilon={epsilon} outside [1e-6, 1e-2]")
    if phase_samples < 100:
        raise ConfigurationError(f"kotani density needs 100 phases, got {phase_samples}")
    depth = depth or max(MIN_LENGTH, int(np.ceil(40.0 / epsilon)))
    phases = sample_phases(phase_samples, alpha.dimension, mode, seed)
    m = m_function(p, alpha, complex(E, epsilon), phases, depth=depth, tol=1e-6)
    samples = 1.0 / (2.0 * np.pi * m.imag)
    return float(np.mean(samples)), float(np.std(samples, ddof=1) / np.sqrt(samples.size))


def kotani_density(
    p: Potential,
    alpha: FrequencyVector,
    E: float,
    epsilon: float = 1e-4,
    phase_samples: int = 200,
    depth: Optional[int] = None,
    mode: str = "equidistributed",
    seed: Optional[int] = 0,
) -> float:
    """Phase average of the Kotani integrand, see kotani_estimate."""
    return kotani_estimate(p, alpha, E, epsilon, phase_samples, depth, mode, seed)[0]
