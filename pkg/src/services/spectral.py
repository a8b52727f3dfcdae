"""
Eigenvalue statistics of truncated operators: eigensolves, the integrated
density of states by phase-averaged eigenvalue counting, its inverse E(N),
the group-velocity bound (1/pi) ess sup dE/dN and spectral gap detection.
"""

import logging
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy import linalg

from src.config.settings import config
from src.exceptions import (
    ConfigurationError,
    DegenerateSpectrumError,
    HermiticityError,
    WindowError,
)
from src.models.operators import (
    FrequencyVector,
    Potential,
    SpectralData,
    TruncatedOperator,
)
from src.models.results import Gap, GapReport, IdsTable
from src.services.model import build_effective, sample_phases
from src.services.worker import Executor

logger = logging.getLogger(__name__)


def eigensolve(
    op: Union[TruncatedOperator, np.ndarray], eigenvectors: bool = True
) -> SpectralData:
    """Function that diagonalizes a window of H(x), H~(theta) or an explicit matrix

    Tridiagonal windows go through LAPACK's tridiagonal solvers (eigenvalues only
    up to TRIDIAGONAL_LIMIT sites); everything else through a dense Hermitian solve
    up to DENSE_LIMIT sites.

    Args:
        op (TruncatedOperator | np.ndarray): operator window, or a Hermitian matrix
            whose rows are labelled 0..N-1.
        eigenvectors (bool, optional): compute eigenvectors. Defaults to True.

    Returns:
        SpectralData: ascending eigenvalues and orthonormal eigenvector columns
    """
    numerics = config["NUMERICS"]
    if isinstance(op, TruncatedOperator) and op.is_tridiagonal:
        limit = numerics["DENSE_LIMIT"] if eigenvectors else numerics["TRIDIAGONAL_LIMIT"]
        if op.size > limit:
            raise WindowError(f"window of {op.size} sites exceeds the limit {limit}")
        if op.size == 1:
            return SpectralData(np.array(op.diagonal, dtype=float),
                                np.ones((1, 1)) if eigenvectors else None,
                                op.window, op.sites)
        diagonal, off = op.tridiagonal()
        if eigenvectors:
            values, vectors = linalg.eigh_tridiagonal(diagonal, off)
            return SpectralData(values, vectors, op.window, op.sites)
        values = linalg.eigvalsh_tridiagonal(diagonal, off)
        return SpectralData(values, None, op.window, op.sites)

    if isinstance(op, TruncatedOperator):
        matrix, window, sites = op.to_dense(), op.window, op.sites
    else:
        matrix = np.atleast_2d(np.asarray(op))
        window, sites = (0, matrix.shape[0] - 1), np.arange(matrix.shape[0])
    if matrix.shape[0] != matrix.shape[1]:
        raise HermiticityError(f"matrix of shape {matrix.shape} is not square")
    if matrix.shape[0] > numerics["DENSE_LIMIT"]:
        raise WindowError(f"dense solve of {matrix.shape[0]} sites exceeds the limit")
    scale = max(1.0, float(np.max(np.abs(matrix)))) if matrix.size else 1.0
    asymmetry = float(np.max(np.abs(matrix - matrix.conj().T))) if matrix.size else 0.0
    if asymmetry > numerics["HERMITIAN_TOL"] * scale:
        raise HermiticityError(f"operator is not Hermitian (max deviation {asymmetry:.3e})")
    if eigenvectors:
        values, vectors = linalg.eigh(matrix)
        return SpectralData(values, vectors, window, sites)
    return SpectralData(linalg.eigvalsh(matrix), None, window, sites)


def _phase_levels(
    p: Potential, alpha: FrequencyVector, x: np.ndarray, window_size: int
) -> np.ndarray:
    op = build_effective(p, alpha, x, (0, window_size - 1))
    return eigensolve(op, eigenvectors=False).eigenvalues


def ids(
    p: Potential,
    alpha: FrequencyVector,
    window_size: int,
    phase_count: int,
    E_grid: Sequence[float],
    mode: str = "equidistributed",
    seed: Optional[int] = 0,
    workers: int = 1,
) -> IdsTable:
    """Integrated density of states by eigenvalue counting

    N(E) = average over phases x_j of #{eigenvalues of H(x_j) on the window < E} / window_size.

    Args:
        p (Potential): potential.
        alpha (FrequencyVector): frequencies.
        window_size (int): Dirichlet window length.
        phase_count (int): number of phases averaged.
        E_grid (Sequence[float]): ascending energies.
        mode (str, optional): "equidistributed" or "random". Defaults to "equidistributed".
        seed (int, optional): seed of the random mode. Defaults to 0.
        workers (int, optional): worker processes for the phase sweep. Defaults to 1.

    Returns:
        IdsTable: the sampled N(E) and the sorted levels of every phase
    """
    grid = np.asarray(E_grid, dtype=float)
    if grid.ndim != 1 or grid.size < 2 or np.any(np.diff(grid) <= 0):
        raise ConfigurationError("E grid must be strictly ascending with two points or more")
    phases = sample_phases(phase_count, alpha.dimension, mode, seed)
    logger.info(
        "ids: window=%d phases=%d grid=[%g, %g] x %d",
        window_size, phase_count, grid[0], grid[-1], grid.size,
    )
    with Executor(workers) as executor:
        levels = np.array(
            executor.map(_phase_levels, [(p, alpha, x, window_size) for x in phases])
        )
    total = sum(np.searchsorted(row, grid, side="left") for row in levels)
    return IdsTable(
        grid, total / (window_size * phase_count), phase_count, window_size, levels=levels
    )


@dataclass(frozen=True)
class QuantileFunction:
    """Inverse E(N) of a sampled IDS

    With per-phase levels the k-th level of a window of L sites sits at N = k / (L + 1)
    and E(N) is the phase average of the interpolated levels; otherwise E(N) is
    linear inside the cells of the energy grid.
    """

    table: IdsTable

    def __call__(self, n: Union[float, np.ndarray]) -> Union[float, np.ndarray]:
        q = np.clip(np.asarray(n, dtype=float), 0.0, 1.0)
        if self.table.levels is not None:
            energies = self._from_levels(self.table.levels, q)
        else:
            energies = self._from_grid(q)
        return float(energies) if energies.ndim == 0 else energies

    @staticmethod
    def _from_levels(levels: np.ndarray, q: np.ndarray) -> np.ndarray:
        positions = np.arange(1, levels.shape[1] + 1) / (levels.shape[1] + 1.0)
        return np.mean([np.interp(q, positions, row) for row in levels], axis=0)

    def _from_grid(self, q: np.ndarray) -> np.ndarray:
        grid, values = self.table.grid, self.table.n_values
        index = np.searchsorted(values, q, side="left")
        upper = np.clip(index, 1, grid.size - 1)
        lower = upper - 1
        rise = values[upper] - values[lower]
        fraction = np.where(rise > 0, (q - values[lower]) / np.where(rise > 0, rise, 1.0), 0.0)
        energies = grid[lower] + np.clip(fraction, 0.0, 1.0) * (grid[upper] - grid[lower])
        energies = np.where(index == 0, grid[0], energies)
        energies = np.where(index >= grid.size, grid[-1], energies)
        # N = 0 maps to the bottom of the spectrum, not to the grid start
        bottom = grid[max(int(np.searchsorted(values, 0.0, side="right")) - 1, 0)]
        return np.where(q <= 0.0, bottom, energies)


def inverse_ids(t: IdsTable) -> QuantileFunction:
    """Quantile function E(N) on [0, 1]; jumps at gap plateaus, left-continuous."""
    return QuantileFunction(t)


def _label_vectors(dimension: int, max_order: int) -> np.ndarray:
    orders = np.arange(-max_order, max_order + 1)
    grids = np.meshgrid(*([orders] * dimension), indexing="ij")
    ks = np.stack([g.ravel() for g in grids], axis=-1)
    return ks[np.any(ks != 0, axis=1)]


def label_positions(alpha: FrequencyVector, count: int) -> np.ndarray:
    """{k.alpha} mod 1 for the `count` nonzero k of smallest |k|_1: where gaps can open."""
    if count <= 0:
        return np.empty(0)
    ks = _label_vectors(alpha.dimension, int(np.ceil(count ** (1.0 / alpha.dimension))) + 1)
    ks = ks[np.argsort(np.abs(ks).sum(axis=1), kind="stable")][:count]
    return np.mod(ks @ alpha.as_array(), 1.0)


def _plateau_positions(t: IdsTable, span: float) -> np.ndarray:
    # a plateau must outlast the energy the mean slope covers in eight levels
    spacing = float(np.max(np.diff(t.grid)))
    threshold = max(2.0 * spacing, 8.0 * span / t.window_size)
    return np.array([gap.n_value for gap in detect_gaps(t, threshold).gaps])


def group_velocity_bound(
    t: IdsTable,
    deltaN: float = 1e-3,
    gap_filter_factor: float = 20.0,
    alpha: Optional[FrequencyVector] = None,
) -> float:
    """Estimate ||Q|| = (1/pi) ess sup dE/dN

    Finite differences of E(N) over N-cells of width deltaN, widened to SLOPE_LEVELS
    counting levels of one window when the window is too short to resolve deltaN.
    Gaps are jump points of E(N) and do not enter the essential supremum: cells
    within a few levels of a resolved plateau of N, or of a low-order gap label
    {k.alpha} when alpha is given, are dropped, and of the rest slopes above
    gap_filter_factor times the median are dropped as unresolved jumps.

    Args:
        t (IdsTable): sampled IDS.
        deltaN (float, optional): N spacing in [1e-4, 1e-2]. Defaults to 1e-3.
        gap_filter_factor (float, optional): median multiple. Defaults to 20.
        alpha (FrequencyVector, optional): frequencies whose gap labels are
            excluded, up to LABEL_BUDGET of the N range. Defaults to None.

    Returns:
        float: (1/pi) times the largest retained slope; the Lieb-Robinson
            velocity bound is twice this value
    """
    if not 1e-4 <= deltaN <= 1e-2:
        raise ConfigurationError(f"deltaN={deltaN} outside [1e-4, 1e-2]")
    numerics = config["NUMERICS"]
    width = max(deltaN, numerics["SLOPE_LEVELS"] / t.window_size)
    steps = int(np.floor(1.0 / width + 1e-9))
    nodes = np.linspace(0.0, 1.0, steps + 1)
    energies = inverse_ids(t)(nodes)
    slopes = np.diff(energies) * steps

    margin = 4.0 / t.window_size
    excluded = _plateau_positions(t, float(energies[-1] - energies[0]))
    if alpha is not None:
        count = int(numerics["LABEL_BUDGET"] / (1.0 / steps + 2.0 * margin))
        excluded = np.concatenate([excluded, label_positions(alpha, count)])
    near_gap = np.any(
        (nodes[:-1, None] - margin <= excluded) & (excluded <= nodes[1:, None] + margin),
        axis=1,
    )

    floor = 0.0 if t.levels is not None else 2.0 * float(np.max(np.diff(t.grid)))
    positive = slopes[~near_gap & (slopes > floor)]
    if positive.size == 0:
        raise DegenerateSpectrumError("E(N) has no resolved positive slope")
    median = float(np.median(positive))
    retained = positive[positive <= gap_filter_factor * median]
    if retained.size == 0:
        raise DegenerateSpectrumError("every slope of E(N) was classified as a gap jump")
    logger.debug(
        "group velocity: %d cells, %d near gaps, median slope %.6g, %d retained",
        steps, int(near_gap.sum()), median, retained.size,
    )
    return float(np.max(retained)) / np.pi



def density_of_states(t: IdsTable) -> np.ndarray:
    """Histogram density dN/dE on the table grid (centred differences)."""
    return np.gradient(t.n_values, t.grid)


def detect_gaps(t: IdsTable, threshold: float) -> GapReport:
    """Maximal energy intervals of width >= threshold where N stays constant

    Constancy is up to the counting resolution 2/window_size: Dirichlet edge
    states put at most two levels per truncation inside a gap.
    """
    grid, values = t.grid, t.n_values
    spacing = float(np.max(np.diff(grid)))
    if threshold <= spacing:
        raise ConfigurationError(f"gap threshold {threshold} must exceed spacing {spacing}")
    tolerance = 2.0 / t.window_size
    gaps: List[Gap] = []
    i = 0
    while i < grid.size - 1:
        level = values[i]
        j = int(np.searchsorted(values, level + tolerance, side="right")) - 1
        inside = tolerance < level and values[j] < 1.0 - tolerance
        if inside and grid[j] - grid[i] >= threshold:
            gaps.append(Gap(float(grid[i]), float(grid[j]), float(0.5 * (level + values[j]))))
            i = j
        i += 1
    logger.debug("detected %d gaps wider than %g", len(gaps), threshold)
    return GapReport(tuple(gaps))


def gap_labels(
    report: GapReport, alpha: FrequencyVector, max_order: int = 5
) -> List[Tuple[Gap, Tuple[int, ...], float]]:
    """Best integer label k (|k_i| <= max_order) with N ~ {k.alpha} mod 1, and its residual."""
    ks = _label_vectors(alpha.dimension, max_order)
    labels = np.mod(ks @ alpha.as_array(), 1.0)
    labelled = []
    for gap in report.gaps:
        residuals = np.abs(labels - gap.n_value)
        best = int(np.argmin(residuals))
        labelled.append((gap, tuple(int(c) for c in ks[best]), float(residuals[best])))
    return labelled
