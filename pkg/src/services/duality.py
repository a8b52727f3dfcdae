"""
Aubry-duality checks: spectra of matched truncations of H(x) and H~(theta),
the diagonal of Q~(theta) in the dual eigenbasis, d(theta) and the sup of
the dual diagonal over a theta-orbit.
"""

import logging
from typing import Optional

import numpy as np
from scipy.spatial.distance import directed_hausdorff

from src.exceptions import DimensionMismatchError
from src.models.operators import FrequencyVector, PhasePoint, Potential, SpectralData, Window
from src.models.results import DTheta, DualDiagonal
from src.services.model import build_dual, build_effective
from src.services.spectral import eigensolve

logger = logging.getLogger(__name__)

EDGE_FRACTION = 0.05
EDGE_WEIGHT = 0.5


def _site_coordinates(s: SpectralData) -> np.ndarray:
    return np.asarray(s.sites).reshape(s.eigenvectors.shape[0], -1)


def bulk_mask(s: SpectralData, edge_fraction: float = EDGE_FRACTION) -> np.ndarray:
    """True for eigenvectors with at most half their weight on the outer edge sites.

    For boxes in Z^d a site is at the edge when any coordinate is.
    """
    coords = _site_coordinates(s)
    n_min, n_max = s.window
    margin = max(1, int(np.ceil(edge_fraction * (n_max - n_min + 1))))
    edge = np.any((coords < n_min + margin) | (coords > n_max - margin), axis=1)
    edge_weight = np.sum(np.abs(s.eigenvectors[edge]) ** 2, axis=0)
    return edge_weight <= EDGE_WEIGHT


def _centers(s: SpectralData) -> np.ndarray:
    coords = _site_coordinates(s)
    peaks = np.argmax(np.abs(s.eigenvectors) ** 2, axis=0)
    centers = coords[peaks]
    return centers[:, 0] if centers.shape[1] == 1 else centers


def dual_Q_diagonal(
    s: SpectralData, alpha: FrequencyVector, theta: float, bulk_only: bool = False
) -> DualDiagonal:
    """Function that evaluates the diagonal of Q~(theta) in the dual eigenbasis

    entry_k = sum_m 2 sin(2 pi (m.alpha + theta)) |u_k(m)|^2 for every normalised
    eigenvector u_k of the dual window.

    Args:
        s (SpectralData): eigen-decomposition of a build_dual window.
        alpha (FrequencyVector): frequencies.
        theta (float): dual phase.
        bulk_only (bool, optional): drop eigenvectors living on the window edges.
            Defaults to False.

    Returns:
        DualDiagonal: entries, eigenvalues and localisation centres, in eigenvalue order
    """
    if s.eigenvectors is None:
        raise DimensionMismatchError("dual diagonal needs eigenvectors")
    coords = _site_coordinates(s)
    if coords.shape[1] != alpha.dimension:
        raise DimensionMismatchError(
            f"dual window on Z^{coords.shape[1]} but alpha has dimension {alpha.dimension}"
        )
    weights = 2.0 * np.sin(2.0 * np.pi * (coords @ alpha.as_array() + theta))
    entries = weights @ (np.abs(s.eigenvectors) ** 2)
    eigenvalues, centers = s.eigenvalues, _centers(s)
    if bulk_only:
        keep = bulk_mask(s)
        entries, eigenvalues, centers = entries[keep], eigenvalues[keep], centers[keep]
    return DualDiagonal(float(theta), entries, eigenvalues, centers)


def _hausdorff(first: np.ndarray, second: np.ndarray) -> float:
    u, v = first.reshape(-1, 1), second.reshape(-1, 1)
    return max(directed_hausdorff(u, v)[0], directed_hausdorff(v, u)[0])


def dual_spectrum_check(
    p: Potential, alpha: FrequencyVector, theta: float, x: PhasePoint, window: Window
) -> float:
    """Hausdorff distance between bulk spectra of H(x) and H~(theta) on the same window."""
    if p.dimension != 1:
        raise DimensionMismatchError("the dual spectrum check is one-dimensional")
    direct = eigensolve(build_effective(p, alpha, x, window))
    dual = eigensolve(build_dual(p, alpha, theta, window))
    distance = _hausdorff(
        direct.eigenvalues[bulk_mask(direct)], dual.eigenvalues[bulk_mask(dual)]
    )
    logger.info("dual spectrum check on %s: Hausdorff distance %.3e", window, distance)
    return distance


def d_theta(s: SpectralData, alpha: FrequencyVector, theta: float) -> DTheta:
    """Diagonal entry of Q~(theta) for the eigenvector centred nearest the window centre.

    The centre is the middle site, rounded up for windows of even length.
    Eigenvectors whose centre is at most one site further away than the nearest
    one are candidates as well; more than one candidate flags the result as ambiguous.
    """
    diagonal = dual_Q_diagonal(s, alpha, theta)
    centers = diagonal.centers.reshape(diagonal.entries.size, -1)
    middle = np.floor(s.center_site + 0.5)
    distance = np.linalg.norm(centers - middle, axis=1)
    candidates = np.flatnonzero(distance - distance.min() <= 1.0)
    if candidates.size == 1:
        return DTheta(float(diagonal.entries[candidates[0]]))
    peak = np.max(np.abs(s.eigenvectors[:, candidates]) ** 2, axis=0)
    ordered = candidates[np.argsort(-peak, kind="stable")]
    values = tuple(float(diagonal.entries[k]) for k in ordered)
    logger.warning(
        "d(theta) at theta=%g is ambiguous: %d eigenvectors centred near the window centre",
        theta, candidates.size,
    )
    return DTheta(values[0], ambiguous=True, candidates=values)


def orbit_sup(
    p: Potential,
    alpha: FrequencyVector,
    theta: float,
    window: Window,
    K: int,
    bulk_only: bool = True,
) -> float:
    """sup over |k| <= K of sup |dual diagonal| at theta + k.alpha (mod 1)."""
    best: Optional[float] = None
    for k in range(-K, K + 1):
        shifted = float(np.mod(theta + k * alpha.as_array()[0], 1.0))
        s = eigensolve(build_dual(p, alpha, shifted, window))
        entries = dual_Q_diagonal(s, alpha, shifted, bulk_only=bulk_only).entries
        if entries.size:
            best = max(best or 0.0, float(np.max(np.abs(entries))))
    logger.debug("orbit sup over %d phases: %s", 2 * K + 1, best)
    return best or 0.0
