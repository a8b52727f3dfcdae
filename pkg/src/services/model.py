"""
Quasiperiodic potentials and the finite operators built from them:
windows of H(x), of its Aubry dual H~(theta), and the velocity
observable A. Everything here is a pure function of its inputs.
"""

import logging
from typing import Iterable, Optional, Sequence, Tuple

import numpy as np

from src.exceptions import SymmetryError, WindowError
from src.models.operators import (
    Boundary,
    FrequencyVector,
    PhasePoint,
    Potential,
    TruncatedOperator,
    VelocityObservable,
    Window,
    as_point,
)

logger = logging.getLogger(__name__)

IMAGINARY_TOL = 1e-12


def amo_potential(coupling: float) -> Potential:
    """Almost Mathieu potential v(x) = 2 lambda cos(2 pi x), i.e. v_{+-1} = lambda."""
    return Potential(1, {(1,): coupling, (-1,): coupling}, name=f"amo({coupling:g})")


def zero_potential(dimension: int = 1) -> Potential:
    return Potential(dimension, {}, name="zero")


def fourier_potential(
    dimension: int, coefficients: Iterable[Tuple[Sequence[int], float, float]]
) -> Potential:
    """Build a potential from (k-vector, real part, imaginary part) triples."""
    coeffs = {}
    for k, re, im in coefficients:
        key = tuple(int(c) for c in np.atleast_1d(k))
        coeffs[key] = coeffs.get(key, 0.0) + complex(re, im)
    return Potential(dimension, coeffs)


def eval_potential(p: Potential, x: PhasePoint) -> float:
    """Function that evaluates v at a point of the torus

    Args:
        p (Potential): potential to evaluate.
        x (PhasePoint): point of T^d, componentwise in [0, 1).

    Returns:
        float: Re sum_k v_k exp(2 pi i k.x)
    """
    p.check_symmetry()
    point = as_point(x, p.dimension)
    value = complex(p.evaluate_complex(point[None, :])[0])
    if abs(value.imag) > IMAGINARY_TOL * max(1.0, p.sup_norm_bound):
        raise SymmetryError(f"v({point}) has imaginary residue {value.imag:.3e}")
    return value.real


def orbit_points(alpha: FrequencyVector, x: PhasePoint, n: np.ndarray) -> np.ndarray:
    """Points x + n alpha on T^d for integer n, reduced by subtracting the floor."""
    point = as_point(x, alpha.dimension)
    orbit = point[None, :] + np.asarray(n, dtype=float)[:, None] * alpha.as_array()[None, :]
    return orbit - np.floor(orbit)


def build_effective(
    p: Potential,
    alpha: FrequencyVector,
    x: PhasePoint,
    window: Window,
    boundary: Boundary = Boundary.DIRICHLET,
) -> TruncatedOperator:
    """Window [n_min, n_max] of (H(x) psi)_n = psi_{n+1} + psi_{n-1} + v(x + n alpha) psi_n.

    Args:
        p (Potential): on-site potential.
        alpha (FrequencyVector): frequencies, same dimension as p.
        x (PhasePoint): phase on T^d.
        window (Window): inclusive site interval, at least two sites.
        boundary (Boundary, optional): Dirichlet drops couplings across the edge.
            Defaults to Boundary.DIRICHLET.

    Returns:
        TruncatedOperator: real symmetric tridiagonal window (Dirichlet).
    """
    if alpha.dimension != p.dimension:
        raise WindowError(
            f"frequency dimension {alpha.dimension} != potential dimension {p.dimension}"
        )
    n_min, n_max = (int(w) for w in window)
    if n_max - n_min + 1 < 2:
        raise WindowError(f"window {window} has fewer than two sites")
    if boundary is Boundary.PERIODIC and n_max - n_min + 1 < 3:
        raise WindowError("periodic window needs at least three sites")
    sites = np.arange(n_min, n_max + 1)
    diagonal = p.evaluate(orbit_points(alpha, x, sites))
    logger.debug(
        "effective window %s, %s boundary, potential %s", window, boundary.value, p.name
    )
    return TruncatedOperator(
        window=(n_min, n_max),
        diagonal=diagonal,
        hopping={(1,): 1.0, (-1,): 1.0},
        boundary=boundary,
        dimension=1,
        kind="effective",
    )


def build_dual(
    p: Potential, alpha: FrequencyVector, theta: float, window: Window
) -> TruncatedOperator:
    """Box truncation of the dual operator

    (H~(theta) psi)_m = sum_m' v_m' psi_{m-m'} + 2cos 2pi(alpha.m + theta) psi_m.

    The same (m_min, m_max) bounds every axis of Z^d; edges are Dirichlet.
    """
    if alpha.dimension != p.dimension:
        raise WindowError(
            f"frequency dimension {alpha.dimension} != potential dimension {p.dimension}"
        )
    m_min, m_max = (int(w) for w in window)
    if m_max < m_min:
        raise WindowError(f"empty window {window}")
    skeleton = TruncatedOperator(
        window=(m_min, m_max),
        diagonal=np.zeros((m_max - m_min + 1) ** p.dimension),
        hopping={},
        dimension=p.dimension,
        kind="dual",
    )
    sites = skeleton.sites.reshape(skeleton.size, p.dimension)
    phases = sites @ alpha.as_array() + theta
    diagonal = 2.0 * np.cos(2.0 * np.pi * (phases - np.floor(phases)))
    logger.debug("dual window %s on Z^%d, theta=%g", window, p.dimension, theta)
    return TruncatedOperator(
        window=(m_min, m_max),
        diagonal=diagonal,
        hopping=dict(p.fourier_coeffs),
        boundary=Boundary.DIRICHLET,
        dimension=p.dimension,
        kind="dual",
    )


def build_velocity(
    window: Window, boundary: Boundary = Boundary.DIRICHLET
) -> VelocityObservable:
    """Velocity observable A = i[X, H] restricted to the window."""
    return VelocityObservable(window=window, boundary=boundary)


def sample_phases(
    count: int, dimension: int = 1, mode: str = "equidistributed", seed: Optional[int] = 0
) -> np.ndarray:
    """Phase sample on T^d, shape (count, d).

    "equidistributed" is a Kronecker sequence x_j = {1/2 + j beta} whose offsets are
    powers of the generalized golden ratio of dimension d+1 (skipping the first),
    so it never coincides with a golden-mean frequency. "random" is uniform with
    a seeded generator.
    """
    if count < 1:
        raise WindowError("phase count must be positive")
    if mode == "random":
        return np.random.default_rng(seed).random((count, dimension))
    if mode != "equidistributed":
        raise WindowError(f"unknown phase sampling mode {mode!r}")
    phi = 2.0
    for _ in range(128):
        phi = (1.0 + phi) ** (1.0 / (dimension + 2))
    beta = phi ** -np.arange(2, dimension + 2, dtype=float)
    points = 0.5 + np.arange(count, dtype=float)[:, None] * beta[None, :]
    return points - np.floor(points)


def chain_field(p: Potential, alpha: FrequencyVector, x: PhasePoint, n: int) -> np.ndarray:
    """Magnetic field nu_j, j = 0..n-1, of the XY chain whose effective operator is H(x).

    The Jordan-Wigner reduction of -sum(XX + YY) - sum nu Z yields the Laplacian
    plus diag(-nu), hence nu_j = -v(x + j alpha).
    """
    return -p.evaluate(orbit_points(alpha, x, np.arange(n)))
