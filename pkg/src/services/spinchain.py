"""
Exact XY chain H = -sum_j (X_j X_{j+1} + Y_j Y_{j+1}) - sum_j nu_j Z_j on
n <= 12 sites, its Jordan-Wigner fermions and the free-fermion reduction:
c_j(t) = sum_k [exp(-2ith)]_{jk} c_k with h the effective one-particle
operator. Sites are labelled 0..n-1; the reference state u is all spins up.
"""

import logging
from functools import reduce
from typing import Any, Optional, Sequence

import numpy as np
from scipy import linalg, sparse
from scipy.stats import linregress

from src.config.settings import config
from src.exceptions import DimensionMismatchError, FitError, SiteIndexError, WindowError
from src.models.operators import (
    FrequencyVector,
    PhasePoint,
    Potential,
    SpectralData,
    TruncatedOperator,
    Window,
)
from src.models.results import CommutatorCheck, FermionFrame, ManyBodyOperator, VelocityFit
from src.services.model import build_effective
from src.services.spectral import eigensolve
from src.services.transport import (
    check_containment,
    front_radius,
    light_cone,
    propagator_element,
)

logger = logging.getLogger(__name__)

SIGMA_X = sparse.csr_matrix(np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex))
SIGMA_Y = sparse.csr_matrix(np.array([[0.0, -1.0j], [1.0j, 0.0]]))
SIGMA_Z = sparse.csr_matrix(np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex))
# a = (X - iY)/2 and a* = (X + iY)/2 in the basis (up, down)
LOWER = sparse.csr_matrix(np.array([[0.0, 0.0], [1.0, 0.0]], dtype=complex))
RAISE = sparse.csr_matrix(np.array([[0.0, 1.0], [0.0, 0.0]], dtype=complex))

SENSITIVITY_FACTORS = (10 ** -0.5, 1.0, 10 ** 0.5)
COVARIANCE_TOL = 1e-9


def _check_sites(n: int, minimum: int = 1) -> None:
    limit = config["NUMERICS"]["MANY_BODY_LIMIT"]
    if not minimum <= n <= limit:
        raise WindowError(f"many-body chains need {minimum} <= n <= {limit}, got {n}")


def _embed(operators: Sequence[sparse.spmatrix]) -> sparse.csr_matrix:
    return reduce(lambda left, right: sparse.kron(left, right, format="csr"), operators)


def _site_operator(op: sparse.spmatrix, j: int, n: int) -> sparse.csr_matrix:
    """op acting on site j of an n-site chain, identity elsewhere."""
    identity = sparse.identity(2, dtype=complex, format="csr")
    return _embed([op if k == j else identity for k in range(n)])


def build_chain(nu: Sequence[float], n: int) -> ManyBodyOperator:
    """Function that assembles the open XY chain in the full 2^n space

    Args:
        nu (Sequence[float]): magnetic field, one value per site.
        n (int): number of sites, 2 <= n <= MANY_BODY_LIMIT.

    Returns:
        ManyBodyOperator: sparse Hamiltonian, bonds j = 0..n-2
    """
    _check_sites(n, minimum=2)
    field = np.asarray(nu, dtype=float)
    if field.shape != (n,):
        raise DimensionMismatchError(f"field has {field.size} values for {n} sites")
    X = [_site_operator(SIGMA_X, j, n) for j in range(n)]
    Y = [_site_operator(SIGMA_Y, j, n) for j in range(n)]
    Z = [_site_operator(SIGMA_Z, j, n) for j in range(n)]
    H = sparse.csr_matrix((2 ** n, 2 ** n), dtype=complex)
    for j in range(n - 1):
        H = H - X[j] @ X[j + 1] - Y[j] @ Y[j + 1]
    for j in range(n):
        H = H - field[j] * Z[j]
    logger.debug("built XY chain on %d sites (nnz=%d)", n, H.nnz)
    return ManyBodyOperator(n, field, H.tocsr())


def jordan_wigner(n: int) -> FermionFrame:
    """c_j = Z_0 ... Z_{j-1} a_j and the bare raising operators a_j*."""
    _check_sites(n)
    identity = sparse.identity(2, dtype=complex, format="csr")
    annihilators = tuple(
        _embed([SIGMA_Z] * j + [LOWER] + [identity] * (n - j - 1)) for j in range(n)
    )
    raising = tuple(_site_operator(RAISE, j, n) for j in range(n))
    return FermionFrame(n, annihilators, raising)


def effective_from_chain(nu: Sequence[float]) -> TruncatedOperator:
    """One-particle operator h = Laplacian - diag(nu) fixed by the covariance identity."""
    field = np.asarray(nu, dtype=float)
    return TruncatedOperator(
        window=(0, field.size - 1),
        diagonal=-field,
        hopping={(1,): 1.0, (-1,): 1.0},
    )


def _evolution(chain: ManyBodyOperator, t: float) -> np.ndarray:
    """Dense e^{-iHt} from one Hermitian eigensolve."""
    values, vectors = linalg.eigh(chain.matrix.toarray())
    return (vectors * np.exp(-1j * values * t)) @ vectors.conj().T


def many_body_heisenberg(
    chain: ManyBodyOperator, op: sparse.spmatrix, t: float, U: Optional[np.ndarray] = None
) -> np.ndarray:
    """Heisenberg picture e^{iHt} op e^{-iHt} as a dense matrix."""
    U = _evolution(chain, t) if U is None else U
    return U.conj().T @ (op @ U)


def _one_particle(chain: ManyBodyOperator) -> SpectralData:
    return eigensolve(effective_from_chain(chain.nu), eigenvectors=True)


def _check_frame(chain: ManyBodyOperator, frame: FermionFrame) -> None:
    if chain.n_sites != frame.n_sites:
        raise DimensionMismatchError(
            f"chain on {chain.n_sites} sites, fermion frame on {frame.n_sites}"
        )


def covariance_check(chain: ManyBodyOperator, frame: FermionFrame, t: float) -> float:
    """max_j || c_j(t) - sum_k [exp(-2ith)]_{jk} c_k || in operator norm."""
    _check_frame(chain, frame)
    h = effective_from_chain(chain.nu).to_dense()
    G = linalg.expm(-2j * t * h)
    U = _evolution(chain, t)
    deviation = 0.0
    for j, c in enumerate(frame.annihilators):
        evolved = many_body_heisenberg(chain, c, t, U)
        predicted = sparse.csr_matrix(c.shape, dtype=complex)
        for k, c_k in enumerate(frame.annihilators):
            predicted = predicted + G[j, k] * c_k
        deviation = max(deviation, float(np.linalg.norm(evolved - predicted.toarray(), 2)))
    logger.info("covariance check on %d sites at t=%g: max deviation %.3e",
                chain.n_sites, t, deviation)
    return deviation


def commutator_bound_check(
    chain: ManyBodyOperator, frame: FermionFrame, l: int, r: int, t: float
) -> CommutatorCheck:
    """Function that compares ||[c_l(t), a_r*]|| with the one-particle propagator

    With u the all-up state, [c_l(t), a_r*] u = -G_lr u for G = exp(-2ith), so
    <u|[a_r*, c_l(t)]|u> must reproduce G_lr and the operator norm bounds |G_lr|.

    Args:
        chain (ManyBodyOperator): XY chain.
        frame (FermionFrame): Jordan-Wigner frame on the same sites.
        l (int): site of the fermion, 0 <= l <= r.
        r (int): site of the spin raising operator, r <= n-1.
        t (float): time.

    Returns:
        CommutatorCheck: norm, bound, matrix element and propagator element
    """
    _check_frame(chain, frame)
    if not 0 <= l <= r <= chain.n_sites - 1:
        raise SiteIndexError(f"need 0 <= l <= r <= {chain.n_sites - 1}, got l={l}, r={r}")
    c_t = many_body_heisenberg(chain, frame.annihilators[l], t)
    raising = frame.raising[r].toarray()
    commutator = c_t @ raising - raising @ c_t
    propagator = propagator_element(_one_particle(chain), l, r, 2.0 * t)
    return CommutatorCheck(
        l=l,
        r=r,
        t=float(t),
        lhs=float(np.linalg.norm(commutator, 2)),
        rhs=abs(propagator),
        matrix_element=complex(-commutator[0, 0]),
        propagator=propagator,
    )


def _front_slope(times: np.ndarray, radii: np.ndarray) -> Any:
    if np.unique(times).size < 2:
        raise FitError("front fit needs at least two distinct times")
    return linregress(times, radii)


def lr_velocity_fit(
    p: Potential,
    alpha: FrequencyVector,
    x: PhasePoint,
    window: Window,
    T_grid: Sequence[float],
    threshold: float = 1e-4,
    l: Optional[int] = None,
) -> VelocityFit:
    """Empirical Lieb-Robinson velocity from the free-fermion light cone

    r(T) = max{|r - l| : |(exp(-2iTH) delta_l, delta_r)| >= threshold} on the window,
    fitted linearly in T. The same fit at threshold x 10^(+-1/2) is reported as
    the sensitivity of the slope.

    Args:
        p (Potential): potential of H_eff.
        alpha (FrequencyVector): frequencies.
        x (PhasePoint): phase.
        window (Window): site window, T <= window/16 for containment.
        T_grid (Sequence[float]): fit times.
        threshold (float, optional): amplitude threshold. Defaults to 1e-4.
        l (int, optional): source site. Defaults to the window centre.

    Returns:
        VelocityFit: slope, intercept, its standard error and the sensitivity sweep
    """
    times = np.asarray(T_grid, dtype=float)
    op = build_effective(p, alpha, x, window)
    check_containment(op.size, times, scale=2.0)
    source = (op.window[0] + op.window[1]) // 2 if l is None else int(l)
    grid = light_cone(eigensolve(op, eigenvectors=True), source, 2.0 * times)

    def radii_at(level: float) -> np.ndarray:
        return front_radius(grid, source, level ** 2)

    radii = radii_at(threshold)
    if not np.any(radii[times > 0] > 0):
        raise FitError(f"amplitude threshold {threshold:g} never reached beyond the source")
    fit = _front_slope(times, radii)
    sensitivity = {
        float(level): float(_front_slope(times, radii_at(level)).slope)
        for level in threshold * np.array(SENSITIVITY_FACTORS)
    }
    logger.info("light-cone fit: v_emp=%.4f +- %.4f at threshold %g",
                fit.slope, fit.stderr, threshold)
    return VelocityFit(
        v_emp=float(fit.slope),
        intercept=float(fit.intercept),
        stderr=float(fit.stderr),
        threshold=float(threshold),
        times=times,
        radii=radii,
        sensitivity=sensitivity,
    )
