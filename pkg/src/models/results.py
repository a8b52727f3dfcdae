"""
Result containers produced by the services. Plain frozen dataclasses,
no behaviour beyond small derived properties.
"""

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np
from scipy import sparse


def _frozen(array: np.ndarray) -> np.ndarray:
    array = np.array(array, copy=True)
    array.setflags(write=False)
    return array


@dataclass(frozen=True)
class TransferMatrix:
    """One step [[E - v(x), -1], [1, 0]] of the Schrodinger cocycle."""

    entries: np.ndarray

    def __post_init__(self) -> None:
        object.__setattr__(self, "entries", _frozen(np.asarray(self.entries, dtype=float)))

    @property
    def determinant(self) -> float:
        (a, b), (c, d) = self.entries
        return float(a * d - b * c)


@dataclass(frozen=True)
class CocycleTrace:
    """Accumulated log-norm and projective winding (in units of pi) of a cocycle orbit."""

    E: float
    x0: Tuple[float, ...]
    length: int
    log_norm_sum: float
    winding: float


@dataclass(frozen=True)
class IdsTable:
    """N(E) on an energy grid; `levels` keeps the sorted eigenvalues of each phase."""

    grid: np.ndarray
    n_values: np.ndarray
    phase_count: int
    window_size: int
    levels: Optional[np.ndarray] = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "grid", _frozen(np.asarray(self.grid, dtype=float)))
        object.__setattr__(self, "n_values", _frozen(np.asarray(self.n_values, dtype=float)))
        if self.levels is not None:
            levels = np.atleast_2d(np.asarray(self.levels, dtype=float))
            object.__setattr__(self, "levels", _frozen(levels))

    @property
    def resolution(self) -> float:
        """Smallest nonzero increment of N: one level of one phase."""
        return 1.0 / (self.window_size * self.phase_count)


@dataclass(frozen=True)
class Gap:
    e_left: float
    e_right: float
    n_value: float

    @property
    def width(self) -> float:
        return self.e_right - self.e_left


@dataclass(frozen=True)
class GapReport:
    gaps: Tuple[Gap, ...] = ()

    def __len__(self) -> int:
        return len(self.gaps)

    def largest(self) -> Optional[Gap]:
        return max(self.gaps, key=lambda g: g.width, default=None)


@dataclass(frozen=True)
class CesaroResult:
    T: float
    matrix: np.ndarray
    central_norm: float
    full_norm: float

    def __post_init__(self) -> None:
        object.__setattr__(self, "matrix", _frozen(self.matrix))


@dataclass(frozen=True)
class QNormCurve:
    """Central-block norms of Q_T along a time grid and the plateau read off its tail."""

    t_grid: np.ndarray
    central_norms: np.ndarray
    full_norms: np.ndarray
    plateau: float
    band: float
    kernel_proxy: float


@dataclass(frozen=True)
class LightConeGrid:
    """values[i, j] = |amplitude|^2 (or a commutator norm) at times[i], sites[j]."""

    times: np.ndarray
    sites: np.ndarray
    values: np.ndarray
    origin: int

    def __post_init__(self) -> None:
        for name in ("times", "sites", "values"):
            object.__setattr__(self, name, _frozen(getattr(self, name)))


@dataclass(frozen=True)
class DualDiagonal:
    theta: float
    entries: np.ndarray
    eigenvalues: np.ndarray
    centers: np.ndarray

    def __post_init__(self) -> None:
        for name in ("entries", "eigenvalues", "centers"):
            object.__setattr__(self, name, _frozen(getattr(self, name)))

    @property
    def sup(self) -> float:
        return float(np.max(np.abs(self.entries))) if self.entries.size else 0.0

    def rows(self) -> List[Tuple[float, float, float, float]]:
        """(theta, k_center, eigenvalue, entry), k_center the eigenvector index for d > 1."""
        centers = self.centers if self.centers.ndim == 1 else np.arange(self.entries.size)
        return [
            (self.theta, float(c), float(e), float(d))
            for c, e, d in zip(centers, self.eigenvalues, self.entries)
        ]


@dataclass(frozen=True)
class DTheta:
    """d(theta) read off the eigenvector centred nearest the window centre."""

    value: float
    ambiguous: bool = False
    candidates: Tuple[float, ...] = ()


@dataclass(frozen=True)
class ManyBodyOperator:
    n_sites: int
    nu: np.ndarray
    matrix: sparse.csr_matrix

    def __post_init__(self) -> None:
        object.__setattr__(self, "nu", _frozen(np.asarray(self.nu, dtype=float)))

    @property
    def dimension(self) -> int:
        return 2 ** self.n_sites


@dataclass(frozen=True)
class FermionFrame:
    """Jordan-Wigner annihilators c_j and spin raising operators a_j* (site order)."""

    n_sites: int
    annihilators: Tuple[sparse.csr_matrix, ...]
    raising: Tuple[sparse.csr_matrix, ...]


@dataclass(frozen=True)
class CommutatorCheck:
    l: int
    r: int
    t: float
    lhs: float
    rhs: float
    matrix_element: complex
    propagator: complex

    @property
    def passed(self) -> bool:
        return (
            self.lhs >= self.rhs - 1e-10
            and abs(self.matrix_element - self.propagator) < 1e-10
        )


@dataclass(frozen=True)
class VelocityFit:
    v_emp: float
    intercept: float
    stderr: float
    threshold: float
    times: np.ndarray
    radii: np.ndarray
    sensitivity: Dict[float, float] = field(default_factory=dict)

    def rows(self) -> List[Tuple[float, float]]:
        return [(float(t), float(r)) for t, r in zip(self.times, self.radii)]
