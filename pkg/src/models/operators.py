"""
Operator-level domain types: potentials on the torus, frequency vectors,
finite windows of H(x) / H~(theta), the velocity observable and the
eigen-decomposition of a window.

All types are frozen; array fields are made read-only on construction so
values can be shared between threads and worker processes.
"""

from dataclasses import dataclass, field
from enum import Enum
from types import MappingProxyType
from typing import Mapping, Optional, Sequence, Tuple, Union

import numpy as np

from src.exceptions import SymmetryError, WindowError

Offset = Tuple[int, ...]
Window = Tuple[int, int]
PhasePoint = Union[float, Sequence[float], np.ndarray]

SYMMETRY_TOL = 1e-12


def _frozen(array: np.ndarray) -> np.ndarray:
    array = np.array(array, copy=True)
    array.setflags(write=False)
    return array


def as_point(x: PhasePoint, dimension: int) -> np.ndarray:
    """Coerce a phase point to a length-d float vector reduced mod 1."""
    point = np.atleast_1d(np.asarray(x, dtype=float))
    if point.shape != (dimension,):
        raise WindowError(f"phase point {x!r} does not live on T^{dimension}")
    return point - np.floor(point)


class Boundary(str, Enum):
    DIRICHLET = "dirichlet"
    PERIODIC = "periodic"


@dataclass(frozen=True)
class Potential:
    """
    Real trigonometric polynomial v(x) = sum_k v_k exp(2 pi i k.x) on T^d.

    Args:
        dimension (int): torus dimension d.
        fourier_coeffs (Mapping[Offset, complex]): finitely supported
            coefficients, keys are length-d integer tuples.
        name (str, optional): label used in logs and report headers.
    """

    dimension: int
    fourier_coeffs: Mapping[Offset, complex]
    name: str = "fourier"

    def __post_init__(self) -> None:
        if self.dimension < 1:
            raise WindowError("potential dimension must be positive")
        coeffs = {}
        for k, value in self.fourier_coeffs.items():
            key = tuple(int(c) for c in np.atleast_1d(k))
            if len(key) != self.dimension:
                raise SymmetryError(f"wave vector {k!r} is not in Z^{self.dimension}")
            if value != 0:
                coeffs[key] = complex(value)
        object.__setattr__(self, "fourier_coeffs", MappingProxyType(coeffs))
        self.check_symmetry()

    def __reduce__(self) -> Tuple[type, Tuple[int, dict, str]]:
        # mappingproxy does not pickle; worker processes receive a plain dict
        return (Potential, (self.dimension, dict(self.fourier_coeffs), self.name))

    def check_symmetry(self) -> None:
        """Raise SymmetryError unless v_{-k} = conj(v_k) for every stored k."""
        for k, value in self.fourier_coeffs.items():
            mirror = self.fourier_coeffs.get(tuple(-c for c in k), 0.0)
            if abs(mirror - np.conj(value)) > SYMMETRY_TOL:
                raise SymmetryError(
                    f"v_{{-k}} != conj(v_k) at k={k}: {mirror} vs {np.conj(value)}"
                )

    @property
    def support(self) -> Tuple[Offset, ...]:
        return tuple(sorted(self.fourier_coeffs))

    def coefficient(self, k: Offset) -> complex:
        return self.fourier_coeffs.get(tuple(k), 0.0)

    def evaluate_complex(self, points: np.ndarray) -> np.ndarray:
        """Evaluate the Fourier sum at points of shape (..., d) without taking Re."""
        points = np.asarray(points, dtype=float)
        if self.dimension == 1 and not (points.ndim >= 2 and points.shape[-1] == 1):
            points = points[..., None]
        if not self.fourier_coeffs:
            return np.zeros(points.shape[:-1], dtype=complex)
        ks = np.array(self.support, dtype=float)
        amplitudes = np.array([self.fourier_coeffs[k] for k in self.support])
        phases = 2.0 * np.pi * points @ ks.T
        return np.exp(1j * phases) @ amplitudes

    def evaluate(self, points: np.ndarray) -> np.ndarray:
        return self.evaluate_complex(points).real

    @property
    def sup_norm_bound(self) -> float:
        """Upper bound sum |v_k| >= max |v|."""
        return float(sum(abs(c) for c in self.fourier_coeffs.values()))


@dataclass(frozen=True)
class FrequencyVector:
    """
    Frequencies alpha in (0,1)^d. Rational independence of {1, alpha_i}
    cannot be checked numerically and is carried as a trust flag.
    """

    alpha: Tuple[float, ...]
    rationally_independent: bool = True

    def __post_init__(self) -> None:
        alpha = tuple(float(a) for a in np.atleast_1d(self.alpha))
        if not alpha:
            raise WindowError("frequency vector is empty")
        if any(not 0.0 < a < 1.0 for a in alpha):
            raise WindowError(f"frequencies must lie in (0,1), got {alpha}")
        object.__setattr__(self, "alpha", alpha)

    @property
    def dimension(self) -> int:
        return len(self.alpha)

    def as_array(self) -> np.ndarray:
        return np.array(self.alpha)


@dataclass(frozen=True)
class TruncatedOperator:
    """
    Finite window of H(x) (kind "effective") or H~(theta) (kind "dual").

    Matrix convention: (H psi)_m = sum_o hopping[o] psi_{m-o} + diagonal_m psi_m,
    so H[m, m-o] = hopping[o]. For dimension > 1 the window bounds every axis
    and sites are ordered lexicographically.
    """

    window: Window
    diagonal: np.ndarray
    hopping: Mapping[Offset, complex]
    boundary: Boundary = Boundary.DIRICHLET
    dimension: int = 1
    kind: str = "effective"

    def __post_init__(self) -> None:
        n_min, n_max = (int(w) for w in self.window)
        if n_max < n_min:
            raise WindowError(f"empty window {self.window}")
        object.__setattr__(self, "window", (n_min, n_max))
        diagonal = np.asarray(self.diagonal)
        if diagonal.shape != (self.side ** self.dimension,):
            raise WindowError(
                f"diagonal has {diagonal.shape} entries, window needs {self.size}"
            )
        object.__setattr__(self, "diagonal", _frozen(diagonal))
        hopping = {tuple(int(c) for c in np.atleast_1d(o)): complex(v)
                   for o, v in self.hopping.items() if v != 0}
        object.__setattr__(self, "hopping", MappingProxyType(hopping))

    @property
    def side(self) -> int:
        return self.window[1] - self.window[0] + 1

    @property
    def size(self) -> int:
        return self.side ** self.dimension

    @property
    def sites(self) -> np.ndarray:
        """Site labels, shape (size,) for d=1 and (size, d) otherwise."""
        axis = np.arange(self.window[0], self.window[1] + 1)
        if self.dimension == 1:
            return axis
        grids = np.meshgrid(*([axis] * self.dimension), indexing="ij")
        return np.stack([g.ravel() for g in grids], axis=-1)

    @property
    def is_tridiagonal(self) -> bool:
        return (
            self.dimension == 1
            and self.boundary is Boundary.DIRICHLET
            and set(self.hopping) <= {(1,), (-1,)}
            and self.hopping.get((1,), 0.0) == self.hopping.get((-1,), 0.0)
            and all(v.imag == 0.0 for v in self.hopping.values())
            and np.isrealobj(self.diagonal)
        )

    def tridiagonal(self) -> Tuple[np.ndarray, np.ndarray]:
        """(diagonal, first off-diagonal) for LAPACK tridiagonal solvers."""
        off = np.full(self.size - 1, self.hopping.get((-1,), 0.0).real)
        return np.asarray(self.diagonal, dtype=float), off

    def to_dense(self) -> np.ndarray:
        side, d = self.side, self.dimension
        shape = (side,) * d
        complex_entries = any(v.imag != 0.0 for v in self.hopping.values())
        dtype = complex if complex_entries or np.iscomplexobj(self.diagonal) else float
        matrix = np.zeros((self.size, self.size), dtype=dtype)
        matrix[np.diag_indices(self.size)] = self.diagonal
        coords = np.indices(shape).reshape(d, -1).T
        rows = np.arange(self.size)
        for offset, value in self.hopping.items():
            target = coords - np.array(offset)
            if self.boundary is Boundary.PERIODIC:
                target = np.mod(target, side)
                valid = np.ones(self.size, dtype=bool)
            else:
                valid = np.all((target >= 0) & (target < side), axis=1)
            columns = np.ravel_multi_index(tuple(target[valid].T), shape)
            entry = value.real if dtype is float else value
            np.add.at(matrix, (rows[valid], columns), entry)
        return matrix


@dataclass(frozen=True)
class VelocityObservable:
    """
    A = i[X, H] on a window: A[n+1, n] = i, A[n, n+1] = -i. Hermitian, norm <= 2.
    """

    window: Window
    boundary: Boundary = Boundary.DIRICHLET

    def __post_init__(self) -> None:
        n_min, n_max = (int(w) for w in self.window)
        if n_max < n_min:
            raise WindowError(f"empty window {self.window}")
        if self.boundary is Boundary.PERIODIC and n_max - n_min + 1 < 3:
            raise WindowError("periodic velocity observable needs at least 3 sites")
        object.__setattr__(self, "window", (n_min, n_max))

    @property
    def size(self) -> int:
        return self.window[1] - self.window[0] + 1

    def to_dense(self) -> np.ndarray:
        size = self.size
        matrix = np.zeros((size, size), dtype=complex)
        n = np.arange(size - 1)
        matrix[n + 1, n] = 1j
        matrix[n, n + 1] = -1j
        if self.boundary is Boundary.PERIODIC:
            matrix[0, size - 1] = 1j
            matrix[size - 1, 0] = -1j
        return matrix

    def apply(self, vectors: np.ndarray) -> np.ndarray:
        """A @ vectors without forming the matrix (rows are sites)."""
        vectors = np.asarray(vectors)
        result = np.zeros(vectors.shape, dtype=complex)
        result[1:] += 1j * vectors[:-1]
        result[:-1] -= 1j * vectors[1:]
        if self.boundary is Boundary.PERIODIC:
            result[0] += 1j * vectors[-1]
            result[-1] -= 1j * vectors[0]
        return result


@dataclass(frozen=True)
class SpectralData:
    """
    Ascending eigenvalues and orthonormal eigenvector columns of a window.
    eigenvectors is None on the eigenvalues-only fast path.
    """

    eigenvalues: np.ndarray
    eigenvectors: Optional[np.ndarray]
    window: Window
    sites: np.ndarray = field(default_factory=lambda: np.empty(0, dtype=int))

    def __post_init__(self) -> None:
        object.__setattr__(self, "eigenvalues", _frozen(self.eigenvalues))
        if self.eigenvectors is not None:
            object.__setattr__(self, "eigenvectors", _frozen(self.eigenvectors))
        sites = np.asarray(self.sites)
        if sites.size == 0:
            sites = np.arange(self.window[0], self.window[1] + 1)
        object.__setattr__(self, "sites", _frozen(sites))

    @property
    def size(self) -> int:
        return int(self.eigenvalues.shape[0])

    @property
    def center_site(self) -> float:
        return 0.5 * (self.window[0] + self.window[1])
