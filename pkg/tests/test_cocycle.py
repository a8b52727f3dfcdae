"""
Tests for the transfer-matrix cocycle and the half-line m-function.
"""
import numpy as np
import pytest

from src.exceptions import ConfigurationError, ConvergenceError
from src.models.operators import FrequencyVector
from src.services.cocycle import (
    cocycle_estimates,
    cocycle_product,
    cocycle_trace,
    ids_from_rotation,
    kotani_density,
    kotani_estimate,
    lyapunov,
    m_function,
    rotation_number,
    transfer,
)
from src.services.model import amo_potential, orbit_points, zero_potential
from src.services.spectral import ids

GOLDEN = FrequencyVector(((5 ** 0.5 - 1) / 2,))
FREE = zero_potential()


def free_m(z: complex) -> complex:
    """Root of m^2 + z m + 1 = 0 inside the unit disk."""
    roots = np.roots([1.0, z, 1.0])
    return complex(roots[np.argmin(np.abs(roots))])


def test_transfer_is_unimodular():
    """
    det S = 1 for the almost Mathieu cocycle
    """
    step = transfer(amo_potential(0.8), GOLDEN, 0.37, 0.21)
    assert step.determinant == pytest.approx(1.0)
    assert step.entries[1, 0] == 1.0


def test_cocycle_product_matches_explicit_product():
    """
    exp(s) M reproduces the plain product of transfer matrices
    """
    p = amo_potential(0.5)
    M, log_scale = cocycle_product(p, GOLDEN, 0.3, 0.1, 40)
    explicit = np.eye(2)
    for x in orbit_points(GOLDEN, 0.1, np.arange(40))[:, 0]:
        explicit = transfer(p, GOLDEN, 0.3, x).entries @ explicit
    assert np.allclose(np.exp(log_scale) * M, explicit, rtol=1e-9)
    assert np.linalg.norm(M, 2) == pytest.approx(1.0)


def test_lyapunov_free_outside_spectrum():
    """
    gamma(3) = log((3 + sqrt 5) / 2) for the free operator
    """
    gamma = lyapunov(FREE, GOLDEN, 3.0, 0.0, 2000)
    assert gamma == pytest.approx(np.log((3.0 + 5 ** 0.5) / 2.0), abs=5e-3)


def test_lyapunov_free_inside_spectrum():
    """
    gamma vanishes on the free spectrum
    """
    gamma = lyapunov(FREE, GOLDEN, np.array([-1.0, 0.0, 1.0]), 0.0, 4000)
    assert gamma.shape == (3,)
    assert np.all(gamma < 5e-3)


def test_lyapunov_herman_bound():
    """
    Supercritical almost Mathieu: gamma(E) >= log lambda
    """
    gamma = lyapunov(amo_potential(2.0), GOLDEN, np.array([-1.0, 0.0, 0.5]), 0.3, 20000)
    assert np.all(gamma >= np.log(2.0) - 1e-2)


def test_rotation_number_free():
    """
    rho(E) = arccos(E / 2) / 2 pi for the free operator
    """
    energies = np.array([-1.5, -0.5, 0.5, 1.5])
    rho = rotation_number(FREE, GOLDEN, energies, 0.0, 20000)
    assert np.allclose(rho, np.arccos(energies / 2.0) / (2.0 * np.pi), atol=1e-3)


def test_rotation_number_outside_spectrum():
    """
    rho is 0 above the spectrum and 1/2 below it
    """
    assert rotation_number(FREE, GOLDEN, 3.0, 0.0, 2000) == pytest.approx(0.0, abs=1e-3)
    assert rotation_number(FREE, GOLDEN, -3.0, 0.0, 2000) == pytest.approx(0.5, abs=1e-3)


def test_cocycle_trace_winding():
    """
    Accumulated winding over 2N equals the rotation number
    """
    trace = cocycle_trace(FREE, GOLDEN, 0.5, 0.0, 5000)
    rho = rotation_number(FREE, GOLDEN, 0.5, 0.0, 5000)
    assert trace.winding / (2.0 * trace.length) == pytest.approx(rho, abs=1e-9)
    assert trace.log_norm_sum / trace.length < 5e-3


def test_ids_from_rotation_free():
    """
    1 - 2 rho(E) is the free IDS arccos(-E / 2) / pi
    """
    grid = np.linspace(-1.8, 1.8, 7)
    table = ids_from_rotation(FREE, GOLDEN, grid, 0.0, 20000)
    assert np.allclose(table.n_values, np.arccos(-grid / 2.0) / np.pi, atol=2e-3)
    assert table.phase_count == 1


def test_cocycle_estimates_block_errors():
    """
    Block standard errors are finite and non-negative
    """
    result = cocycle_estimates(amo_potential(0.5), GOLDEN, np.array([0.0, 1.0]), 0.0, 5000)
    assert set(result) == {"E", "lyapunov", "lyapunov_stderr", "rotation", "rotation_stderr"}
    assert np.all(result["lyapunov_stderr"] >= 0.0)
    assert np.all(np.isfinite(result["rotation_stderr"]))


def test_cocycle_length_minimum():
    """
    Orbits shorter than 1000 steps are rejected
    """
    with pytest.raises(ConfigurationError):
        lyapunov(FREE, GOLDEN, 0.0, 0.0, 999)


def test_m_function_free_at_i():
    """
    m(i) = i (sqrt 5 - 1) / 2 for the free half-line
    """
    m = m_function(FREE, GOLDEN, 1j, 0.0)
    assert m == pytest.approx(1j * (5 ** 0.5 - 1) / 2.0, abs=1e-8)


def test_m_function_free_near_real_axis():
    """
    Closed-form free m-function at E + 1e-3 i
    """
    z = complex(0.7, 1e-3)
    m = m_function(FREE, GOLDEN, z, 0.0, depth=40000, tol=1e-6)
    assert m == pytest.approx(free_m(z), abs=1e-6)
    assert m.imag > 0


def test_m_function_over_phases():
    """
    An array of phases gives one value per phase
    """
    phases = np.linspace(0.0, 0.9, 4).reshape(-1, 1)
    m = m_function(amo_potential(0.5), GOLDEN, 0.2 + 0.5j, phases)
    assert m.shape == (4,)
    assert np.all(m.imag > 0)


def test_m_function_rejects_lower_half_plane():
    """
    Im z must be positive
    """
    with pytest.raises(ConfigurationError):
        m_function(FREE, GOLDEN, 0.5 - 0.1j, 0.0)


def test_m_function_minimum_depth():
    """
    Depth below 1000 is rejected
    """
    with pytest.raises(ConfigurationError):
        m_function(FREE, GOLDEN, 1j, 0.0, depth=500)


def test_m_function_not_converged():
    """
    Too shallow a recursion close to the spectrum
    """
    with pytest.raises(ConvergenceError):
        m_function(FREE, GOLDEN, complex(0.3, 1e-5), 0.0, depth=1000)


@pytest.mark.parametrize("energy", [0.0, 1.0])
def test_kotani_density_free(energy):
    """
    (1/2 pi) <1/Im m> approaches 1 / (pi sqrt(4 - E^2))
    """
    value = kotani_density(FREE, GOLDEN, energy, epsilon=1e-3, phase_samples=100)
    assert value == pytest.approx(1.0 / (np.pi * np.sqrt(4.0 - energy ** 2)), rel=1e-2)


@pytest.mark.parametrize("energy", [-0.3, 0.3])
def test_kotani_density_matches_counting_histogram(energy):
    """
    Subcritical almost Mathieu: the Kotani density agrees with dN/dE from counting to 5%
    """
    p = amo_potential(0.5)
    table = ids(p, GOLDEN, 4096, 64, np.linspace(-3.5, 3.5, 2801))
    step = 5e-3
    histogram = (np.interp(energy + step, table.grid, table.n_values)
                 - np.interp(energy - step, table.grid, table.n_values)) / (2.0 * step)
    value = kotani_density(p, GOLDEN, energy, epsilon=1e-4, phase_samples=200)
    assert value == pytest.approx(histogram, rel=0.05)


def test_kotani_estimate_free_has_no_spread():
    """
    Every phase gives the same free integrand
    """
    value, stderr = kotani_estimate(FREE, GOLDEN, 0.5, epsilon=1e-3, phase_samples=100)
    assert value > 0
    assert stderr == pytest.approx(0.0, abs=1e-9)


def test_kotani_parameter_ranges():
    """
    epsilon outside [1e-6, 1e-2] and fewer than 100 phases are rejected
    """
    with pytest.raises(ConfigurationError):
        kotani_density(FREE, GOLDEN, 0.0, epsilon=0.1)
    with pytest.raises(ConfigurationError):
        kotani_density(FREE, GOLDEN, 0.0, epsilon=1e-3, phase_samples=50)


def test_rotation_ids_matches_counting_ids():
    """
    1 - 2 rho(E) and the counting IDS agree for the subcritical almost Mathieu operator
    """
    p = amo_potential(0.5)
    grid = np.linspace(-3.2, 3.2, 200)
    from_rotation = ids_from_rotation(p, GOLDEN, grid, 0.0, 20000)
    counted = ids(p, GOLDEN, 1024, 8, grid)
    assert np.max(np.abs(from_rotation.n_values - counted.n_values)) < 1e-2
