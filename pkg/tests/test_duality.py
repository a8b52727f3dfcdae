"""
Tests for the dual diagonal, d(theta) and the spectral duality check.
"""
import numpy as np
import pytest

from src.exceptions import DimensionMismatchError
from src.models.operators import FrequencyVector, SpectralData
from src.services.duality import (
    bulk_mask,
    d_theta,
    dual_Q_diagonal,
    dual_spectrum_check,
    orbit_sup,
)
from src.services.model import amo_potential, build_dual, zero_potential
from src.services.spectral import eigensolve

GOLDEN = FrequencyVector(((5 ** 0.5 - 1) / 2,))
AMO = amo_potential(0.5)


@pytest.fixture(scope="module")
def dual_window():
    return eigensolve(build_dual(AMO, GOLDEN, 0.15, (-100, 100)))


def test_dual_diagonal_matches_definition(dual_window):
    """
    entry_k = sum_m 2 sin(2 pi (m alpha + theta)) |u_k(m)|^2
    """
    diagonal = dual_Q_diagonal(dual_window, GOLDEN, 0.15)
    m = np.arange(-100, 101)
    weights = 2.0 * np.sin(2.0 * np.pi * (m * GOLDEN.alpha[0] + 0.15))
    expected = weights @ np.abs(dual_window.eigenvectors) ** 2
    assert np.allclose(diagonal.entries, expected)
    assert np.all(np.abs(diagonal.entries) <= 2.0 + 1e-12)
    assert diagonal.sup == pytest.approx(np.max(np.abs(expected)))


def test_dual_diagonal_rows(dual_window):
    """
    One CSV row per bulk eigenvector, centred inside the window
    """
    diagonal = dual_Q_diagonal(dual_window, GOLDEN, 0.15, bulk_only=True)
    rows = diagonal.rows()
    assert len(rows) == diagonal.entries.size
    assert all(-100 <= row[1] <= 100 for row in rows)
    assert all(row[0] == 0.15 for row in rows)


def test_bulk_mask_drops_edge_states(dual_window):
    """
    Localized dual eigenvectors at the window edges are filtered out
    """
    mask = bulk_mask(dual_window)
    assert mask.shape == (dual_window.size,)
    assert dual_window.size // 2 < mask.sum() < dual_window.size


def test_dual_diagonal_dimension_mismatch(dual_window):
    """
    A one-dimensional dual window with a two-component alpha
    """
    alpha = FrequencyVector((0.3, 0.7))
    with pytest.raises(DimensionMismatchError):
        dual_Q_diagonal(dual_window, alpha, 0.0)


def test_dual_spectrum_check_aubry():
    """
    Bulk spectra of H(x) and its dual coincide up to the truncation
    """
    assert dual_spectrum_check(AMO, GOLDEN, 0.0, 0.0, (-200, 200)) < 0.05


def test_dual_spectrum_check_one_dimensional_only():
    """
    The spectral comparison is restricted to d = 1
    """
    alpha = FrequencyVector((0.3819660112501051, 0.7548776662466927))
    with pytest.raises(DimensionMismatchError):
        dual_spectrum_check(zero_potential(2), alpha, 0.0, (0.0, 0.0), (0, 3))


def test_d_theta_single_candidate(dual_window):
    """
    d(theta) is one of the dual diagonal entries
    """
    result = d_theta(dual_window, GOLDEN, 0.15)
    entries = dual_Q_diagonal(dual_window, GOLDEN, 0.15).entries
    assert np.min(np.abs(entries - result.value)) < 1e-12
    if not result.ambiguous:
        assert result.candidates == ()


def test_d_theta_ambiguous_centre():
    """
    Eigenvectors tied at the same distance from the centre flag the result
    """
    vectors = np.array([[1.0, 0.0], [0.0, 0.0], [0.0, 1.0]])
    s = SpectralData(np.array([-1.0, 1.0]), vectors, (0, 2))
    result = d_theta(s, GOLDEN, 0.1)
    assert result.ambiguous
    assert len(result.candidates) == 2
    assert result.value == pytest.approx(2.0 * np.sin(0.2 * np.pi))


def test_d_theta_adjacent_centres():
    """
    A centre one site beyond the nearest one is still a candidate
    """
    vectors = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]])
    s = SpectralData(np.array([-1.0, 1.0]), vectors, (0, 2))
    result = d_theta(s, GOLDEN, 0.1)
    phases = 2.0 * np.pi * (np.array([1.0, 2.0]) * GOLDEN.alpha[0] + 0.1)
    assert result.ambiguous
    assert np.allclose(result.candidates, 2.0 * np.sin(phases))


def test_d_theta_subcritical_nonzero(dual_window):
    """
    Subcritical almost Mathieu: d(theta) stays away from zero
    """
    assert abs(d_theta(dual_window, GOLDEN, 0.15).value) > 1e-3


def test_orbit_sup_grows_with_orbit():
    """
    The sup over a longer theta-orbit is never smaller
    """
    window = (-40, 40)
    single = orbit_sup(AMO, GOLDEN, 0.15, window, 0)
    longer = orbit_sup(AMO, GOLDEN, 0.15, window, 2)
    s = eigensolve(build_dual(AMO, GOLDEN, 0.15, window))
    assert single == pytest.approx(dual_Q_diagonal(s, GOLDEN, 0.15, bulk_only=True).sup)
    assert longer >= single
