"""
Tests for eigensolves, the IDS and the group-velocity bound.
"""
import numpy as np
import pytest

from src.exceptions import ConfigurationError, DegenerateSpectrumError, HermiticityError
from src.models.operators import FrequencyVector
from src.models.results import Gap, GapReport, IdsTable
from src.services.model import amo_potential, build_dual, build_effective, zero_potential
from src.services.spectral import (
    density_of_states,
    detect_gaps,
    eigensolve,
    gap_labels,
    group_velocity_bound,
    ids,
    inverse_ids,
    label_positions,
)

GOLDEN = FrequencyVector(((5 ** 0.5 - 1) / 2,))
FREE = zero_potential()


def one_gap_table() -> IdsTable:
    """N has slope 1/4 below E = 0, the plateau 1/2 on [0, 1] and slope 1/2 above."""
    grid = np.linspace(-2.0, 2.0, 4001)
    n_values = np.where(
        grid < 0.0, (grid + 2.0) / 4.0, np.where(grid <= 1.0, 0.5, 0.5 + (grid - 1.0) / 2.0)
    )
    return IdsTable(grid, n_values, phase_count=1, window_size=10 ** 6)


def test_eigensolve_free_window():
    """
    Dirichlet Laplacian eigenvalues are 2 cos(pi j / (n + 1))
    """
    s = eigensolve(build_effective(FREE, GOLDEN, 0.0, (0, 9)))
    expected = np.sort(2.0 * np.cos(np.pi * np.arange(1, 11) / 11.0))
    assert np.allclose(s.eigenvalues, expected)
    assert np.allclose(s.eigenvectors.T @ s.eigenvectors, np.eye(10))


def test_eigensolve_values_only():
    """
    The fast path returns no eigenvectors
    """
    op = build_effective(amo_potential(0.5), GOLDEN, 0.0, (0, 99))
    s = eigensolve(op, eigenvectors=False)
    assert s.eigenvectors is None
    assert s.size == 100


def test_eigensolve_dense_two_dimensional_dual():
    """
    Two-dimensional dual windows go through the dense solver
    """
    alpha = FrequencyVector((0.3819660112501051, 0.7548776662466927))
    p = zero_potential(2)
    s = eigensolve(build_dual(p, alpha, 0.1, (0, 3)))
    assert s.size == 16
    assert np.all(np.diff(s.eigenvalues) >= 0.0)


def test_eigensolve_rejects_non_hermitian():
    """
    A non-Hermitian matrix is refused
    """
    with pytest.raises(HermiticityError):
        eigensolve(np.array([[0.0, 1.0], [0.0, 0.0]]))


def test_ids_free_counting():
    """
    Free IDS is arccos(-E / 2) / pi up to one level per window
    """
    grid = np.linspace(-2.5, 2.5, 201)
    table = ids(FREE, GOLDEN, 512, 2, grid)
    expected = np.arccos(np.clip(-grid / 2.0, -1.0, 1.0)) / np.pi
    assert np.allclose(table.n_values, expected, atol=3.0 / 512)
    assert table.n_values[0] == 0.0
    assert table.n_values[-1] == 1.0


def test_ids_parallel_matches_serial():
    """
    Worker processes give the same table as the inline path
    """
    grid = np.linspace(-3.5, 3.5, 141)
    serial = ids(amo_potential(1.0), GOLDEN, 64, 6, grid, workers=1)
    parallel = ids(amo_potential(1.0), GOLDEN, 64, 6, grid, workers=2)
    assert np.array_equal(serial.n_values, parallel.n_values)


def test_ids_rejects_unsorted_grid():
    """
    The energy grid must ascend
    """
    with pytest.raises(ConfigurationError):
        ids(FREE, GOLDEN, 32, 1, np.array([0.0, -1.0, 1.0]))


def test_inverse_ids_quantiles():
    """
    E(N) inverts the piecewise-linear table and is left-continuous at the plateau
    """
    quantile = inverse_ids(one_gap_table())
    assert quantile(0.25) == pytest.approx(-1.0, abs=1e-6)
    assert quantile(0.5) == pytest.approx(0.0, abs=2e-3)
    assert quantile(0.75) == pytest.approx(1.5, abs=1e-6)
    assert quantile(0.0) == pytest.approx(-2.0)
    assert quantile(1.0) == pytest.approx(2.0)


def test_group_velocity_bound_free():
    """
    (1/pi) sup dE/dN = 2 for E(N) = -2 cos(pi N)
    """
    table = ids(FREE, GOLDEN, 8192, 1, np.linspace(-2.5, 2.5, 20001))
    assert group_velocity_bound(table, deltaN=1e-2) == pytest.approx(2.0, rel=0.05)


def test_ids_keeps_phase_levels():
    """
    Every phase contributes its sorted window spectrum
    """
    table = ids(amo_potential(0.5), GOLDEN, 64, 3, np.linspace(-3.5, 3.5, 71))
    assert table.levels.shape == (3, 64)
    assert np.all(np.diff(table.levels, axis=1) >= 0.0)
    counts = sum(np.searchsorted(row, table.grid, side="left") for row in table.levels)
    assert np.allclose(table.n_values, counts / (3 * 64))


def test_inverse_ids_free_levels():
    """
    Level-based E(N) reproduces -2 cos(pi N) between the window levels
    """
    table = ids(FREE, GOLDEN, 1024, 1, np.linspace(-2.5, 2.5, 101))
    n = np.linspace(0.01, 0.99, 99)
    assert np.allclose(inverse_ids(table)(n), -2.0 * np.cos(np.pi * n), atol=1e-4)


def test_group_velocity_bound_free_at_full_size():
    """
    The free bound is 2 +- 0.05 at deltaN = 1e-3 with the gap labels excluded
    """
    table = ids(FREE, GOLDEN, 4096, 32, np.linspace(-2.5, 2.5, 2001))
    bound = group_velocity_bound(table, deltaN=1e-3, alpha=GOLDEN)
    assert bound == pytest.approx(2.0, abs=0.05)


@pytest.mark.parametrize("window", [256, 2048])
def test_group_velocity_bound_free_short_windows(window):
    """
    Short windows widen the stencil instead of resolving counting noise
    """
    table = ids(FREE, GOLDEN, window, 2, np.linspace(-2.5, 2.5, 501))
    bound = group_velocity_bound(table, deltaN=1e-3, alpha=GOLDEN)
    assert bound == pytest.approx(2.0, abs=0.05)


def test_group_velocity_bound_window_doubling():
    """
    Subcritical almost Mathieu: doubling the window moves the bound by less than 3%
    """
    p, grid = amo_potential(0.5), np.linspace(-3.5, 3.5, 2801)
    bounds = [
        group_velocity_bound(ids(p, GOLDEN, window, 64, grid), deltaN=1e-3, alpha=GOLDEN)
        for window in (2048, 4096)
    ]
    assert bounds[0] == pytest.approx(bounds[1], rel=0.03)
    assert 0.5 < bounds[1] < 2.0


def test_label_positions_lowest_orders_first():
    """
    The first labels are {-alpha} and {alpha}, then the second order
    """
    positions = label_positions(GOLDEN, 4)
    alpha = GOLDEN.alpha[0]
    expected = [1.0 - alpha, alpha, (-2.0 * alpha) % 1.0, (2.0 * alpha) % 1.0]
    assert np.allclose(positions, expected)
    assert label_positions(GOLDEN, 0).size == 0


def test_group_velocity_bound_skips_labelled_jump():
    """
    A gap too narrow for the energy grid is dropped through its label {alpha}
    """
    alpha, width = GOLDEN.alpha[0], 0.01
    grid = np.linspace(-2.0, 2.0 + width, 4011)
    n_values = np.clip((grid + 2.0 - np.clip(grid - (4.0 * alpha - 2.0), 0.0, width)) / 4.0,
                       0.0, 1.0)
    n = np.arange(1, 2001) / 2001.0
    levels = 4.0 * n - 2.0 + width * (n > alpha)
    table = IdsTable(grid, n_values, phase_count=1, window_size=2000, levels=levels)
    without = group_velocity_bound(table, deltaN=1e-2)
    with_labels = group_velocity_bound(table, deltaN=1e-2, alpha=GOLDEN)
    assert without == pytest.approx(5.0 / np.pi, rel=1e-6)
    assert with_labels == pytest.approx(4.0 / np.pi, rel=1e-6)


def test_group_velocity_bound_filters_gap_jump():
    """
    The jump across the plateau is not part of the essential supremum
    """
    assert group_velocity_bound(one_gap_table()) == pytest.approx(4.0 / np.pi, rel=1e-6)


def test_group_velocity_bound_degenerate():
    """
    A single jump leaves no resolved slope
    """
    grid = np.linspace(-1.0, 1.0, 2001)
    table = IdsTable(grid, (grid > 0.0).astype(float), phase_count=1, window_size=100)
    with pytest.raises(DegenerateSpectrumError):
        group_velocity_bound(table)


def test_group_velocity_bound_delta_range():
    """
    deltaN outside [1e-4, 1e-2] is rejected
    """
    with pytest.raises(ConfigurationError):
        group_velocity_bound(one_gap_table(), deltaN=0.1)


def test_density_of_states_slopes():
    """
    Histogram density follows the table slopes
    """
    table = one_gap_table()
    dos = density_of_states(table)
    assert dos[500] == pytest.approx(0.25)
    assert dos[2500] == pytest.approx(0.0)
    assert dos[3500] == pytest.approx(0.5)


def test_detect_gaps_single_plateau():
    """
    The plateau at N = 1/2 is the only gap
    """
    report = detect_gaps(one_gap_table(), threshold=0.05)
    assert len(report) == 1
    gap = report.largest()
    assert gap.e_left == pytest.approx(0.0, abs=1e-9)
    assert gap.e_right == pytest.approx(1.0, abs=1e-9)
    assert gap.n_value == pytest.approx(0.5)


def test_detect_gaps_threshold_above_spacing():
    """
    Thresholds at or below the grid spacing are rejected
    """
    with pytest.raises(ConfigurationError):
        detect_gaps(one_gap_table(), threshold=1e-4)


def test_gap_labels_golden():
    """
    Gaps at {alpha} and {-alpha} carry the labels 1 and -1
    """
    alpha = GOLDEN.alpha[0]
    report = GapReport((Gap(0.0, 0.1, 1.0 - alpha), Gap(0.5, 0.6, alpha)))
    labelled = gap_labels(report, GOLDEN)
    assert [k for _, k, _ in labelled] == [(-1,), (1,)]
    assert all(residual < 1e-12 for _, _, residual in labelled)
