"""
Tests for the exact XY chain, its Jordan-Wigner frame and the light-cone fit.
"""
import numpy as np
import pytest

from src.exceptions import (
    ContainmentError,
    DimensionMismatchError,
    FitError,
    SiteIndexError,
    WindowError,
)
from src.models.operators import FrequencyVector
from src.services.model import amo_potential, chain_field, zero_potential
from src.services.spinchain import (
    build_chain,
    commutator_bound_check,
    covariance_check,
    effective_from_chain,
    jordan_wigner,
    lr_velocity_fit,
    many_body_heisenberg,
)

GOLDEN = FrequencyVector(((5 ** 0.5 - 1) / 2,))


@pytest.fixture(scope="module")
def amo_chain():
    nu = chain_field(amo_potential(0.8), GOLDEN, 0.27, 5)
    return build_chain(nu, 5), jordan_wigner(5)


def test_two_site_spectrum():
    """
    Zero field on two sites: eigenvalues -2, 0, 0, 2
    """
    chain = build_chain([0.0, 0.0], 2)
    values = np.linalg.eigvalsh(chain.matrix.toarray())
    assert np.allclose(values, [-2.0, 0.0, 0.0, 2.0])
    assert chain.dimension == 4


def test_build_chain_field_length():
    """
    One field value per site
    """
    with pytest.raises(DimensionMismatchError):
        build_chain([0.1, 0.2, 0.3], 2)


def test_build_chain_site_limit():
    """
    Chains longer than the many-body limit are refused
    """
    with pytest.raises(WindowError):
        build_chain(np.zeros(13), 13)


def test_jordan_wigner_anticommutation():
    """
    {c_j, c_k*} = delta_jk and {c_j, c_k} = 0
    """
    frame = jordan_wigner(3)
    identity = np.eye(8)
    for j, c_j in enumerate(frame.annihilators):
        for k, c_k in enumerate(frame.annihilators):
            a, b = c_j.toarray(), c_k.toarray()
            assert np.allclose(a @ b.conj().T + b.conj().T @ a, identity * (j == k))
            assert np.allclose(a @ b + b @ a, 0.0)


def test_effective_from_chain():
    """
    h = Laplacian - diag(nu) on sites 0..n-1
    """
    op = effective_from_chain([0.5, -0.25, 1.0])
    expected = np.array([[-0.5, 1.0, 0.0], [1.0, 0.25, 1.0], [0.0, 1.0, -1.0]])
    assert op.window == (0, 2)
    assert np.allclose(op.to_dense(), expected)


def test_heisenberg_conserves_particle_number(amo_chain):
    """
    sum_j c_j* c_j commutes with the XY Hamiltonian
    """
    chain, frame = amo_chain
    number = sum(c.conj().T @ c for c in frame.annihilators)
    evolved = many_body_heisenberg(chain, number, 1.7)
    assert np.allclose(evolved, number.toarray(), atol=1e-10)


@pytest.mark.parametrize("t", [0.0, 0.7, 2.5])
def test_covariance_identity(amo_chain, t):
    """
    c_j(t) = sum_k [exp(-2ith)]_jk c_k holds to machine precision
    """
    chain, frame = amo_chain
    assert covariance_check(chain, frame, t) < 1e-9


def test_covariance_frame_mismatch(amo_chain):
    """
    Chain and fermion frame must have the same length
    """
    chain, _ = amo_chain
    with pytest.raises(DimensionMismatchError):
        covariance_check(chain, jordan_wigner(3), 0.5)


def test_commutator_matches_propagator(amo_chain):
    """
    <u|[a_r*, c_l(t)]|u> reproduces the one-particle propagator and is bounded by the norm
    """
    chain, frame = amo_chain
    for l, r in [(0, 0), (0, 3), (1, 4)]:
        check = commutator_bound_check(chain, frame, l, r, 1.3)
        assert check.matrix_element == pytest.approx(check.propagator, abs=1e-10)
        assert check.rhs <= check.lhs + 1e-10


def test_commutator_free_two_sites():
    """
    Free two-site propagator G_01 = -i sin(2t)
    """
    chain = build_chain([0.0, 0.0], 2)
    check = commutator_bound_check(chain, jordan_wigner(2), 0, 1, 0.4)
    assert check.propagator == pytest.approx(-1j * np.sin(0.8), abs=1e-12)


def test_commutator_site_order(amo_chain):
    """
    Sites must satisfy 0 <= l <= r <= n - 1
    """
    chain, frame = amo_chain
    with pytest.raises(SiteIndexError):
        commutator_bound_check(chain, frame, 3, 1, 1.0)
    with pytest.raises(SiteIndexError):
        commutator_bound_check(chain, frame, 0, 5, 1.0)


def test_lr_velocity_fit_free():
    """
    The free front moves at 4 in chain time
    """
    fit = lr_velocity_fit(
        zero_potential(), GOLDEN, 0.0, (-512, 511), [16.0, 32.0, 48.0, 64.0]
    )
    assert fit.v_emp == pytest.approx(4.0, abs=0.3)
    assert fit.stderr >= 0.0
    assert len(fit.sensitivity) == 3
    assert np.all(np.diff(fit.radii) > 0)


def test_lr_velocity_fit_localized():
    """
    Supercritical almost Mathieu: the front stalls and the fitted velocity is near zero
    """
    fit = lr_velocity_fit(
        amo_potential(2.0), GOLDEN, 0.0, (-512, 511), np.linspace(4.0, 64.0, 16)
    )
    assert abs(fit.v_emp) < 0.1
    assert np.max(fit.radii) < 100


def test_lr_velocity_fit_containment():
    """
    Chain times beyond window / 16 are refused
    """
    with pytest.raises(ContainmentError):
        lr_velocity_fit(zero_potential(), GOLDEN, 0.0, (0, 127), [4.0, 9.0])


def test_lr_velocity_fit_unreachable_threshold():
    """
    A threshold above any amplitude leaves nothing to fit
    """
    with pytest.raises(FitError):
        lr_velocity_fit(zero_potential(), GOLDEN, 0.0, (0, 127), [2.0, 4.0], threshold=2.0)


def test_lr_velocity_fit_single_time():
    """
    One time is not enough for a slope
    """
    with pytest.raises(FitError):
        lr_velocity_fit(zero_potential(), GOLDEN, 0.0, (0, 127), [4.0])
