import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from eacomm import qcore
from eacomm.qcore import ValidationError

seeds = st.integers(min_value=0, max_value=2**32 - 1)


def test_paulis_square_to_identity():
    for label in "IXYZ":
        p = qcore.pauli(label)
        assert np.allclose(p @ p, np.eye(2))
    assert np.allclose(qcore.pauli("X") @ qcore.pauli("Y"), 1j * qcore.pauli("Z"))
    with pytest.raises(ValueError):
        qcore.pauli("W")


def test_bell_kets_form_orthonormal_basis():
    kets = np.array([qcore.bell_ket(a, b) for a in (0, 1) for b in (0, 1)])
    assert np.allclose(kets.conj() @ kets.T, np.eye(4))
    assert np.allclose(qcore.bell_ket(0, 0), qcore.PHI_PLUS)
    with pytest.raises(ValueError):
        qcore.bell_ket(2, 0)


def test_phi_plus_is_read_only():
    with pytest.raises(ValueError):
        qcore.PHI_PLUS[0] = 0


def test_density_matrix_checks():
    rho = qcore.projector(qcore.PHI_PLUS)
    qcore.check_density_matrix(rho)
    with pytest.raises(ValidationError):
        qcore.check_density_matrix(2 * rho)
    with pytest.raises(ValidationError):
        qcore.check_density_matrix(np.diag([1.5, -0.5, 0, 0]))
    with pytest.raises(ValidationError):
        qcore.check_density_matrix(np.ones((2, 3)))


def test_born_probability_and_invalid_effect():
    rho = qcore.projector(qcore.PHI_PLUS)
    assert qcore.born_probability(rho, rho) == pytest.approx(1.0)
    assert qcore.born_probability(np.eye(4) - rho, rho) == pytest.approx(0.0, abs=1e-12)
    assert qcore.born_probability(rho, np.eye(4) / 4) == pytest.approx(0.25)
    with pytest.raises(ValidationError):
        qcore.born_probability(2 * rho, rho)


def test_isotropic_mix_endpoints():
    rho1 = qcore.isotropic_mix(qcore.PHI_PLUS, 1.0)
    assert np.allclose(rho1, qcore.projector(qcore.PHI_PLUS))
    assert np.allclose(qcore.isotropic_mix(qcore.PHI_PLUS, 0.0), np.eye(4) / 4)
    with pytest.raises(ValueError):
        qcore.isotropic_mix(qcore.PHI_PLUS, 1.2)


@given(seeds)
def test_local_unitary_round_trip(seed):
    rng = np.random.default_rng(seed)
    u = qcore.random_unitary(rng, 2)
    state = np.kron(u, np.eye(2)) @ qcore.PHI_PLUS
    v = qcore.state_to_local_unitary(state)
    assert qcore.is_unitary(v)
    assert qcore.phase_fidelity(u, v) == pytest.approx(1.0, abs=1e-9)


@given(st.floats(min_value=0.05, max_value=1.4))
def test_non_maximal_state_rejected(theta):
    state = np.array([np.cos(theta / 2), 0, 0, np.sin(theta / 2)])
    with pytest.raises(ValidationError, match="Schmidt"):
        qcore.state_to_local_unitary(state)


@given(seeds)
def test_schmidt_coefficients_normalised(seed):
    rng = np.random.default_rng(seed)
    ket = qcore.random_unitary(rng, 4)[:, 0]
    s = qcore.schmidt_coefficients(ket)
    assert np.sum(s ** 2) == pytest.approx(1.0)
    assert s[0] >= s[1] >= 0


@given(seeds)
def test_nearest_unitary_fixed_point(seed):
    rng = np.random.default_rng(seed)
    u = qcore.random_unitary(rng, 3)
    assert np.allclose(qcore.nearest_unitary(u), u)
    m = u + 0.1 * rng.normal(size=(3, 3))
    assert qcore.is_unitary(qcore.nearest_unitary(m))


def test_max_eigenpair():
    h = np.diag([0.2, -3.0, 1.0])
    lam, vec = qcore.max_eigenpair(h)
    assert lam == pytest.approx(-3.0)
    assert abs(vec[1]) == pytest.approx(1.0)
    with pytest.raises(ValidationError):
        qcore.max_eigenpair(np.array([[0, 1], [0, 0]]))


def test_partial_trace_of_product():
    a = np.diag([0.3, 0.7])
    b = np.array([[0.5, 0.5j], [-0.5j, 0.5]])
    ab = np.kron(a, b)
    assert np.allclose(qcore.partial_trace(ab, 0), a)
    assert np.allclose(qcore.partial_trace(ab, 1), b)


def test_fix_phase_is_deterministic():
    u = qcore.random_unitary(np.random.default_rng(0), 2)
    assert np.allclose(qcore.fix_phase(u), qcore.fix_phase(np.exp(0.7j) * u))
