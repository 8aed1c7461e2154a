"""Two-qubit linear algebra primitives.

Matrices and kets are plain ``numpy`` complex arrays. The sender's qubit is
always the first tensor factor, so a sender operation ``U`` acts on the
shared pair as ``kron(U, I)``.
"""

from __future__ import annotations

import numpy as np

ATOL = 1e-9

__all__ = [
    "ATOL",
    "ValidationError",
    "pauli",
    "PHI_PLUS",
    "bell_ket",
    "tensor",
    "projector",
    "is_hermitian",
    "is_unitary",
    "check_density_matrix",
    "born_probability",
    "max_eigenpair",
    "schmidt_coefficients",
    "state_to_local_unitary",
    "isotropic_mix",
    "nearest_unitary",
    "partial_trace",
    "ket_fidelity",
    "phase_fidelity",
    "fix_phase",
    "random_unitary",
]


class ValidationError(ValueError):
    """An operator or state failed a structural check (PSD, trace, ...)."""


_PAULI = {
    "I": np.array([[1, 0], [0, 1]], dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


def pauli(label: str) -> np.ndarray:
    """Return the Pauli matrix named ``label`` (one of I, X, Y, Z)."""
    try:
        return _PAULI[label.upper()].copy()
    except (KeyError, AttributeError):
        raise ValueError(f"unknown Pauli label {label!r}") from None


PHI_PLUS = np.array([1, 0, 0, 1], dtype=complex) / np.sqrt(2)
PHI_PLUS.setflags(write=False)


def bell_ket(b1: int, b2: int) -> np.ndarray:
    """``(I ⊗ X^b1 Z^b2)|φ+⟩``; the four choices form the Bell basis."""
    if b1 not in (0, 1) or b2 not in (0, 1):
        raise ValueError("Bell indices must be bits")
    local = np.linalg.matrix_power(_PAULI["X"], b1) @ np.linalg.matrix_power(_PAULI["Z"], b2)
    return tensor(_PAULI["I"], local) @ PHI_PLUS


def tensor(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Kronecker product, ``a`` on the first factor."""
    return np.kron(a, b)


def projector(ket: np.ndarray) -> np.ndarray:
    ket = np.asarray(ket, dtype=complex)
    return np.outer(ket, ket.conj())


def is_hermitian(m: np.ndarray, atol: float = ATOL) -> bool:
    return bool(np.allclose(m, m.conj().T, atol=atol, rtol=0))


def is_unitary(m: np.ndarray, atol: float = ATOL) -> bool:
    m = np.asarray(m)
    return bool(np.allclose(m.conj().T @ m, np.eye(m.shape[0]), atol=atol, rtol=0))


def check_density_matrix(rho: np.ndarray, atol: float = ATOL) -> np.ndarray:
    """Raise :class:`ValidationError` unless ``rho`` is a valid density matrix."""
    rho = np.asarray(rho, dtype=complex)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise ValidationError(f"density matrix must be square, got shape {rho.shape}")
    if not is_hermitian(rho, atol):
        raise ValidationError("density matrix is not Hermitian")
    tr = np.trace(rho).real
    if abs(tr - 1) > atol:
        raise ValidationError(f"density matrix has trace {tr}")
    lo = np.linalg.eigvalsh(rho).min()
    if lo < -atol:
        raise ValidationError(f"density matrix has negative eigenvalue {lo}")
    return rho


def _check_effect(effect: np.ndarray, atol: float) -> None:
    if not is_hermitian(effect, atol):
        raise ValidationError("effect is not Hermitian")
    ev = np.linalg.eigvalsh(effect)
    if ev.min() < -atol or ev.max() > 1 + atol:
        raise ValidationError(f"effect eigenvalues {ev} outside [0, 1]")


def born_probability(effect: np.ndarray, state: np.ndarray, atol: float = ATOL) -> float:
    """``Tr(effect @ state)`` after validating both operands.

    Tiny negative or super-unit round-off is clipped into ``[0, 1]``.
    """
    effect = np.asarray(effect, dtype=complex)
    _check_effect(effect, atol)
    check_density_matrix(state, atol)
    p = np.trace(effect @ state).real
    return float(min(max(p, 0.0), 1.0))


def max_eigenpair(h: np.ndarray, atol: float = ATOL) -> tuple[float, np.ndarray]:
    """Eigenpair of the eigenvalue with the largest magnitude.

    Within a degenerate eigenspace the returned vector is whatever ``eigh``
    produces; callers should not rely on a particular choice.
    """
    h = np.asarray(h, dtype=complex)
    if not is_hermitian(h, atol):
        raise ValidationError("max_eigenpair needs a Hermitian matrix")
    w, v = np.linalg.eigh(h)
    k = int(np.argmax(np.abs(w)))
    return float(w[k]), v[:, k]


def schmidt_coefficients(state: np.ndarray) -> np.ndarray:
    """Schmidt coefficients of a two-qubit ket, in decreasing order."""
    state = np.asarray(state, dtype=complex)
    return np.linalg.svd(state.reshape(2, 2), compute_uv=False)


def fix_phase(m: np.ndarray) -> np.ndarray:
    """Rotate the global phase so the largest-magnitude entry is real positive."""
    m = np.asarray(m, dtype=complex)
    flat = m.ravel()
    k = int(np.argmax(np.abs(flat).round(12)))
    if abs(flat[k]) == 0:
        return m
    return m * (abs(flat[k]) / flat[k])


def state_to_local_unitary(state: np.ndarray, atol: float = 1e-6) -> np.ndarray:
    """The sender unitary ``U`` with ``(U ⊗ I)|φ+⟩ ∝ state``.

    Only maximally entangled kets have such a ``U``; anything else raises
    :class:`ValidationError` with the Schmidt gap in the message.
    """
    state = np.asarray(state, dtype=complex)
    sc = schmidt_coefficients(state)
    gap = float(np.max(np.abs(sc - 1 / np.sqrt(2))))
    if gap > atol:
        raise ValidationError(
            f"state is not maximally entangled: Schmidt coefficients {sc}, gap {gap:.3g}"
        )
    u = np.sqrt(2) * state.reshape(2, 2)
    return fix_phase(nearest_unitary(u))


def isotropic_mix(state: np.ndarray, v: float) -> np.ndarray:
    """``v |ψ⟩⟨ψ| + (1 - v) I/d``."""
    if not 0 <= v <= 1:
        raise ValueError(f"visibility must lie in [0, 1], got {v}")
    state = np.asarray(state, dtype=complex)
    d = state.shape[0]
    return v * projector(state) + (1 - v) * np.eye(d) / d


def nearest_unitary(m: np.ndarray) -> np.ndarray:
    """Unitary polar factor of ``m`` (closest unitary in Frobenius norm)."""
    u, _, vh = np.linalg.svd(m)
    return u @ vh


def partial_trace(op: np.ndarray, keep: int, dims: tuple[int, int] = (2, 2)) -> np.ndarray:
    """Partial trace of a bipartite operator; ``keep`` is 0 (first) or 1 (second)."""
    da, db = dims
    t = np.asarray(op).reshape(da, db, da, db)
    if keep == 0:
        return np.einsum("ijkj->ik", t)
    if keep == 1:
        return np.einsum("jijk->ik", t)
    raise ValueError("keep must be 0 or 1")


def ket_fidelity(a: np.ndarray, b: np.ndarray) -> float:
    """``|⟨a|b⟩|`` for normalised kets; 1 iff equal up to a global phase."""
    return float(abs(np.vdot(a, b)))


def phase_fidelity(a: np.ndarray, b: np.ndarray) -> float:
    """``|Tr(a† b)| / d``; 1 iff two unitaries agree up to a global phase."""
    a = np.asarray(a)
    return float(abs(np.trace(a.conj().T @ b)) / a.shape[0])


def random_unitary(rng: np.random.Generator, dim: int) -> np.ndarray:
    """Haar-random unitary via QR of a complex Ginibre matrix."""
    z = (rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    d = np.diag(r)
    return q * (d / np.abs(d))
