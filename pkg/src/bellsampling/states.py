"""Dense statevectors, exact ground states, and measurement moments.

Basis-state indices use bit k for qubit k.  A Pauli string acts on a basis
state as ``P|x> = i^{#Y} (-1)^{popcount(z & x)} |x XOR xmask>``, which keeps
every operation here a vectorized gather plus a phase, with no 2^n x 2^n
matrices outside of :func:`hamiltonian_matrix`.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .paulis import PauliHamiltonian, PauliString, qubit_wise_commutes

__all__ = [
    "StateVector",
    "PauliMoments",
    "basis_state",
    "random_state",
    "apply_pauli",
    "expectation",
    "pauli_moments",
    "pauli_images",
    "pair_product_expectations",
    "joint_probs_doubled",
    "joint_probs_single",
    "hamiltonian_matrix",
    "ground_state",
]

MAX_DENSE_QUBITS = 14
_I_POWERS = np.array([1.0, 1.0j, -1.0, -1.0j])


@dataclass(frozen=True)
class StateVector:
    """Normalized complex amplitude vector over 2^n basis states."""

    n: int
    amplitudes: np.ndarray

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=np.complex128)
        if amps.shape != (1 << self.n,):
            raise ValueError(
                f"expected {1 << self.n} amplitudes for n={self.n}, got {amps.shape}"
            )
        norm = np.linalg.norm(amps)
        if abs(norm - 1.0) > 1e-10:
            raise ValueError(f"state norm {norm} deviates from 1")
        amps = amps.copy()
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)


def basis_state(n: int, index: int) -> StateVector:
    amps = np.zeros(1 << n, dtype=np.complex128)
    amps[index] = 1.0
    return StateVector(n, amps)


def random_state(n: int, rng: np.random.Generator) -> StateVector:
    amps = rng.standard_normal(1 << n) + 1j * rng.standard_normal(1 << n)
    return StateVector(n, amps / np.linalg.norm(amps))


def _pauli_action(p: PauliString):
    """Index permutation and phase vector of a Pauli string."""
    dim = 1 << p.n
    idx = np.arange(dim, dtype=np.int64)
    parity = np.bitwise_count(np.bitwise_and(idx, p.z)) & 1
    phase = _I_POWERS[p.y_count % 4] * np.where(parity, -1.0, 1.0)
    return idx ^ p.x, phase


def apply_pauli(p: PauliString, amplitudes: np.ndarray) -> np.ndarray:
    """Return ``P @ amplitudes`` without building the matrix."""
    target, phase = _pauli_action(p)
    out = np.empty_like(amplitudes, dtype=np.complex128)
    out[target] = phase * amplitudes
    return out


def expectation(state: StateVector, p: PauliString) -> float:
    """Real expectation value <psi|P|psi> in [-1, 1]."""
    if p.n != state.n:
        raise ValueError(f"dimension mismatch: state n={state.n}, string n={p.n}")
    val = np.vdot(state.amplitudes, apply_pauli(p, state.amplitudes))
    assert abs(val.imag) < 1e-10, "Pauli expectation must be real"
    return float(np.clip(val.real, -1.0, 1.0))


@dataclass(frozen=True)
class PauliMoments:
    """Per-term mean mu, single-copy +1 probability p, doubled-copy q."""

    mu: np.ndarray
    p: np.ndarray
    q: np.ndarray


def pauli_moments(state: StateVector, strings) -> PauliMoments:
    mu = np.array([expectation(state, s) for s in strings])
    return PauliMoments(mu=mu, p=(1.0 + mu) / 2.0, q=(1.0 + mu**2) / 2.0)


def pauli_images(state: StateVector, strings) -> np.ndarray:
    """Rows ``P_i |psi>`` for a family of strings (M x 2^n)."""
    out = np.empty((len(strings), 1 << state.n), dtype=np.complex128)
    for i, s in enumerate(strings):
        if s.n != state.n:
            raise ValueError("dimension mismatch in pauli_images")
        out[i] = apply_pauli(s, state.amplitudes)
    return out


def pair_product_expectations(state: StateVector, strings) -> np.ndarray:
    """Gram matrix G[i, j] = <psi| P_i P_j |psi> for all string pairs.

    Uses G = (P_i psi)^dagger (P_j psi), a single dense product.  Entries are
    real for commuting pairs and purely imaginary for anticommuting ones.
    """
    images = pauli_images(state, strings)
    return images.conj() @ images.T


def joint_probs_doubled(
    state: StateVector, p_i: PauliString, p_j: PauliString
) -> np.ndarray:
    """Joint outcome probabilities of P_i x P_i and P_j x P_j on two copies.

    Returns the four probabilities ordered ``(+1,+1), (+1,-1), (-1,+1),
    (-1,-1)``.  On |psi>|psi> the joint projector expectation reduces to
    single-copy quantities: mu_i^2, mu_j^2, and <psi|P_i P_j|psi>^2 (a real
    number, negative for anticommuting pairs).
    """
    mu_i = expectation(state, p_i)
    mu_j = expectation(state, p_j)
    g = np.vdot(apply_pauli(p_i, state.amplitudes), apply_pauli(p_j, state.amplitudes))
    rho = (g * g).real
    return _four_probs(mu_i * mu_i, mu_j * mu_j, rho)


def joint_probs_single(
    state: StateVector, p_i: PauliString, p_j: PauliString
) -> np.ndarray:
    """Joint single-copy outcome probabilities for a QWC pair.

    Returns ``(+1,+1), (+1,-1), (-1,+1), (-1,-1)`` probabilities of the
    projective outcomes of P_i and P_j measured in their shared basis.
    """
    if not qubit_wise_commutes(p_i, p_j):
        raise ValueError("joint_probs_single requires a qubit-wise-commuting pair")
    mu_i = expectation(state, p_i)
    mu_j = expectation(state, p_j)
    g = np.vdot(apply_pauli(p_i, state.amplitudes), apply_pauli(p_j, state.amplitudes))
    assert abs(g.imag) < 1e-10, "commuting pair must have real product expectation"
    return _four_probs(mu_i, mu_j, g.real)


def _four_probs(mean_i: float, mean_j: float, cross: float) -> np.ndarray:
    probs = np.array(
        [
            (1.0 + mean_i + mean_j + cross),
            (1.0 + mean_i - mean_j - cross),
            (1.0 - mean_i + mean_j - cross),
            (1.0 - mean_i - mean_j + cross),
        ]
    ) / 4.0
    assert probs.min() > -1e-12, f"negative joint probability {probs.min()}"
    probs = np.clip(probs, 0.0, 1.0)
    assert abs(probs.sum() - 1.0) < 1e-12
    return probs


def hamiltonian_matrix(h: PauliHamiltonian) -> np.ndarray:
    """Dense 2^n x 2^n matrix of the Hamiltonian, constant included."""
    if h.n > MAX_DENSE_QUBITS:
        raise ValueError(
            f"dense matrix for n={h.n} exceeds the {MAX_DENSE_QUBITS}-qubit limit"
        )
    dim = 1 << h.n
    cols = np.arange(dim, dtype=np.int64)
    mat = np.zeros((dim, dim), dtype=np.complex128)
    for c, p in h.terms:
        target, phase = _pauli_action(p)
        mat[target, cols] += c * phase
    mat[cols, cols] += h.constant
    return mat


def ground_state(h: PauliHamiltonian) -> tuple[float, StateVector]:
    """Minimal eigenvalue (in Hartree, constant included) and eigenvector."""
    mat = hamiltonian_matrix(h)
    assert np.allclose(mat, mat.conj().T, atol=1e-12), "Hamiltonian not Hermitian"
    evals, evecs = np.linalg.eigh(mat)
    vec = evecs[:, 0]
    return float(evals[0]), StateVector(h.n, vec / np.linalg.norm(vec))
