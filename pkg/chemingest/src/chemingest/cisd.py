"""CISD ground states in the qubit occupation basis, for sign oracles.

The Jordan-Wigner image of a determinant is a computational basis state,
so configuration interaction restricted to single and double excitations
is a subspace diagonalization of the qubit Hamiltonian over bitstrings
within Hamming distance 4 of the Hartree-Fock string (same electron count
and spin projection).
"""

from __future__ import annotations

import numpy as np

__all__ = ["cisd_state", "cisd_basis"]

_ALPHA_MASK_CACHE: dict[int, int] = {}


def _alpha_mask(n_qubits: int) -> int:
    if n_qubits not in _ALPHA_MASK_CACHE:
        mask = 0
        for k in range(0, n_qubits, 2):
            mask |= 1 << k
        _ALPHA_MASK_CACHE[n_qubits] = mask
    return _ALPHA_MASK_CACHE[n_qubits]


def cisd_basis(n_qubits: int, n_electrons: int, max_rank: int = 2) -> list[int]:
    """Determinant bitstrings within `max_rank` excitations of Hartree-Fock.

    The reference occupies the lowest `n_electrons` interleaved spin
    orbitals; spin projection is conserved.
    """
    if n_electrons % 2:
        raise ValueError("closed-shell reference required")
    hf = (1 << n_electrons) - 1
    alpha = _alpha_mask(n_qubits)
    n_alpha = (hf & alpha).bit_count()
    basis = []
    for x in range(1 << n_qubits):
        if x.bit_count() != n_electrons:
            continue
        if (x & alpha).bit_count() != n_alpha:
            continue
        if (x ^ hf).bit_count() > 2 * max_rank:
            continue
        basis.append(x)
    return basis


def cisd_state(
    n_qubits: int, terms: dict, constant: float, n_electrons: int
) -> tuple[float, np.ndarray]:
    """CISD energy and full 2^n amplitude vector of the CISD ground state."""
    basis = cisd_basis(n_qubits, n_electrons)
    index = {x: i for i, x in enumerate(basis)}
    dim = len(basis)
    hmat = np.zeros((dim, dim), dtype=np.complex128)
    for (xm, zm), coeff in terms.items():
        phase0 = (1j) ** ((xm & zm).bit_count() % 4)
        for col, y in enumerate(basis):
            x = y ^ xm
            row = index.get(x)
            if row is None:
                continue
            sign = -1.0 if (zm & y).bit_count() & 1 else 1.0
            hmat[row, col] += coeff * phase0 * sign
    hmat[np.diag_indices(dim)] += constant
    assert np.allclose(hmat, hmat.conj().T, atol=1e-10)
    evals, evecs = np.linalg.eigh(hmat)
    amps = np.zeros(1 << n_qubits, dtype=np.complex128)
    amps[np.array(basis)] = evecs[:, 0]
    return float(evals[0]), amps
