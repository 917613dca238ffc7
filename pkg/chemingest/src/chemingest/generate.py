"""End-to-end generation of Hamiltonian fixtures and CISD sign oracles."""

from __future__ import annotations

import numpy as np

from .active import active_space
from .cisd import cisd_state
from .jw import hamiltonian_text, qubit_hamiltonian
from .molecules import MoleculeSpec
from .scf import run_rhf

__all__ = ["generate_hamiltonian", "generate_sign_oracle"]


def _qubit_problem(spec: MoleculeSpec):
    scf = run_rhf(list(spec.geometry))
    if spec.active is None:
        integrals = active_space(scf)
    else:
        integrals = active_space(scf, spec.active[0], spec.active[1])
    n_qubits, terms, constant = qubit_hamiltonian(integrals)
    return integrals, n_qubits, terms, constant


def generate_hamiltonian(spec: MoleculeSpec) -> str:
    """Hamiltonian document in the line-oriented fixture format."""
    _, n_qubits, terms, constant = _qubit_problem(spec)
    return hamiltonian_text(n_qubits, terms, constant)


def generate_sign_oracle(spec: MoleculeSpec) -> str:
    """Per-term CISD expectation values in the sign-oracle format.

    Values are the CISD ground-state expectations of each non-identity
    Hamiltonian term; the consumer takes only their signs.
    """
    integrals, n_qubits, terms, constant = _qubit_problem(spec)
    _, amps = cisd_state(n_qubits, terms, constant, integrals.n_electrons)
    from bellsampling import PauliString, StateVector, expectation

    state = StateVector(n_qubits, amps / np.linalg.norm(amps))
    letters = {(1, 0): "X", (1, 1): "Y", (0, 1): "Z"}
    lines = [f"qubits {n_qubits}"]
    for (x, z) in sorted(terms):
        value = expectation(state, PauliString(n_qubits, x, z))
        factors = []
        for k in range(n_qubits):
            bits = ((x >> k) & 1, (z >> k) & 1)
            if bits != (0, 0):
                factors.append(f"{letters[bits]}{k}")
        lines.append(" ".join(factors) + f" {value:.12e}")
    return "\n".join(lines) + "\n"
