"""Jordan-Wigner mapping of the second-quantized Hamiltonian to Pauli terms.

Pauli products are tracked symbolically as (x-mask, z-mask) pairs with a
complex coefficient; per-qubit Y factors carry the usual i bookkeeping.
Spin orbitals are interleaved: spatial orbital p with spin sigma maps to
qubit 2p + sigma (sigma = 0 for alpha, 1 for beta), and qubit p occupied
means |1>.
"""

from __future__ import annotations

from .active import ActiveIntegrals

__all__ = ["PauliAccumulator", "ladder_operator", "qubit_hamiltonian"]

_COEFF_DROP = 1e-10


def _mul_pauli(x1: int, z1: int, x2: int, z2: int) -> tuple[int, int, complex]:
    """Product of two (x, z) Pauli words; returns masks and the i^k phase."""
    x3, z3 = x1 ^ x2, z1 ^ z2
    k = (
        (x1 & z1).bit_count()
        + (x2 & z2).bit_count()
        - (x3 & z3).bit_count()
        + 2 * (z1 & x2).bit_count()
    ) % 4
    return x3, z3, (1j) ** k


class PauliAccumulator:
    """Sparse sum of Pauli words keyed by (x-mask, z-mask)."""

    def __init__(self, terms: dict[tuple[int, int], complex] | None = None):
        self.terms = dict(terms or {})

    @classmethod
    def single(cls, x: int, z: int, coeff: complex) -> "PauliAccumulator":
        return cls({(x, z): coeff})

    def __matmul__(self, other: "PauliAccumulator") -> "PauliAccumulator":
        out: dict[tuple[int, int], complex] = {}
        for (x1, z1), c1 in self.terms.items():
            for (x2, z2), c2 in other.terms.items():
                x3, z3, phase = _mul_pauli(x1, z1, x2, z2)
                key = (x3, z3)
                out[key] = out.get(key, 0.0) + c1 * c2 * phase
        return PauliAccumulator(out)

    def add_scaled(self, other: "PauliAccumulator", scale: complex) -> None:
        for key, c in other.terms.items():
            self.terms[key] = self.terms.get(key, 0.0) + scale * c


def ladder_operator(index: int, dagger: bool) -> PauliAccumulator:
    """Jordan-Wigner annihilation (or creation) operator on qubit `index`."""
    zchain = (1 << index) - 1
    xmask = 1 << index
    sign = -0.5j if dagger else 0.5j
    return PauliAccumulator(
        {
            (xmask, zchain): 0.5,
            (xmask, zchain | xmask): sign,
        }
    )


def qubit_hamiltonian(integrals: ActiveIntegrals) -> tuple[int, dict, float]:
    """Map active-space integrals to qubit Pauli terms.

    Returns (n_qubits, {(x, z): real coefficient} without the identity,
    constant).  Uses the chemist-form two-body operator
    a+_{p sigma} a+_{r tau} a_{s tau} a_{q sigma} with coefficient
    (pq|rs)/2.
    """
    norb = integrals.n_orbitals
    n_qubits = 2 * norb
    create = [ladder_operator(i, True) for i in range(n_qubits)]
    destroy = [ladder_operator(i, False) for i in range(n_qubits)]
    total = PauliAccumulator()
    h1, g2 = integrals.h1, integrals.g2

    for p in range(norb):
        for q in range(norb):
            if abs(h1[p, q]) < 1e-14:
                continue
            for spin in (0, 1):
                total.add_scaled(
                    create[2 * p + spin] @ destroy[2 * q + spin], h1[p, q]
                )

    for p in range(norb):
        for q in range(norb):
            for r in range(norb):
                for s in range(norb):
                    coeff = 0.5 * g2[p, q, r, s]
                    if abs(coeff) < 1e-14:
                        continue
                    for sa in (0, 1):
                        i, j = 2 * p + sa, 2 * q + sa
                        for sb in (0, 1):
                            k, l = 2 * r + sb, 2 * s + sb
                            if i == k or j == l:
                                continue  # a+a+ or aa on one mode vanishes
                            op = (create[i] @ create[k]) @ (destroy[l] @ destroy[j])
                            total.add_scaled(op, coeff)

    constant = integrals.core_energy
    terms: dict[tuple[int, int], float] = {}
    for (x, z), c in total.terms.items():
        assert abs(c.imag) < 1e-9, f"non-real Pauli coefficient {c}"
        value = float(c.real)
        if (x, z) == (0, 0):
            constant += value
        elif abs(value) >= _COEFF_DROP:
            terms[(x, z)] = value
    return n_qubits, terms, float(constant)


def hamiltonian_text(n_qubits: int, terms: dict, constant: float) -> str:
    """Render in the line-oriented Hamiltonian format, canonical order."""
    letters = {(1, 0): "X", (1, 1): "Y", (0, 1): "Z"}
    lines = [f"qubits {n_qubits}"]
    for (x, z) in sorted(terms):
        factors = []
        for k in range(n_qubits):
            bits = ((x >> k) & 1, (z >> k) & 1)
            if bits != (0, 0):
                factors.append(f"{letters[bits]}{k}")
        lines.append(f"{terms[(x, z)]:.12e} " + " ".join(factors))
    lines.append(f"{constant:.12e}")
    return "\n".join(lines) + "\n"
