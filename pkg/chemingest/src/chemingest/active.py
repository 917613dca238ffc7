"""Active-space reduction of molecular integrals with frozen-core folding."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .scf import ScfResult

__all__ = ["ActiveIntegrals", "mo_integrals", "active_space"]


@dataclass(frozen=True)
class ActiveIntegrals:
    """Spatial-orbital integrals restricted to an active window."""

    h1: np.ndarray  # effective one-body, (norb, norb)
    g2: np.ndarray  # chemist (pq|rs), (norb,)*4
    core_energy: float  # nuclear repulsion + frozen-core energy
    n_orbitals: int
    n_electrons: int


def mo_integrals(scf: ScfResult) -> tuple[np.ndarray, np.ndarray]:
    """Transform AO integrals into the MO basis."""
    c = scf.mo_coeff
    h1 = c.T @ scf.hcore @ c
    g = np.einsum("pi,pqrs->iqrs", c, scf.eri, optimize=True)
    g = np.einsum("qj,iqrs->ijrs", c, g, optimize=True)
    g = np.einsum("rk,ijrs->ijks", c, g, optimize=True)
    g2 = np.einsum("sl,ijks->ijkl", c, g, optimize=True)
    return h1, g2


def active_space(
    scf: ScfResult, n_orbitals: int | None = None, n_electrons: int | None = None
) -> ActiveIntegrals:
    """Freeze the lowest core orbitals and drop the highest virtuals.

    The active window takes ``n_orbitals`` spatial orbitals starting right
    above the frozen core, where the core holds
    ``(total electrons - n_electrons) / 2`` doubly occupied orbitals in
    energy order.  Omitting both arguments keeps the full space.
    """
    h1, g2 = mo_integrals(scf)
    nmo = h1.shape[0]
    if n_orbitals is None and n_electrons is None:
        n_orbitals, n_electrons = nmo, scf.n_electrons
    if n_orbitals is None or n_electrons is None:
        raise ValueError("specify both active orbitals and electrons, or neither")
    frozen = scf.n_electrons - n_electrons
    if frozen < 0 or frozen % 2:
        raise ValueError(
            f"cannot freeze {frozen} electrons; active electron count invalid"
        )
    ncore = frozen // 2
    if ncore + n_orbitals > nmo:
        raise ValueError("active window exceeds the orbital space")
    if n_electrons > 2 * n_orbitals:
        raise ValueError("more active electrons than active spin orbitals")
    core = list(range(ncore))
    act = list(range(ncore, ncore + n_orbitals))

    core_energy = scf.e_nuc
    for c in core:
        core_energy += 2.0 * h1[c, c]
        for d in core:
            core_energy += 2.0 * g2[c, c, d, d] - g2[c, d, d, c]

    h_eff = h1[np.ix_(act, act)].copy()
    for idx_u, u in enumerate(act):
        for idx_v, v in enumerate(act):
            for c in core:
                h_eff[idx_u, idx_v] += 2.0 * g2[u, v, c, c] - g2[u, c, c, v]

    g_act = g2[np.ix_(act, act, act, act)].copy()
    return ActiveIntegrals(
        h1=h_eff,
        g2=g_act,
        core_energy=float(core_energy),
        n_orbitals=n_orbitals,
        n_electrons=n_electrons,
    )
