"""Restricted Hartree-Fock with DIIS and deterministic orbital canonicalization."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .basis import NUCLEAR_CHARGE, build_basis
from .integrals import (
    eri_tensor,
    kinetic_matrix,
    nuclear_matrix,
    nuclear_repulsion,
    overlap_matrix,
)

__all__ = ["ScfResult", "run_rhf"]


@dataclass(frozen=True)
class ScfResult:
    energy: float  # total RHF energy incl. nuclear repulsion
    e_nuc: float
    mo_coeff: np.ndarray  # (nao, nmo)
    mo_energy: np.ndarray
    hcore: np.ndarray
    eri: np.ndarray  # AO basis, chemist (ij|kl)
    n_electrons: int


def _fock(hcore, g, dm):
    j = np.einsum("pqrs,rs->pq", g, dm)
    k = np.einsum("prqs,rs->pq", g, dm)
    return hcore + j - 0.5 * k


def _canonicalize_degenerate(c: np.ndarray, e: np.ndarray, tol=1e-7) -> np.ndarray:
    """Rotate within degenerate eigenvalue clusters to a reproducible gauge.

    Inside each cluster the coefficient matrix is rotated to diagonalize a
    fixed AO-index weight, which aligns symmetry-equivalent orbitals (for a
    linear molecule: keeps px and py unmixed) no matter what the eigensolver
    returned.  Column signs are fixed by the largest-magnitude entry.
    """
    c = c.copy()
    nao = c.shape[0]
    weights = np.arange(1, nao + 1, dtype=float)
    start = 0
    while start < len(e):
        stop = start + 1
        while stop < len(e) and abs(e[stop] - e[start]) < tol:
            stop += 1
        if stop - start > 1:
            block = c[:, start:stop]
            small = block.T @ (weights[:, None] * block)
            _, rot = np.linalg.eigh(0.5 * (small + small.T))
            c[:, start:stop] = block @ rot
        start = stop
    for k in range(c.shape[1]):
        lead = np.argmax(np.abs(c[:, k]))
        if c[lead, k] < 0:
            c[:, k] = -c[:, k]
    return c


def run_rhf(
    geometry,
    *,
    max_iter: int = 200,
    conv: float = 1e-11,
    diis_depth: int = 8,
) -> ScfResult:
    """Converge RHF for a closed-shell geometry given in bohr."""
    charges = [NUCLEAR_CHARGE[el] for el, _ in geometry]
    n_electrons = sum(charges)
    if n_electrons % 2:
        raise ValueError("only closed-shell systems are supported")
    nocc = n_electrons // 2
    basis = build_basis(geometry)
    s = overlap_matrix(basis)
    hcore = kinetic_matrix(basis) + nuclear_matrix(basis, geometry, charges)
    g = eri_tensor(basis)
    e_nuc = nuclear_repulsion(geometry, charges)

    sval, svec = np.linalg.eigh(s)
    if sval.min() < 1e-10:
        raise ValueError("overlap matrix is numerically singular")
    x = svec @ np.diag(sval**-0.5) @ svec.T

    def solve(f):
        fp = x.T @ f @ x
        e, cp = np.linalg.eigh(fp)
        return e, x @ cp

    e_mo, c = solve(hcore)
    dm = 2.0 * c[:, :nocc] @ c[:, :nocc].T
    energy = 0.0
    errors: list[np.ndarray] = []
    focks: list[np.ndarray] = []
    for _ in range(max_iter):
        f = _fock(hcore, g, dm)
        err = f @ dm @ s - s @ dm @ f
        errors.append(err)
        focks.append(f)
        if len(errors) > diis_depth:
            errors.pop(0)
            focks.pop(0)
        if len(errors) > 1:
            k = len(errors)
            bmat = -np.ones((k + 1, k + 1))
            bmat[k, k] = 0.0
            for i in range(k):
                for j in range(k):
                    bmat[i, j] = np.sum(errors[i] * errors[j])
            rhs = np.zeros(k + 1)
            rhs[k] = -1.0
            try:
                coef = np.linalg.solve(bmat, rhs)[:k]
                f = sum(ci * fi for ci, fi in zip(coef, focks))
            except np.linalg.LinAlgError:
                pass
        e_mo, c = solve(f)
        dm_new = 2.0 * c[:, :nocc] @ c[:, :nocc].T
        e_new = float(0.5 * np.sum(dm_new * (hcore + _fock(hcore, g, dm_new)))) + e_nuc
        delta = abs(e_new - energy)
        drms = np.sqrt(np.mean((dm_new - dm) ** 2))
        dm, energy = dm_new, e_new
        if delta < conv and drms < np.sqrt(conv):
            break
    else:
        raise RuntimeError("SCF did not converge")
    c = _canonicalize_degenerate(c, e_mo)
    return ScfResult(
        energy=energy,
        e_nuc=e_nuc,
        mo_coeff=c,
        mo_energy=e_mo,
        hcore=hcore,
        eri=g,
        n_electrons=n_electrons,
    )
