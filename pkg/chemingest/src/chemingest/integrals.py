"""One- and two-electron integrals over contracted Cartesian Gaussians.

McMurchie-Davidson scheme: Cartesian overlaps are expanded in Hermite
Gaussians via the E coefficients, Coulomb integrals contract those against
Hermite Coulomb repulsion tensors R built from Boys functions.  Sufficient
for s and p shells (any angular momentum, in fact, just not tuned for it).
"""

from __future__ import annotations

import math
import numpy as np
from scipy import special

from .basis import BasisFunction

__all__ = [
    "boys",
    "overlap",
    "kinetic",
    "nuclear",
    "eri",
    "overlap_matrix",
    "kinetic_matrix",
    "nuclear_matrix",
    "eri_tensor",
    "nuclear_repulsion",
]


def boys(m: int, t: float) -> float:
    """Boys function F_m(t) via the confluent hypergeometric representation."""
    return special.hyp1f1(m + 0.5, m + 1.5, -t) / (2.0 * m + 1.0)


def _hermite_e(i: int, j: int, qx: float, a: float, b: float) -> np.ndarray:
    """Hermite expansion coefficients E_t^{ij} for one Cartesian dimension.

    ``qx`` is the center separation A - B.  Returns the vector over
    t = 0..i+j.
    """
    p = a + b
    mu = a * b / p
    table = {(0, 0, 0): math.exp(-mu * qx * qx)}

    def get(t, ii, jj):
        if t < 0 or t > ii + jj or ii < 0 or jj < 0:
            return 0.0
        key = (t, ii, jj)
        if key not in table:
            if ii > 0:
                table[key] = (
                    get(t - 1, ii - 1, jj) / (2.0 * p)
                    - (b / p) * qx * get(t, ii - 1, jj)
                    + (t + 1) * get(t + 1, ii - 1, jj)
                )
            else:
                table[key] = (
                    get(t - 1, ii, jj - 1) / (2.0 * p)
                    + (a / p) * qx * get(t, ii, jj - 1)
                    + (t + 1) * get(t + 1, ii, jj - 1)
                )
        return table[key]

    return np.array([get(t, i, j) for t in range(i + j + 1)])


def _prim_overlap(a, la, ax, b, lb, bx) -> float:
    """Primitive Cartesian overlap."""
    p = a + b
    val = (math.pi / p) ** 1.5
    for d in range(3):
        e = _hermite_e(la[d], lb[d], ax[d] - bx[d], a, b)
        val *= e[0]
    return val


def _prim_kinetic(a, la, ax, b, lb, bx) -> float:
    """Primitive kinetic energy via the standard overlap ladder."""

    def s1d(d, ia, ib):
        if ia < 0 or ib < 0:
            return 0.0
        return _hermite_e(ia, ib, ax[d] - bx[d], a, b)[0]

    def t1d(d, ia, ib):
        term = b * (2 * ib + 1) * s1d(d, ia, ib)
        term -= 2.0 * b * b * s1d(d, ia, ib + 2)
        term -= 0.5 * ib * (ib - 1) * s1d(d, ia, ib - 2)
        return term

    p = a + b
    pref = (math.pi / p) ** 1.5
    sx, sy, sz = (s1d(d, la[d], lb[d]) for d in range(3))
    tx, ty, tz = (t1d(d, la[d], lb[d]) for d in range(3))
    return pref * (tx * sy * sz + sx * ty * sz + sx * sy * tz)


def _hermite_coulomb(tmax, umax, vmax, p: float, pc) -> np.ndarray:
    """Hermite Coulomb tensor R_{tuv}(p, PC) for t<=tmax, u<=umax, v<=vmax."""
    dist2 = pc[0] ** 2 + pc[1] ** 2 + pc[2] ** 2
    nmax = tmax + umax + vmax
    fvals = [boys(n, p * dist2) for n in range(nmax + 1)]
    cache: dict[tuple[int, int, int, int], float] = {}

    def r(t, u, v, n):
        if t < 0 or u < 0 or v < 0:
            return 0.0
        if t == u == v == 0:
            return (-2.0 * p) ** n * fvals[n]
        key = (t, u, v, n)
        if key not in cache:
            if t > 0:
                cache[key] = (t - 1) * r(t - 2, u, v, n + 1) + pc[0] * r(
                    t - 1, u, v, n + 1
                )
            elif u > 0:
                cache[key] = (u - 1) * r(t, u - 2, v, n + 1) + pc[1] * r(
                    t, u - 1, v, n + 1
                )
            else:
                cache[key] = (v - 1) * r(t, u, v - 2, n + 1) + pc[2] * r(
                    t, u, v - 1, n + 1
                )
        return cache[key]

    out = np.empty((tmax + 1, umax + 1, vmax + 1))
    for t in range(tmax + 1):
        for u in range(umax + 1):
            for v in range(vmax + 1):
                out[t, u, v] = r(t, u, v, 0)
    return out


def _pair_e(a, la, ax, b, lb, bx):
    """Per-dimension Hermite coefficient vectors for a primitive pair."""
    return [
        _hermite_e(la[d], lb[d], ax[d] - bx[d], a, b) for d in range(3)
    ]


def _prim_nuclear(a, la, ax, b, lb, bx, centers_charges) -> float:
    p = a + b
    px = tuple((a * ax[d] + b * bx[d]) / p for d in range(3))
    evecs = _pair_e(a, la, ax, b, lb, bx)
    val = 0.0
    for charge, cx in centers_charges:
        pc = tuple(px[d] - cx[d] for d in range(3))
        rten = _hermite_coulomb(la[0] + lb[0], la[1] + lb[1], la[2] + lb[2], p, pc)
        acc = np.einsum("t,u,v,tuv->", evecs[0], evecs[1], evecs[2], rten)
        val -= charge * acc
    return val * 2.0 * math.pi / p


def _prim_eri(a, la, ax, b, lb, bx, c, lc, cx, d, ld, dx) -> float:
    p = a + b
    q = c + d
    alpha = p * q / (p + q)
    px = tuple((a * ax[i] + b * bx[i]) / p for i in range(3))
    qx = tuple((c * cx[i] + d * dx[i]) / q for i in range(3))
    pq = tuple(px[i] - qx[i] for i in range(3))
    e1 = _pair_e(a, la, ax, b, lb, bx)
    e2 = _pair_e(c, lc, cx, d, ld, dx)
    tmax = la[0] + lb[0] + lc[0] + ld[0]
    umax = la[1] + lb[1] + lc[1] + ld[1]
    vmax = la[2] + lb[2] + lc[2] + ld[2]
    rten = _hermite_coulomb(tmax, umax, vmax, alpha, pq)
    val = 0.0
    for t in range(len(e1[0])):
        for u in range(len(e1[1])):
            for v in range(len(e1[2])):
                w1 = e1[0][t] * e1[1][u] * e1[2][v]
                if w1 == 0.0:
                    continue
                for tt in range(len(e2[0])):
                    for uu in range(len(e2[1])):
                        for vv in range(len(e2[2])):
                            w2 = e2[0][tt] * e2[1][uu] * e2[2][vv]
                            if w2 == 0.0:
                                continue
                            sign = -1.0 if (tt + uu + vv) % 2 else 1.0
                            val += w1 * w2 * sign * rten[t + tt, u + uu, v + vv]
    return val * 2.0 * math.pi**2.5 / (p * q * math.sqrt(p + q))


def _contract2(prim_fn, f1: BasisFunction, f2: BasisFunction) -> float:
    val = 0.0
    for a, ca in zip(f1.exponents, f1.coefficients):
        for b, cb in zip(f2.exponents, f2.coefficients):
            val += ca * cb * prim_fn(a, f1.powers, f1.center, b, f2.powers, f2.center)
    return val


def overlap(f1: BasisFunction, f2: BasisFunction) -> float:
    return _contract2(_prim_overlap, f1, f2)


def kinetic(f1: BasisFunction, f2: BasisFunction) -> float:
    return _contract2(_prim_kinetic, f1, f2)


def nuclear(f1: BasisFunction, f2: BasisFunction, centers_charges) -> float:
    return _contract2(
        lambda a, la, ax, b, lb, bx: _prim_nuclear(a, la, ax, b, lb, bx, centers_charges),
        f1,
        f2,
    )


def eri(f1, f2, f3, f4) -> float:
    """Chemist-notation repulsion integral (f1 f2 | f3 f4)."""
    val = 0.0
    for a, ca in zip(f1.exponents, f1.coefficients):
        for b, cb in zip(f2.exponents, f2.coefficients):
            for c, cc in zip(f3.exponents, f3.coefficients):
                for d, cd in zip(f4.exponents, f4.coefficients):
                    val += ca * cb * cc * cd * _prim_eri(
                        a, f1.powers, f1.center,
                        b, f2.powers, f2.center,
                        c, f3.powers, f3.center,
                        d, f4.powers, f4.center,
                    )
    return val


def overlap_matrix(basis) -> np.ndarray:
    n = len(basis)
    s = np.empty((n, n))
    for i in range(n):
        for j in range(i + 1):
            s[i, j] = s[j, i] = overlap(basis[i], basis[j])
    return s


def kinetic_matrix(basis) -> np.ndarray:
    n = len(basis)
    t = np.empty((n, n))
    for i in range(n):
        for j in range(i + 1):
            t[i, j] = t[j, i] = kinetic(basis[i], basis[j])
    return t


def nuclear_matrix(basis, geometry, charges) -> np.ndarray:
    centers_charges = [(charges[k], geometry[k][1]) for k in range(len(geometry))]
    n = len(basis)
    v = np.empty((n, n))
    for i in range(n):
        for j in range(i + 1):
            v[i, j] = v[j, i] = nuclear(basis[i], basis[j], centers_charges)
    return v


def eri_tensor(basis) -> np.ndarray:
    """Full (ij|kl) tensor using 8-fold permutation symmetry."""
    n = len(basis)
    g = np.zeros((n, n, n, n))
    for i in range(n):
        for j in range(i + 1):
            ij = i * (i + 1) // 2 + j
            for k in range(n):
                for l in range(k + 1):
                    kl = k * (k + 1) // 2 + l
                    if ij < kl:
                        continue
                    val = eri(basis[i], basis[j], basis[k], basis[l])
                    for a, b in ((i, j), (j, i)):
                        for c, d in ((k, l), (l, k)):
                            g[a, b, c, d] = val
                            g[c, d, a, b] = val
    return g


def nuclear_repulsion(geometry, charges) -> float:
    e = 0.0
    for i in range(len(geometry)):
        for j in range(i):
            ri = np.asarray(geometry[i][1])
            rj = np.asarray(geometry[j][1])
            e += charges[i] * charges[j] / np.linalg.norm(ri - rj)
    return float(e)
