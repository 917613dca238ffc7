"""STO-3G basis data and contracted Gaussian shells.

Only the elements needed here (H, Li) are tabulated.  Exponents and
contraction coefficients are the standard STO-3G values; coefficients
refer to normalized primitives and the contracted functions are
renormalized after construction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

__all__ = ["BasisFunction", "build_basis", "ANGSTROM_TO_BOHR", "NUCLEAR_CHARGE"]

ANGSTROM_TO_BOHR = 1.8897259886

NUCLEAR_CHARGE = {"H": 1, "Li": 3}

# element -> list of shells: (kind, exponents, coefficients)
_STO3G = {
    "H": [
        ("s", (3.42525091, 0.62391373, 0.16885540), (0.15432897, 0.53532814, 0.44463454)),
    ],
    "Li": [
        ("s", (16.1195750, 2.9362007, 0.7946505), (0.15432897, 0.53532814, 0.44463454)),
        ("s", (0.6362897, 0.1478601, 0.0480887), (-0.09996723, 0.39951283, 0.70011547)),
        ("p", (0.6362897, 0.1478601, 0.0480887), (0.15591627, 0.60768372, 0.39195739)),
    ],
}


@dataclass(frozen=True)
class BasisFunction:
    """One contracted Cartesian Gaussian: sum_k c_k N_k x^i y^j z^k exp(-a_k r^2)."""

    center: tuple[float, float, float]
    powers: tuple[int, int, int]
    exponents: tuple[float, ...]
    coefficients: tuple[float, ...]  # include primitive norms and overall norm


def _primitive_norm(alpha: float, powers) -> float:
    i, j, k = powers
    dfact = lambda m: math.prod(range(m, 0, -2)) if m > 0 else 1
    num = (2.0 * alpha / math.pi) ** 0.75 * (4.0 * alpha) ** ((i + j + k) / 2.0)
    return num / math.sqrt(dfact(2 * i - 1) * dfact(2 * j - 1) * dfact(2 * k - 1))


def _self_overlap(bf: BasisFunction) -> float:
    # 1D contracted overlap at zero separation, product over dimensions.
    from .integrals import overlap

    return overlap(bf, bf)


def build_basis(geometry) -> list[BasisFunction]:
    """Contracted Cartesian basis for a geometry [(element, xyz bohr), ...].

    Shell order follows the tabulated element data; p shells expand to
    (x, y, z) components in that order.
    """
    basis: list[BasisFunction] = []
    for element, xyz in geometry:
        if element not in _STO3G:
            raise ValueError(f"no STO-3G data for element {element!r}")
        for kind, exps, coefs in _STO3G[element]:
            powers_list = [(0, 0, 0)] if kind == "s" else [(1, 0, 0), (0, 1, 0), (0, 0, 1)]
            for powers in powers_list:
                scaled = tuple(
                    c * _primitive_norm(a, powers) for a, c in zip(exps, coefs)
                )
                bf = BasisFunction(tuple(xyz), powers, tuple(exps), scaled)
                norm = math.sqrt(_self_overlap(bf))
                basis.append(
                    BasisFunction(
                        tuple(xyz), powers, tuple(exps),
                        tuple(c / norm for c in scaled),
                    )
                )
    return basis
