"""Built-in molecule specifications: hydrogen chains and LiH active spaces."""

from __future__ import annotations

from dataclasses import dataclass

from .basis import ANGSTROM_TO_BOHR

__all__ = ["MoleculeSpec", "named_molecule", "MOLECULES", "parse_geometry_file"]


@dataclass(frozen=True)
class MoleculeSpec:
    name: str
    geometry: tuple[tuple[str, tuple[float, float, float]], ...]  # bohr
    active: tuple[int, int] | None = None  # (spatial orbitals, electrons)
    charge: int = 0
    multiplicity: int = 1


def _hydrogen_chain(count: int, spacing_angstrom: float = 1.0) -> tuple:
    d = spacing_angstrom * ANGSTROM_TO_BOHR
    return tuple(("H", (0.0, 0.0, k * d)) for k in range(count))


def _lih(distance_angstrom: float = 1.6) -> tuple:
    d = distance_angstrom * ANGSTROM_TO_BOHR
    return (("Li", (0.0, 0.0, 0.0)), ("H", (0.0, 0.0, d)))


MOLECULES: dict[str, MoleculeSpec] = {
    "h2": MoleculeSpec("h2", _hydrogen_chain(2)),
    "h4": MoleculeSpec("h4", _hydrogen_chain(4)),
    "h6": MoleculeSpec("h6", _hydrogen_chain(6)),
    "lih": MoleculeSpec("lih", _lih()),
    "lih_2o2e": MoleculeSpec("lih_2o2e", _lih(), active=(2, 2)),
    "lih_4o2e": MoleculeSpec("lih_4o2e", _lih(), active=(4, 2)),
    "lih_4o4e": MoleculeSpec("lih_4o4e", _lih(), active=(4, 4)),
    "lih_5o4e": MoleculeSpec("lih_5o4e", _lih(), active=(5, 4)),
}


def named_molecule(name: str) -> MoleculeSpec:
    key = name.lower()
    if key not in MOLECULES:
        raise KeyError(
            f"unknown molecule {name!r}; known: {', '.join(sorted(MOLECULES))}"
        )
    return MOLECULES[key]


def parse_geometry_file(path: str, name: str | None = None) -> MoleculeSpec:
    """Read a plain geometry file: one ``El x y z`` line per atom, in Angstrom."""
    atoms = []
    with open(path, encoding="utf-8") as fh:
        for raw in fh:
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            el, *coords = line.split()
            if len(coords) != 3:
                raise ValueError(f"bad geometry line {line!r}")
            xyz = tuple(float(c) * ANGSTROM_TO_BOHR for c in coords)
            atoms.append((el, xyz))
    if not atoms:
        raise ValueError(f"no atoms found in {path}")
    return MoleculeSpec(name or "custom", tuple(atoms))
