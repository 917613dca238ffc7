"""Molecular Hamiltonian and sign-oracle generation in the STO-3G basis."""

from .active import ActiveIntegrals, active_space, mo_integrals
from .basis import ANGSTROM_TO_BOHR, BasisFunction, build_basis
from .cisd import cisd_basis, cisd_state
from .generate import generate_hamiltonian, generate_sign_oracle
from .jw import PauliAccumulator, hamiltonian_text, ladder_operator, qubit_hamiltonian
from .molecules import MOLECULES, MoleculeSpec, named_molecule, parse_geometry_file
from .scf import ScfResult, run_rhf

__version__ = "0.1.0"
