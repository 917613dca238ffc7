"""`ingest` command: emit <name>.ham and optional <name>.signs fixtures."""

from __future__ import annotations

import argparse
import os
import sys

from .generate import generate_hamiltonian, generate_sign_oracle
from .molecules import MOLECULES, MoleculeSpec, named_molecule, parse_geometry_file

__all__ = ["main"]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ingest",
        description="Generate qubit Hamiltonian fixtures (STO-3G, Jordan-Wigner)",
    )
    parser.add_argument(
        "--molecule",
        required=True,
        help=f"name ({', '.join(sorted(MOLECULES))}) or geometry file path",
    )
    parser.add_argument("--basis", default="sto-3g", choices=["sto-3g"])
    parser.add_argument(
        "--active",
        default=None,
        help="active space as 'orbitals,electrons' (e.g. 5,4)",
    )
    parser.add_argument("--signs", action="store_true", help="also emit a CISD sign oracle")
    parser.add_argument("--out", required=True, help="output directory")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if os.path.exists(args.molecule):
            spec = parse_geometry_file(args.molecule)
        else:
            spec = named_molecule(args.molecule)
        if args.active:
            orbitals, electrons = (int(v) for v in args.active.split(","))
            spec = MoleculeSpec(
                f"{spec.name}_{orbitals}o{electrons}e", spec.geometry, (orbitals, electrons)
            )
        os.makedirs(args.out, exist_ok=True)
        ham_path = os.path.join(args.out, f"{spec.name}.ham")
        with open(ham_path, "w", encoding="utf-8") as fh:
            fh.write(generate_hamiltonian(spec))
        print(ham_path)
        if args.signs:
            signs_path = os.path.join(args.out, f"{spec.name}.signs")
            with open(signs_path, "w", encoding="utf-8") as fh:
                fh.write(generate_sign_oracle(spec))
            print(signs_path)
    except Exception as exc:
        print(f"ingest: error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
