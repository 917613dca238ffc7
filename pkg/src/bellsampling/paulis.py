"""Pauli strings, weighted Pauli-string Hamiltonians, and QWC groupings.

A Pauli string on n qubits is stored as a pair of n-bit masks ``(x, z)``:
bit k of ``x``/``z`` set means the factor on qubit k has an X/Z component,
so X=(1,0), Z=(0,1), Y=(1,1) and I=(0,0).  Bit k of a mask always refers
to qubit k (little-endian).
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass

import numpy as np

__all__ = [
    "PauliString",
    "PauliHamiltonian",
    "Grouping",
    "HamiltonianFormatError",
    "parse_hamiltonian",
    "serialize_hamiltonian",
    "qubit_wise_commutes",
    "qwc_grouping",
    "is_valid_grouping",
]

_LETTER_TO_BITS = {"I": (0, 0), "X": (1, 0), "Y": (1, 1), "Z": (0, 1)}
_BITS_TO_LETTER = {v: k for k, v in _LETTER_TO_BITS.items()}
_FACTOR_RE = re.compile(r"^([XYZ])(\d+)$")


class HamiltonianFormatError(ValueError):
    """Raised for malformed Hamiltonian or sign-oracle documents."""


@dataclass(frozen=True, order=True)
class PauliString:
    """An n-qubit tensor product over {I, X, Y, Z} in bitmask form."""

    n: int
    x: int
    z: int

    def __post_init__(self):
        if self.n < 1:
            raise ValueError(f"qubit count must be positive, got {self.n}")
        limit = 1 << self.n
        if not (0 <= self.x < limit and 0 <= self.z < limit):
            raise ValueError(f"mask outside {self.n}-qubit range")

    @classmethod
    def from_letters(cls, word: str) -> "PauliString":
        """Build from a letter word, position k = qubit k (e.g. ``"XIZ"``)."""
        x = z = 0
        for k, letter in enumerate(word):
            try:
                xb, zb = _LETTER_TO_BITS[letter]
            except KeyError:
                raise ValueError(f"unknown Pauli letter {letter!r}") from None
            x |= xb << k
            z |= zb << k
        return cls(len(word), x, z)

    @classmethod
    def from_factors(cls, n: int, factors) -> "PauliString":
        """Build from (letter, qubit) pairs; unlisted qubits are identity."""
        x = z = 0
        for letter, k in factors:
            if not 0 <= k < n:
                raise ValueError(f"qubit index {k} outside 0..{n - 1}")
            xb, zb = _LETTER_TO_BITS[letter]
            x |= xb << k
            z |= zb << k
        return cls(n, x, z)

    @classmethod
    def identity(cls, n: int) -> "PauliString":
        return cls(n, 0, 0)

    def letter(self, k: int) -> str:
        """Single-qubit factor at position k."""
        if not 0 <= k < self.n:
            raise IndexError(f"qubit index {k} outside 0..{self.n - 1}")
        return _BITS_TO_LETTER[((self.x >> k) & 1, (self.z >> k) & 1)]

    @property
    def letters(self) -> str:
        return "".join(self.letter(k) for k in range(self.n))

    @property
    def support(self) -> int:
        """Mask of non-identity positions."""
        return self.x | self.z

    @property
    def weight(self) -> int:
        return self.support.bit_count()

    @property
    def is_identity(self) -> bool:
        return self.x == 0 and self.z == 0

    @property
    def y_count(self) -> int:
        return (self.x & self.z).bit_count()

    def factors(self) -> list[tuple[str, int]]:
        """Non-identity factors as (letter, qubit) pairs, qubit ascending."""
        return [
            (self.letter(k), k) for k in range(self.n) if (self.support >> k) & 1
        ]

    def __str__(self) -> str:
        if self.is_identity:
            return "I"
        return " ".join(f"{letter}{k}" for letter, k in self.factors())


def qubit_wise_commutes(p: PauliString, q: PauliString) -> bool:
    """True iff at every position the letters are equal or one is identity."""
    if p.n != q.n:
        raise ValueError(f"qubit counts differ: {p.n} vs {q.n}")
    both = p.support & q.support
    return ((p.x ^ q.x) | (p.z ^ q.z)) & both == 0


@dataclass(frozen=True)
class PauliHamiltonian:
    """Weighted Pauli strings with the identity coefficient kept separate."""

    n: int
    terms: tuple[tuple[float, PauliString], ...]
    constant: float = 0.0

    def __post_init__(self):
        seen = set()
        for c, p in self.terms:
            if p.n != self.n:
                raise ValueError("term qubit count differs from Hamiltonian")
            if p.is_identity:
                raise ValueError("identity term must go into `constant`")
            if not math.isfinite(c):
                raise ValueError(f"non-finite coefficient {c!r} for {p}")
            key = (p.x, p.z)
            if key in seen:
                raise ValueError(f"duplicate Pauli string {p}")
            seen.add(key)
        if not math.isfinite(self.constant):
            raise ValueError("non-finite constant term")

    @property
    def m(self) -> int:
        """Number of distinct non-identity strings."""
        return len(self.terms)

    @property
    def coefficients(self) -> np.ndarray:
        return np.array([c for c, _ in self.terms], dtype=float)

    @property
    def strings(self) -> tuple[PauliString, ...]:
        return tuple(p for _, p in self.terms)

    def canonical(self) -> "PauliHamiltonian":
        """Terms reordered lexicographically by (x-mask, z-mask)."""
        ordered = tuple(sorted(self.terms, key=lambda t: (t[1].x, t[1].z)))
        return PauliHamiltonian(self.n, ordered, self.constant)


def _parse_coefficient(token: str) -> float:
    # Tolerate the typographic minus that shows up in copied tables.
    return float(token.replace("−", "-"))


def parse_hamiltonian(text: str) -> PauliHamiltonian:
    """Parse the line-oriented Hamiltonian format into canonical form.

    Format: optional ``#`` comment lines, a ``qubits N`` header, then one
    term per line as ``<coefficient> <factor> ...`` with factors like
    ``Z0`` or ``X3``.  A coefficient-only line is the identity/constant
    term.  Duplicate strings are merged by summing coefficients.
    """
    n = None
    acc: dict[tuple[int, int], float] = {}
    order: list[tuple[int, int]] = []
    constant = 0.0
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        tokens = line.split()
        if n is None:
            if tokens[0] != "qubits" or len(tokens) != 2:
                raise HamiltonianFormatError(
                    f"line {lineno}: expected 'qubits N' header, got {line!r}"
                )
            try:
                n = int(tokens[1])
            except ValueError:
                raise HamiltonianFormatError(
                    f"line {lineno}: bad qubit count {tokens[1]!r}"
                ) from None
            if n < 1:
                raise HamiltonianFormatError(f"line {lineno}: qubit count must be >= 1")
            continue
        try:
            coeff = _parse_coefficient(tokens[0])
        except ValueError:
            raise HamiltonianFormatError(
                f"line {lineno}: bad coefficient {tokens[0]!r}"
            ) from None
        if not math.isfinite(coeff):
            raise HamiltonianFormatError(f"line {lineno}: non-finite coefficient")
        if len(tokens) == 1:
            constant += coeff
            continue
        factors = []
        used = set()
        for tok in tokens[1:]:
            match = _FACTOR_RE.match(tok)
            if match is None:
                raise HamiltonianFormatError(f"line {lineno}: bad factor {tok!r}")
            letter, k = match.group(1), int(match.group(2))
            if k >= n:
                raise HamiltonianFormatError(
                    f"line {lineno}: qubit index {k} inconsistent with 'qubits {n}'"
                )
            if k in used:
                raise HamiltonianFormatError(
                    f"line {lineno}: repeated qubit index {k}"
                )
            used.add(k)
            factors.append((letter, k))
        p = PauliString.from_factors(n, factors)
        key = (p.x, p.z)
        if key not in acc:
            acc[key] = 0.0
            order.append(key)
        acc[key] += coeff
    if n is None:
        raise HamiltonianFormatError("missing 'qubits N' header")
    terms = tuple((acc[key], PauliString(n, key[0], key[1])) for key in sorted(order))
    return PauliHamiltonian(n, terms, constant)


def serialize_hamiltonian(h: PauliHamiltonian) -> str:
    """Render in canonical form; ``parse_hamiltonian`` round-trips it."""
    lines = [f"qubits {h.n}"]
    for c, p in h.canonical().terms:
        lines.append(f"{c!r} {p}")
    if h.constant != 0.0:
        lines.append(f"{h.constant!r}")
    return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class Grouping:
    """Partition of term indices into QWC groups with normalized weights."""

    groups: tuple[tuple[int, ...], ...]
    weights: tuple[float, ...]

    def __post_init__(self):
        if len(self.groups) != len(self.weights):
            raise ValueError("one weight per group required")
        seen: set[int] = set()
        for g in self.groups:
            if not g:
                raise ValueError("empty group")
            if seen & set(g):
                raise ValueError("term index in more than one group")
            seen.update(g)
        if any(w < 0 for w in self.weights):
            raise ValueError("negative group weight")
        if abs(sum(self.weights) - 1.0) > 1e-12:
            raise ValueError("group weights must sum to 1")

    @property
    def n_groups(self) -> int:
        return len(self.groups)

    def group_of(self, term_index: int) -> int:
        for gi, g in enumerate(self.groups):
            if term_index in g:
                return gi
        raise KeyError(f"term index {term_index} not in grouping")


def qwc_grouping(h: PauliHamiltonian) -> Grouping:
    """Greedy first-fit QWC coloring, largest |coefficient| first.

    Each group keeps a merged letter profile, so compatibility with a whole
    group is a constant number of bitmask operations.  Group weights are
    proportional to the summed |coefficient| of their members.
    """
    if h.m == 0:
        raise ValueError("Hamiltonian has no non-identity terms")
    order = sorted(
        range(h.m),
        key=lambda i: (-abs(h.terms[i][0]), h.terms[i][1].x, h.terms[i][1].z),
    )
    # Per group: [x-profile, z-profile, occupied mask, member indices]
    profiles: list[list] = []
    for i in order:
        p = h.terms[i][1]
        for prof in profiles:
            shared = prof[2] & p.support
            if ((prof[0] ^ p.x) | (prof[1] ^ p.z)) & shared == 0:
                prof[0] |= p.x
                prof[1] |= p.z
                prof[2] |= p.support
                prof[3].append(i)
                break
        else:
            profiles.append([p.x, p.z, p.support, [i]])
    groups = tuple(tuple(sorted(prof[3])) for prof in profiles)
    abs_coeffs = np.abs(h.coefficients)
    total = float(abs_coeffs.sum())
    if total == 0.0:
        raise ValueError("all coefficients are zero; group weights undefined")
    raw = [float(abs_coeffs[list(g)].sum()) / total for g in groups]
    # Nudge the largest weight so the tuple sums to 1 exactly.
    correction = 1.0 - sum(raw)
    raw[int(np.argmax(raw))] += correction
    return Grouping(groups, tuple(raw))


def is_valid_grouping(h: PauliHamiltonian, grouping: Grouping) -> bool:
    """Machine check: partition covers all terms and every pair QWC-commutes."""
    covered = sorted(i for g in grouping.groups for i in g)
    if covered != list(range(h.m)):
        return False
    for g in grouping.groups:
        for a in range(len(g)):
            for b in range(a + 1, len(g)):
                if not qubit_wise_commutes(h.terms[g[a]][1], h.terms[g[b]][1]):
                    return False
    return True
