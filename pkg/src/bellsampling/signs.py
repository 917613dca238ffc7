"""Sign estimation for Pauli expectation values.

The Bell-basis estimators only see |<P>|; the sign comes either from a
classical oracle file or from conventional grouped sampling with a
majority vote over an odd number of shots per group.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .paulis import (
    Grouping,
    HamiltonianFormatError,
    PauliHamiltonian,
    PauliString,
    qubit_wise_commutes,
)
from .states import StateVector, expectation

__all__ = [
    "ShotAllocation",
    "SignVector",
    "GroupTallies",
    "largest_remainder",
    "allocate_shots",
    "sample_group_outcomes",
    "estimate_signs",
    "sample_signs",
    "exact_signs",
    "load_sign_oracle",
]

_H = np.array([[1.0, 1.0], [1.0, -1.0]]) / math.sqrt(2.0)
_SDG = np.array([[1.0, 0.0], [0.0, -1.0j]])


@dataclass(frozen=True)
class ShotAllocation:
    """Per-group shot counts for sign estimation."""

    counts: tuple[int, ...]
    mode: str  # "wds" | "wrs"
    requested: int

    def __post_init__(self):
        if any(c < 0 for c in self.counts):
            raise ValueError("negative shot count")
        if self.mode not in ("wds", "wrs"):
            raise ValueError(f"unknown allocation mode {self.mode!r}")

    @property
    def total(self) -> int:
        return sum(self.counts)


@dataclass(frozen=True)
class SignVector:
    """Estimated sign (+1/-1) per non-identity Hamiltonian term."""

    values: tuple[int, ...]
    provenance: str  # "oracle-file" | "sampled" | "exact"
    zero_defaulted: tuple[int, ...] = field(default=())

    def __post_init__(self):
        if any(v not in (-1, 1) for v in self.values):
            raise ValueError("signs must be +1 or -1")

    def as_array(self) -> np.ndarray:
        return np.array(self.values, dtype=np.int8)


def largest_remainder(shares: np.ndarray, total: int) -> np.ndarray:
    """Integer apportionment of `total` proportional to `shares`."""
    shares = np.asarray(shares, dtype=float)
    assert shares.sum() > 0
    quotas = total * shares / shares.sum()
    counts = np.floor(quotas).astype(int)
    deficit = total - counts.sum()
    # Ties broken by index so the result is reproducible.
    order = sorted(range(len(shares)), key=lambda i: (-(quotas[i] - counts[i]), i))
    for i in order[:deficit]:
        counts[i] += 1
    return counts


def allocate_shots(
    grouping: Grouping, n2: int, mode: str, seed: int | None = None
) -> ShotAllocation:
    """Distribute N2 sign shots over QWC groups.

    WDS: largest-remainder apportionment of ``n2 * w_g`` (groups whose
    nominal share is below one shot get zero; if every share is below one,
    the largest-weight group takes the whole budget), then each positive
    even count is made odd.  Parity fixes are paired (-1/+1 in group
    order) so the total is preserved; when an odd number of groups needs
    fixing the last one is decremented and the total drops by one, which
    is the only way to keep every positive count odd.

    WRS: one multinomial draw of n2 shots with the group weights; counts
    may be even or zero.
    """
    if n2 < 1:
        raise ValueError("n2 must be >= 1")
    weights = np.asarray(grouping.weights, dtype=float)
    if mode == "wds":
        shares = n2 * weights
        eligible = shares >= 1.0
        if not eligible.any():
            eligible[int(np.argmax(weights))] = True
        counts = np.zeros(len(weights), dtype=int)
        counts[eligible] = largest_remainder(weights[eligible], n2)
        pending = [g for g in range(len(counts)) if counts[g] > 0 and counts[g] % 2 == 0]
        # Alternating -1/+1 pairs the fixes so the total survives; an odd
        # number of even groups ends on -1 and the total drops by one, the
        # only outcome compatible with every positive count being odd.
        for pos, g in enumerate(pending):
            counts[g] += -1 if pos % 2 == 0 else 1
        return ShotAllocation(tuple(int(c) for c in counts), "wds", n2)
    if mode == "wrs":
        rng = np.random.Generator(np.random.Philox(seed if seed is not None else 0))
        counts = rng.multinomial(n2, weights / weights.sum())
        return ShotAllocation(tuple(int(c) for c in counts), "wrs", n2)
    raise ValueError(f"unknown allocation mode {mode!r}")


@dataclass(frozen=True)
class GroupTallies:
    """Per-term sums of +/-1 outcomes from one group's shared-basis shots."""

    term_indices: tuple[int, ...]
    sums: np.ndarray
    shots: int


def _shared_basis_probs(state: StateVector, strings) -> np.ndarray:
    """Outcome probabilities after rotating each qubit to its group letter."""
    n = state.n
    psi = np.asarray(state.amplitudes, dtype=np.complex128).reshape([2] * n)
    letters = {}
    for s in strings:
        for letter, k in s.factors():
            if letters.setdefault(k, letter) != letter:
                raise ValueError("group is not qubit-wise commuting")
    for k, letter in letters.items():
        if letter == "X":
            gate = _H
        elif letter == "Y":
            gate = _H @ _SDG
        else:
            continue
        # numpy reshape puts qubit 0 on the last axis.
        axis = n - 1 - k
        psi = np.moveaxis(np.tensordot(gate, psi, axes=([1], [axis])), 0, axis)
    return np.abs(psi.reshape(-1)) ** 2


def sample_group_outcomes(
    state: StateVector,
    strings,
    shots: int,
    seed: int,
    term_indices: tuple[int, ...] | None = None,
) -> GroupTallies:
    """Measure a QWC group `shots` times in its shared basis.

    Every shot gives a consistent +/-1 outcome for each member string; the
    returned tallies hold the per-term outcome sums.
    """
    strings = list(strings)
    for i in range(len(strings)):
        for j in range(i + 1, len(strings)):
            if not qubit_wise_commutes(strings[i], strings[j]):
                raise ValueError("sample_group_outcomes requires a QWC group")
    if shots < 0:
        raise ValueError("shots must be >= 0")
    if term_indices is None:
        term_indices = tuple(range(len(strings)))
    if shots == 0:
        return GroupTallies(term_indices, np.zeros(len(strings), dtype=np.int64), 0)
    probs = _shared_basis_probs(state, strings)
    probs = probs / probs.sum()
    rng = np.random.Generator(np.random.Philox(seed))
    counts = rng.multinomial(shots, probs)
    idx = np.arange(probs.size, dtype=np.int64)
    sums = np.empty(len(strings), dtype=np.int64)
    for t, s in enumerate(strings):
        # bitwise_count yields uint8; widen before the +/-1 mapping
        signs = 1 - 2 * (np.bitwise_count(idx & s.support).astype(np.int64) & 1)
        sums[t] = int(counts @ signs)
    return GroupTallies(term_indices, sums, shots)


def estimate_signs(
    tallies: list[GroupTallies], grouping: Grouping, m: int
) -> SignVector:
    """Majority-vote signs from group tallies.

    Terms in zero-shot groups default to +1, as do exact ties (ties can only
    happen for even shot counts, i.e. under WRS allocation).
    """
    values = np.ones(m, dtype=np.int64)
    covered: set[int] = set()
    for t in tallies:
        if t.shots % 2 == 1:
            assert not np.any(t.sums == 0), "odd shot count cannot tie"
        for pos, i in enumerate(t.term_indices):
            s = t.sums[pos]
            values[i] = 1 if s > 0 else (-1 if s < 0 else 1)
            covered.add(i)
    for g, group in enumerate(grouping.groups):
        for i in group:
            if i not in covered:
                values[i] = 1  # zero-shot default
    return SignVector(tuple(int(v) for v in values), "sampled")


def sample_signs(
    state: StateVector,
    h: PauliHamiltonian,
    grouping: Grouping,
    allocation: ShotAllocation,
    seed: int,
) -> SignVector:
    """Full sampled-sign pipeline: per-group measurement plus majority vote."""
    seeds = np.random.SeedSequence(seed).spawn(len(grouping.groups))
    tallies = []
    for g, group in enumerate(grouping.groups):
        shots = allocation.counts[g]
        if shots == 0:
            continue
        strings = [h.terms[i][1] for i in group]
        tallies.append(
            sample_group_outcomes(
                state,
                strings,
                shots,
                seed=seeds[g].generate_state(1)[0],
                term_indices=tuple(group),
            )
        )
    return estimate_signs(tallies, grouping, h.m)


def exact_signs(state: StateVector, h: PauliHamiltonian) -> SignVector:
    """Signs of the exact expectation values; zero maps to +1."""
    values = []
    zeros = []
    for i, (_, p) in enumerate(h.terms):
        mu = expectation(state, p)
        if mu == 0.0:
            zeros.append(i)
        values.append(1 if mu >= 0.0 else -1)
    return SignVector(tuple(values), "exact", tuple(zeros))


def load_sign_oracle(text: str, h: PauliHamiltonian) -> SignVector:
    """Parse a sign-oracle document and align it with the Hamiltonian terms.

    Each line holds a Pauli string in the Hamiltonian factor syntax followed
    by a signed real expectation value; only its sign is used.  Zero values
    carry no sign information and default to +1 with a warning.
    """
    n = None
    seen: dict[tuple[int, int], float] = {}
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
            n = int(tokens[1])
            if n != h.n:
                raise HamiltonianFormatError(
                    f"oracle qubit count {n} differs from Hamiltonian {h.n}"
                )
            continue
        if len(tokens) < 2:
            raise HamiltonianFormatError(f"line {lineno}: expected factors and value")
        try:
            value = float(tokens[-1].replace("−", "-"))
        except ValueError:
            raise HamiltonianFormatError(
                f"line {lineno}: bad oracle value {tokens[-1]!r}"
            ) from None
        if not math.isfinite(value):
            raise HamiltonianFormatError(f"line {lineno}: non-finite oracle value")
        factors = []
        for tok in tokens[:-1]:
            if len(tok) < 2 or tok[0] not in "XYZ" or not tok[1:].isdigit():
                raise HamiltonianFormatError(f"line {lineno}: bad factor {tok!r}")
            factors.append((tok[0], int(tok[1:])))
        p = PauliString.from_factors(h.n, factors)
        seen[(p.x, p.z)] = value
    if n is None:
        raise HamiltonianFormatError("missing 'qubits N' header")
    values = []
    zeros = []
    for i, (_, p) in enumerate(h.terms):
        key = (p.x, p.z)
        if key not in seen:
            raise HamiltonianFormatError(f"oracle is missing term {p}")
        v = seen[key]
        if v == 0.0:
            zeros.append(i)
            warnings.warn(
                f"oracle value for {p} is exactly zero; defaulting its sign to +1",
                stacklevel=2,
            )
            values.append(1)
        else:
            values.append(1 if v > 0 else -1)
    return SignVector(tuple(values), "oracle-file", tuple(zeros))
