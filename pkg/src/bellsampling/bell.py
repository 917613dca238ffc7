"""Bell-basis measurements on two copies of a state, and the |<P>| estimators.

Each qubit pair yields one of four Bell labels.  Labels are encoded by two
bits ``(a, b)``: ``a`` is the bit-flip indicator and ``b`` the phase
indicator, i.e. the label state is ``(|0, a> + (-1)^b |1, 1-a>)/sqrt(2)``.
With this convention

* a=0, b=0: (|00> + |11>)/sqrt(2)   "Psi+"
* a=0, b=1: (|00> - |11>)/sqrt(2)   "Psi-"
* a=1, b=0: (|01> + |10>)/sqrt(2)   "Phi+"
* a=1, b=1: (|01> - |10>)/sqrt(2)   "Phi-"

which matches reading out the computational basis after the CNOT+H Bell
disentangler.  The per-letter eigenvalues are lambda_I = +1,
lambda_X = (-1)^b, lambda_Z = (-1)^a, lambda_Y = -lambda_X * lambda_Z.

An n-pair outcome is a pair of n-bit words ``(a, b)``; its probability is
``p(a, b) = 2^-n |sum_x (-1)^{b.x} psi(x) psi(x XOR a)|^2``.  Sampling is
two-stage: draw the bit-flip word from its marginal (an XOR
autocorrelation of |psi|^2), then draw the phase word from the
Walsh-Hadamard transform of ``psi(x) psi(x XOR a)``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .paulis import PauliString
from .states import StateVector

__all__ = [
    "BELL_LABELS",
    "BellOutcome",
    "BellShotBatch",
    "bell_eigenvalue",
    "lambda_product",
    "lambda_products",
    "walsh_hadamard",
    "bitflip_distribution",
    "exact_bell_distribution",
    "sample_bell_outcomes",
    "estimate_abs",
    "estimate_abs_many",
    "dump_batch",
]

#: Label names indexed by the two-bit code (a << 1) | b.
BELL_LABELS = ("Psi+", "Psi-", "Phi+", "Phi-")
_LABEL_TO_BITS = {name: (code >> 1, code & 1) for code, name in enumerate(BELL_LABELS)}


@dataclass(frozen=True)
class BellOutcome:
    """One Bell measurement outcome: n labels packed into two bit words."""

    n: int
    a: int
    b: int

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(
            BELL_LABELS[(((self.a >> k) & 1) << 1) | ((self.b >> k) & 1)]
            for k in range(self.n)
        )


@dataclass(frozen=True)
class BellShotBatch:
    """N1 i.i.d. Bell outcomes with the RNG seed that produced them."""

    n: int
    a: np.ndarray
    b: np.ndarray
    seed: int

    def __post_init__(self):
        if self.a.shape != self.b.shape or self.a.ndim != 1:
            raise ValueError("a and b must be equal-length 1-d arrays")
        if len(self.a) < 1:
            raise ValueError("empty batch")

    @property
    def n_shots(self) -> int:
        return len(self.a)

    def outcome(self, t: int) -> BellOutcome:
        return BellOutcome(self.n, int(self.a[t]), int(self.b[t]))


def bell_eigenvalue(sigma: str, label) -> int:
    """Eigenvalue of ``sigma x sigma`` on a Bell label.

    ``label`` is a label name ("Psi+", ...) or an ``(a, b)`` bit pair.
    """
    a, b = _LABEL_TO_BITS[label] if isinstance(label, str) else label
    if sigma == "I":
        return 1
    if sigma == "X":
        return -1 if b else 1
    if sigma == "Z":
        return -1 if a else 1
    if sigma == "Y":
        return -((-1 if b else 1) * (-1 if a else 1))
    raise ValueError(f"unknown Pauli letter {sigma!r}")


def lambda_product(p: PauliString, outcome: BellOutcome) -> int:
    """Product of per-pair eigenvalues of P x P over one Bell outcome."""
    if p.n != outcome.n:
        raise ValueError(f"length mismatch: string n={p.n}, outcome n={outcome.n}")
    parity = (
        p.y_count
        + (outcome.b & p.x).bit_count()
        + (outcome.a & p.z).bit_count()
    ) & 1
    return -1 if parity else 1


def lambda_products(batch: BellShotBatch, p: PauliString) -> np.ndarray:
    """Vectorized lambda values, one per shot, as a +/-1 int8 array."""
    if p.n != batch.n:
        raise ValueError("length mismatch between string and batch")
    parity = (
        p.y_count
        + np.bitwise_count(np.bitwise_and(batch.b, p.x)).astype(np.int64)
        + np.bitwise_count(np.bitwise_and(batch.a, p.z)).astype(np.int64)
    ) & 1
    return np.where(parity, -1, 1).astype(np.int8)


def walsh_hadamard(v: np.ndarray) -> np.ndarray:
    """Unnormalized transform ``W[b] = sum_x (-1)^{popcount(b & x)} v[x]``."""
    w = np.array(v, dtype=np.complex128)
    size = w.size
    if size & (size - 1):
        raise ValueError("length must be a power of two")
    h = 1
    while h < size:
        w = w.reshape(-1, 2 * h)
        top = w[:, :h] + w[:, h:]
        bot = w[:, :h] - w[:, h:]
        w = np.concatenate([top, bot], axis=1).reshape(-1)
        h *= 2
    return w


def bitflip_distribution(state: StateVector) -> np.ndarray:
    """Marginal p(a) = sum_x |psi(x)|^2 |psi(x XOR a)|^2."""
    w = np.abs(state.amplitudes) ** 2
    pa = walsh_hadamard(walsh_hadamard(w) ** 2).real / w.size
    pa = np.clip(pa, 0.0, None)
    total = pa.sum()
    assert abs(total - 1.0) < 1e-9, "bit-flip marginal lost normalization"
    return pa / total


def _phase_weights(state: StateVector, a: int) -> np.ndarray:
    """Unnormalized |WHT(psi(x) psi(x XOR a))|^2 over phase words."""
    dim = state.amplitudes.size
    idx = np.arange(dim)
    v = state.amplitudes * state.amplitudes[idx ^ a]
    return np.abs(walsh_hadamard(v)) ** 2


def exact_bell_distribution(state: StateVector) -> np.ndarray:
    """Full outcome distribution as a (2^n, 2^n) array indexed [a, b].

    This is the analytic distribution of the two-stage sampler; intended for
    small n (it costs O(4^n) time).
    """
    dim = state.amplitudes.size
    out = np.empty((dim, dim))
    for a in range(dim):
        out[a] = _phase_weights(state, a) / dim
    assert abs(out.sum() - 1.0) < 1e-9
    return out


def sample_bell_outcomes(state: StateVector, n1: int, seed: int) -> BellShotBatch:
    """Draw N1 i.i.d. Bell outcomes from p(a, b); deterministic given seed.

    Stage 1 samples every shot's bit-flip word from the precomputed
    marginal; stage 2 groups shots by distinct word and samples their phase
    words from the conditional distribution, one Walsh-Hadamard transform
    per distinct word.
    """
    if n1 < 1:
        raise ValueError("n1 must be >= 1")
    rng = np.random.Generator(np.random.Philox(seed))
    dim = state.amplitudes.size
    pa = bitflip_distribution(state)
    a_words = rng.choice(dim, size=n1, p=pa)
    b_words = np.empty(n1, dtype=np.int64)
    for a in np.unique(a_words):
        positions = np.nonzero(a_words == a)[0]
        weights = _phase_weights(state, int(a))
        total = weights.sum()
        assert total > 0.0, "conditional phase distribution has zero norm"
        b_words[positions] = rng.choice(dim, size=len(positions), p=weights / total)
    return BellShotBatch(state.n, a_words.astype(np.int64), b_words, seed)


def estimate_abs(batch: BellShotBatch, p: PauliString) -> tuple[float, float]:
    """Estimators (a_hat, b_hat) for <P>^2 and |<P>| from one batch.

    a_hat is the sample mean of the lambda values; b_hat clips it at zero
    and takes the square root so the estimate of |<P>| is always real.
    """
    a_hat = float(lambda_products(batch, p).mean(dtype=np.float64))
    return a_hat, float(np.sqrt(max(0.0, a_hat)))


def estimate_abs_many(batch: BellShotBatch, strings) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized ``estimate_abs`` over many strings sharing one batch."""
    xs = np.array([s.x for s in strings], dtype=np.int64)
    zs = np.array([s.z for s in strings], dtype=np.int64)
    ys = np.array([s.y_count for s in strings], dtype=np.int64)
    parity = (
        ys[:, None]
        + np.bitwise_count(batch.b[None, :] & xs[:, None])
        + np.bitwise_count(batch.a[None, :] & zs[:, None])
    ) & 1
    a_hat = 1.0 - 2.0 * parity.mean(axis=1, dtype=np.float64)
    return a_hat, np.sqrt(np.clip(a_hat, 0.0, None))


def dump_batch(batch: BellShotBatch) -> str:
    """Debug dump, one hex word per shot: 2 bits per qubit, code (a<<1)|b."""
    width = max(1, (2 * batch.n + 3) // 4)
    lines = []
    for t in range(batch.n_shots):
        code = 0
        for k in range(batch.n):
            pair = ((int(batch.a[t]) >> k & 1) << 1) | (int(batch.b[t]) >> k & 1)
            code |= pair << (2 * k)
        lines.append(f"{code:0{width}x}")
    return "\n".join(lines) + "\n"
