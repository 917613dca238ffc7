"""Analytic moments of the two-copy estimators and the energy error budget.

The absolute-value estimator b_hat = sqrt(max(0, a_hat)) is a nonlinear
function of a binomial (or, for pairs of strings, multinomial) count, so
its moments are evaluated three ways:

* exact summation over the count distribution (always correct, O(N1) per
  term but O(N1^3) per pair, so pairs are guarded by a shot-count limit),
* a normal-approximation integral (quadrature; kept as a mid-fidelity
  reference for tests),
* a Laplace/saddle-point evaluation of that integral (fast at any N1).

For a single count the saddle point is closed form.  For a pair of strings
the exponent is a strictly convex function of the three free multinomial
coordinates on the open region where both square-root arguments are
positive, so a damped Newton iteration from a feasible start always finds
the unique stationary point.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import integrate, special, stats

from .paulis import Grouping, PauliHamiltonian
from .signs import SignVector, allocate_shots
from .states import (
    StateVector,
    pair_product_expectations,
    pauli_moments,
)

__all__ = [
    "SMALL_MU_CONSTANT",
    "ExactModeLimitError",
    "SaddleInfeasibleError",
    "SaddleConvergenceError",
    "MomentConfig",
    "MomentReport",
    "exp_b_exact",
    "exp_b2_exact",
    "exp_bb_exact",
    "exp_s_exact",
    "exp_ss_exact",
    "normal_exp_b",
    "normal_exp_b2",
    "saddle_exp_b",
    "saddle_exp_b2",
    "saddle_exp_bb",
    "mu_sigma_from_q",
    "asymptotic_reference",
    "assemble_bias_variance",
    "qwc_baseline_std",
]

#: Limit value of E[b_hat]/sqrt(sigma) as the mean eigenvalue goes to zero,
#: Gamma(3/4) / (2^{3/4} sqrt(pi)) ~= 0.4111.
SMALL_MU_CONSTANT = float(special.gamma(0.75) / (2.0**0.75 * math.sqrt(math.pi)))

# Joint probabilities below this are treated as structurally zero when the
# pair saddle removes coordinates; the occupation chance n1 * q of such a
# cell is negligible at desk-scale shot counts.
_ZERO_PROB = 1e-12
_PMF_WINDOW_SIGMAS = 45.0


class ExactModeLimitError(ValueError):
    """Exact multinomial pair summation requested above its shot-count guard."""


class SaddleInfeasibleError(RuntimeError):
    """No interior saddle point exists; fall back to exact summation."""


class SaddleConvergenceError(RuntimeError):
    """Newton iteration failed to converge; fall back to exact summation."""


# ---------------------------------------------------------------------------
# Exact summations
# ---------------------------------------------------------------------------


def _binom_window(q: float, n1: int) -> np.ndarray:
    """Count values carrying all but a negligible tail of the pmf mass."""
    if n1 <= 2_000:
        return np.arange(n1 + 1)
    sd = math.sqrt(n1 * q * (1.0 - q))
    half = int(_PMF_WINDOW_SIGMAS * sd + 10.0)
    lo = max(0, int(n1 * q) - half)
    hi = min(n1, int(n1 * q) + half)
    return np.arange(lo, hi + 1)


def exp_b_exact(q: float, n1: int) -> float:
    """E[b_hat] = sum_m sqrt(max(0, 2m/N1 - 1)) Binom(m; N1, q).

    Stable at any N1: pmf terms come out of scipy's log-space evaluation
    and the sum is windowed to the mass-carrying counts.
    """
    if not 0.0 <= q <= 1.0:
        raise ValueError(f"q must be in [0, 1], got {q}")
    if n1 < 1:
        raise ValueError("n1 must be >= 1")
    m = _binom_window(q, n1)
    integrand = np.sqrt(np.clip(2.0 * m / n1 - 1.0, 0.0, None))
    return float(np.sum(stats.binom.pmf(m, n1, q) * integrand))


def exp_b2_exact(q: float, n1: int) -> float:
    """E[b_hat^2] = sum_m max(0, 2m/N1 - 1) Binom(m; N1, q)."""
    if not 0.0 <= q <= 1.0:
        raise ValueError(f"q must be in [0, 1], got {q}")
    if n1 < 1:
        raise ValueError("n1 must be >= 1")
    m = _binom_window(q, n1)
    integrand = np.clip(2.0 * m / n1 - 1.0, 0.0, None)
    return float(np.sum(stats.binom.pmf(m, n1, q) * integrand))


@lru_cache(maxsize=4)
def _simplex_grid(n1: int):
    """Flattened (m1, m2, m3) grid with m1+m2+m3 <= n1 and log multinomial
    coefficients log(N1! / (m1! m2! m3! m4!))."""
    m1, m2, m3 = np.meshgrid(
        np.arange(n1 + 1), np.arange(n1 + 1), np.arange(n1 + 1), indexing="ij"
    )
    mask = (m1 + m2 + m3) <= n1
    m1, m2, m3 = m1[mask], m2[mask], m3[mask]
    m4 = n1 - m1 - m2 - m3
    logc = (
        special.gammaln(n1 + 1)
        - special.gammaln(m1 + 1)
        - special.gammaln(m2 + 1)
        - special.gammaln(m3 + 1)
        - special.gammaln(m4 + 1)
    )
    return m1, m2, m3, m4, logc


def _multinomial_expectation(qvec, n: int, integrand_fn) -> float:
    q = np.asarray(qvec, dtype=float)
    if q.shape != (4,):
        raise ValueError("qvec must have four entries")
    if q.min() < -1e-12 or abs(q.sum() - 1.0) > 1e-9:
        raise ValueError("qvec must be a probability vector")
    q = np.clip(q, 0.0, 1.0)
    m1, m2, m3, m4, logc = _simplex_grid(n)
    w = integrand_fn(m1, m2, m3)
    live = w != 0.0
    if not live.any():
        return 0.0
    logp = logc[live].copy()
    for m, qa in ((m1, q[0]), (m2, q[1]), (m3, q[2]), (m4, q[3])):
        ml = m[live]
        if qa <= 0.0:
            bad = ml > 0
            logp = np.where(bad, -np.inf, logp)
        else:
            logp = logp + ml * math.log(qa)
    return float(np.sum(np.exp(logp) * w[live]))


def exp_bb_exact(qvec, n1: int, limit: int = 200) -> float:
    """E[b_hat_i b_hat_j] by exact triple multinomial summation.

    ``qvec`` holds the joint doubled-copy outcome probabilities in the
    order (+1,+1), (+1,-1), (-1,+1), (-1,-1).  Guarded by ``limit`` because
    the sum has O(N1^3) terms.
    """
    if n1 < 1:
        raise ValueError("n1 must be >= 1")
    if n1 > limit:
        raise ExactModeLimitError(
            f"exact pair summation is O(N1^3); N1={n1} exceeds the guard "
            f"{limit}, use the saddle-point evaluation instead"
        )

    def integrand(m1, m2, m3):
        xi = np.clip(2.0 * (m1 + m2) / n1 - 1.0, 0.0, None)
        xj = np.clip(2.0 * (m1 + m3) / n1 - 1.0, 0.0, None)
        return np.sqrt(xi) * np.sqrt(xj)

    return _multinomial_expectation(qvec, n1, integrand)


@lru_cache(maxsize=4)
def _bb_live_grid(n1: int):
    """Cells with a nonzero product integrand, their counts, weights, logC."""
    m1, m2, m3, m4, logc = _simplex_grid(n1)
    xi = 2.0 * (m1 + m2) / n1 - 1.0
    xj = 2.0 * (m1 + m3) / n1 - 1.0
    live = (xi > 0.0) & (xj > 0.0)
    weights = np.sqrt(xi[live]) * np.sqrt(xj[live])
    counts = np.stack([m[live] for m in (m1, m2, m3, m4)], axis=1).astype(float)
    return counts, weights, logc[live]


def exp_bb_exact_batch(qvecs, n1: int, limit: int = 200) -> np.ndarray:
    """Vectorized :func:`exp_bb_exact` over rows of a (B, 4) array.

    Zero probabilities are clamped to 1e-300 so occupied cells underflow to
    zero weight, which matches removing them exactly.
    """
    q = np.asarray(qvecs, dtype=float)
    if q.ndim != 2 or q.shape[1] != 4:
        raise ValueError("qvecs must have shape (B, 4)")
    if n1 > limit:
        raise ExactModeLimitError(
            f"exact pair summation is O(N1^3); N1={n1} exceeds the guard {limit}"
        )
    counts, weights, logc = _bb_live_grid(n1)
    logq = np.log(np.clip(q, 1e-300, 1.0))  # (B, 4)
    out = np.empty(len(q))
    block = max(1, int(2e7) // max(1, len(weights)))
    for start in range(0, len(q), block):
        lp = logc[:, None] + counts @ logq[start : start + block].T
        out[start : start + block] = weights @ np.exp(lp)
    return out


def exp_s_exact(p: float, n2: int) -> float:
    """Majority-vote sign expectation for an odd number of shots.

    Equals ``1 - 2 P[Binom(N2, p) <= (N2-1)/2]``.
    """
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"p must be in [0, 1], got {p}")
    if n2 < 1 or n2 % 2 == 0:
        raise ValueError(f"n2 must be a positive odd integer, got {n2}")
    return float(1.0 - 2.0 * stats.binom.cdf((n2 - 1) // 2, n2, p))


def exp_ss_exact(pvec, n2g: int, limit: int = 200) -> float:
    """E[s_hat_i s_hat_j] for two strings sharing one measurement group.

    ``pvec`` holds the joint single-copy outcome probabilities in the order
    (+1,+1), (+1,-1), (-1,+1), (-1,-1).  Different-group pairs factorize
    and should use the product of :func:`exp_s_exact` values instead.
    """
    if n2g < 1 or n2g % 2 == 0:
        raise ValueError(f"n2g must be a positive odd integer, got {n2g}")
    if n2g > limit:
        raise ExactModeLimitError(
            f"exact pair summation is O(N2^3); N2={n2g} exceeds the guard {limit}"
        )

    def integrand(m1, m2, m3):
        si = np.sign(2.0 * (m1 + m2) / n2g - 1.0)
        sj = np.sign(2.0 * (m1 + m3) / n2g - 1.0)
        return si * sj

    return _multinomial_expectation(pvec, n2g, integrand)


# ---------------------------------------------------------------------------
# Normal-approximation integrals (mid-fidelity references)
# ---------------------------------------------------------------------------


def mu_sigma_from_q(q: float, n1: int) -> tuple[float, float]:
    """Mean and standard deviation of a_hat: mu = 2q-1, sigma^2 = 4q(1-q)/N1."""
    return 2.0 * q - 1.0, math.sqrt(4.0 * q * (1.0 - q) / n1)


def _normal_moment(mu: float, sigma: float, power: float) -> float:
    if sigma == 0.0:
        return max(0.0, mu) ** power
    norm = 1.0 / math.sqrt(2.0 * math.pi * sigma**2)

    def f(x):
        return x**power * math.exp(-((x - mu) ** 2) / (2.0 * sigma**2))

    val, _ = integrate.quad(f, 0.0, 1.0, limit=200, points=[max(mu, 0.0)])
    return norm * val


def normal_exp_b(mu: float, sigma: float) -> float:
    """Normal-approximation integral for E[b_hat] over x in [0, 1]."""
    return _normal_moment(mu, sigma, 0.5)


def normal_exp_b2(mu: float, sigma: float) -> float:
    """Normal-approximation integral for E[b_hat^2] over x in [0, 1]."""
    return _normal_moment(mu, sigma, 1.0)


# ---------------------------------------------------------------------------
# Saddle-point evaluations
# ---------------------------------------------------------------------------


def saddle_exp_b(mu: float, sigma: float) -> float:
    """Laplace evaluation of E[b_hat] with exponent
    S(x) = (x-mu)^2 / (2 sigma^2) - log(x)/2 at its unique positive root."""
    if sigma < 0.0:
        raise ValueError("sigma must be non-negative")
    if sigma == 0.0:
        return math.sqrt(max(0.0, mu))
    x = 0.5 * (mu + math.sqrt(mu * mu + 2.0 * sigma * sigma))
    s = (x - mu) ** 2 / (2.0 * sigma * sigma) - 0.5 * math.log(x)
    s2 = 1.0 / sigma**2 + 0.5 / (x * x)
    return math.exp(-s) / math.sqrt(sigma * sigma * s2)


def saddle_exp_b2(mu: float, sigma: float) -> float:
    """Laplace evaluation of E[b_hat^2]; exponent uses a full -log(x)."""
    if sigma < 0.0:
        raise ValueError("sigma must be non-negative")
    if sigma == 0.0:
        return max(0.0, mu)
    x = 0.5 * (mu + math.sqrt(mu * mu + 4.0 * sigma * sigma))
    t = (x - mu) ** 2 / (2.0 * sigma * sigma) - math.log(x)
    t2 = 1.0 / sigma**2 + 1.0 / (x * x)
    return math.exp(-t) / math.sqrt(sigma * sigma * t2)


def saddle_exp_bb(
    qvec, n1: int, *, grad_tol: float = 1e-10, max_iter: int = 100
) -> float:
    """Saddle-point evaluation of E[b_hat_i b_hat_j] for a string pair.

    Works in the free multinomial coordinates (the last kept coordinate is
    eliminated by the shot-count constraint and zero-probability
    coordinates are removed).  The exponent

        U(m) = quadratic Gaussian part - log(x_i)/2 - log(x_j)/2,

    with x_i, x_j the two mean-eigenvalue forms, is strictly convex where
    both forms are positive, so damped Newton from a feasible start finds
    the unique saddle.  The start is the distribution mean, shifted onto
    the one-dimensional saddle targets when the mean is infeasible.
    """
    q = np.asarray(qvec, dtype=float)
    if q.shape != (4,):
        raise ValueError("qvec must have four entries")
    values = saddle_exp_bb_batch(
        q[None, :], n1, grad_tol=grad_tol, max_iter=max_iter
    )
    return float(values[0])


def saddle_exp_bb_batch(
    qvecs, n1: int, *, grad_tol: float = 1e-10, max_iter: int = 100
) -> np.ndarray:
    """Vectorized :func:`saddle_exp_bb` over rows of a (B, 4) array.

    Pairs are grouped by their pattern of nonzero probabilities and each
    pattern's Newton iteration runs batched; the math is identical to the
    single-pair version.
    """
    q = np.asarray(qvecs, dtype=float)
    if q.ndim != 2 or q.shape[1] != 4:
        raise ValueError("qvecs must have shape (B, 4)")
    if q.min() < -1e-12 or np.max(np.abs(q.sum(axis=1) - 1.0)) > 1e-9:
        raise ValueError("each row must be a probability vector")
    if n1 < 1:
        raise ValueError("n1 must be >= 1")
    out = np.empty(len(q))
    alive = q > _ZERO_PROB
    patterns: dict[tuple[int, ...], list[int]] = {}
    for row, mask in enumerate(alive):
        patterns.setdefault(tuple(np.nonzero(mask)[0]), []).append(row)
    for keep, rows in patterns.items():
        idx = np.array(rows)
        out[idx] = _saddle_pattern(q[idx][:, keep], np.array(keep), n1, grad_tol, max_iter)
    return out


def _equilibrated_solve(mats: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    """Batched SPD solve with Jacobi scaling; tiny probabilities make the
    raw Hessians arbitrarily stiff, so normalize the diagonal first."""
    diag = np.sqrt(np.einsum("bii->bi", mats))
    dinv = 1.0 / diag
    scaled = mats * dinv[:, :, None] * dinv[:, None, :]
    b = (rhs * dinv)[..., None]
    try:
        y = np.linalg.solve(scaled, b)[..., 0]
    except np.linalg.LinAlgError:
        y = np.einsum("bij,bj->bi", np.linalg.pinv(scaled), b[..., 0])
    return y * dinv


def _saddle_pattern(qk, keep, n1, grad_tol, max_iter) -> np.ndarray:
    """Batched Newton solve for pairs sharing one nonzero-probability pattern."""
    batch = qk.shape[0]
    qk = qk / qk.sum(axis=1, keepdims=True)
    in_i = np.isin(keep, (0, 1)).astype(float)
    in_j = np.isin(keep, (0, 2)).astype(float)
    if len(keep) == 1:
        xi, xj = 2.0 * in_i[0] - 1.0, 2.0 * in_j[0] - 1.0
        return np.full(batch, math.sqrt(max(0.0, xi)) * math.sqrt(max(0.0, xj)))

    d = len(keep) - 1
    qf, qlast = qk[:, :d], qk[:, d]
    nu = n1 * qf
    eye = np.eye(d)
    cov = n1 * (qf[:, :, None] * eye - qf[:, :, None] * qf[:, None, :])
    cov_inv = (eye / qf[:, :, None] + (1.0 / qlast)[:, None, None]) / n1

    gs, cs = [], []
    const_factor = np.ones(batch)
    for member in (in_i, in_j):
        g = (2.0 / n1) * (member[:d] - member[d])
        c = 2.0 * member[d] - 1.0
        if np.any(g != 0.0):
            gs.append(g)
            cs.append(c)
        elif c <= 0.0:
            return np.zeros(batch)  # that estimate is identically zero
        else:
            const_factor *= math.sqrt(c)
    if not gs:
        return const_factor
    amat = np.array(gs)  # one row per varying form, shared across the batch
    cvec = np.array(cs)

    def form_values(w):
        return w @ amat.T + cvec  # (B, r)

    def potential(w):
        # Infeasible rows give nan, which every comparison rejects.
        diff = w - nu
        quad = 0.5 * np.einsum("bi,bij,bj->b", diff, cov_inv, diff)
        with np.errstate(invalid="ignore", divide="ignore"):
            return quad - 0.5 * np.sum(np.log(form_values(w)), axis=1)

    w = nu.copy()
    bad = np.any(form_values(w) <= 0.0, axis=1)
    if bad.any():
        # Shift infeasible starts onto the per-form 1-d saddle targets.
        sel = np.nonzero(bad)[0]
        mu_f = form_values(nu[sel])  # (S, r)
        var_f = np.einsum("bij,ri,rj->br", cov[sel], amat, amat)
        targets = 0.5 * (mu_f + np.sqrt(mu_f**2 + 2.0 * var_f))
        # pinv: identical forms (a degenerate pair) make the Gram singular
        gram = np.einsum("ri,bij,sj->brs", amat, cov[sel], amat)
        lam = np.einsum(
            "brs,bs->br", np.linalg.pinv(gram), targets - mu_f
        )
        w[sel] = nu[sel] + np.einsum("bij,rj,br->bi", cov[sel], amat, lam)
        if np.any(form_values(w[sel]) <= 0.0):
            raise SaddleInfeasibleError(
                "no feasible interior point for the pair saddle; "
                "use exact summation"
            )

    active = np.ones(batch, dtype=bool)
    for _ in range(max_iter):
        x = form_values(w)  # (B, r)
        grad = np.einsum("bij,bj->bi", cov_inv, w - nu) - 0.5 * (1.0 / x) @ amat
        active = np.max(np.abs(grad), axis=1) >= grad_tol
        if not active.any():
            break
        hess = cov_inv + 0.5 * np.einsum(
            "br,ri,rj->bij", 1.0 / x**2, amat, amat
        )
        step = np.zeros_like(w)
        step[active] = _equilibrated_solve(hess[active], -grad[active])
        u0 = potential(w)
        t = np.where(active, 1.0, 0.0)
        for _ in range(70):
            cand = w + t[:, None] * step
            ok = np.all(form_values(cand) > 0.0, axis=1) & (
                potential(cand) <= u0 + 1e-12 * np.abs(u0)
            )
            need = active & ~ok
            if not need.any():
                break
            t[need] *= 0.5
        else:
            raise SaddleConvergenceError(
                "pair saddle line search stalled; use exact summation"
            )
        w = w + t[:, None] * step
    else:
        x = form_values(w)
        grad = np.einsum("bij,bj->bi", cov_inv, w - nu) - 0.5 * (1.0 / x) @ amat
        if np.max(np.abs(grad)) >= grad_tol:
            raise SaddleConvergenceError(
                f"pair saddle Newton did not converge in {max_iter} iterations; "
                "use exact summation"
            )
    x = form_values(w)
    hess = cov_inv + 0.5 * np.einsum("br,ri,rj->bij", 1.0 / x**2, amat, amat)
    det = np.linalg.det(np.einsum("bij,bjk->bik", cov, hess))
    assert det.min() > 0.0
    return const_factor * np.exp(-potential(w)) / np.sqrt(det)


def asymptotic_reference(mu: float, n1: int) -> tuple[float, float]:
    """Closed-form bias and standard deviation predictions for one string.

    ``mu`` is the mean eigenvalue of the doubled-copy measurement (the
    squared single-copy expectation), in [0, 1].  Above the sampling scale
    ``sigma`` a Taylor expansion of the square root gives bias
    ``-sigma^2 / (8 mu^{3/2})`` and variance ``sigma^2/(4 mu) -
    sigma^4/(64 mu^3)``; below it the clipped-Gaussian integrals give
    ``E[b_hat] -> K sqrt(sigma)`` with K = :data:`SMALL_MU_CONSTANT` and
    variance ``(1/sqrt(2 pi) - K^2) sigma``.
    """
    if not 0.0 <= mu <= 1.0:
        raise ValueError("mu must be in [0, 1]")
    sigma = math.sqrt(max(0.0, (1.0 - mu * mu)) / n1)
    if mu > sigma:
        bias = -(sigma**2) / (8.0 * mu**1.5)
        var = sigma**2 / (4.0 * mu) - sigma**4 / (64.0 * mu**3)
    else:
        bias = SMALL_MU_CONSTANT * math.sqrt(sigma) - math.sqrt(max(0.0, mu))
        var = (1.0 / math.sqrt(2.0 * math.pi) - SMALL_MU_CONSTANT**2) * sigma
    return bias, math.sqrt(max(0.0, var))


# ---------------------------------------------------------------------------
# Bias/variance assembly
# ---------------------------------------------------------------------------

_METHODS = ("exact-summation", "normal-approx", "saddle-point", "auto")


@dataclass(frozen=True)
class MomentConfig:
    """Settings for one bias/variance evaluation."""

    n1: int
    method: str = "auto"
    n2: int | None = None
    grouping: Grouping | None = None
    pair_cutoff: float = 0.0
    exact_pair_limit: int = 200

    def __post_init__(self):
        if self.n1 < 1:
            raise ValueError("n1 must be >= 1")
        if self.method not in _METHODS:
            raise ValueError(f"method must be one of {_METHODS}")
        if self.n2 is not None and self.n2 < 1:
            raise ValueError("n2 must be >= 1 when given")
        if self.pair_cutoff < 0.0:
            raise ValueError("pair_cutoff must be non-negative")


@dataclass(frozen=True)
class MomentReport:
    """Per-term moments plus the assembled bias, variance, and deviation."""

    n1: int
    n2: int | None
    e_b: np.ndarray
    e_b2: np.ndarray
    e_s: np.ndarray
    e_bb: np.ndarray
    e_ss: np.ndarray
    bias: float
    variance: float
    std: float
    bias_method: str
    variance_method: str

    def __post_init__(self):
        assert np.all(self.e_b2 >= self.e_b**2 - 1e-12), "per-term variance < 0"
        assert self.variance >= -1e-9, f"negative variance {self.variance}"


def _sign_expectations(
    h: PauliHamiltonian,
    moments,
    signs,
    config: MomentConfig,
    probs_single,
):
    """Returns (E[s_i] array, pairwise E[s_i s_j] callable, n2 used)."""
    m = h.m
    if isinstance(signs, SignVector):
        return signs.as_array().astype(float), None, None
    if signs == "exact":
        return np.where(moments.mu >= 0.0, 1.0, -1.0), None, None
    if signs != "sampled":
        raise ValueError("signs must be 'exact', 'sampled', or a SignVector")
    if config.grouping is None or config.n2 is None:
        raise ValueError("sampled-sign moments need config.grouping and config.n2")
    grouping = config.grouping
    allocation = allocate_shots(grouping, config.n2, "wds")
    group_of = np.empty(m, dtype=int)
    for g, group in enumerate(grouping.groups):
        for i in group:
            group_of[i] = g
    e_s = np.ones(m)
    for i in range(m):
        shots = allocation.counts[group_of[i]]
        if shots > 0:
            e_s[i] = exp_s_exact(moments.p[i], shots)

    def pair_ss(i: int, j: int) -> float:
        gi, gj = group_of[i], group_of[j]
        if gi != gj:
            return e_s[i] * e_s[j]
        shots = allocation.counts[gi]
        if shots == 0:
            return 1.0  # both signs default to +1 deterministically
        return exp_ss_exact(probs_single(i, j), shots)

    return e_s, pair_ss, allocation.total


def assemble_bias_variance(
    h: PauliHamiltonian,
    state: StateVector,
    signs,
    config: MomentConfig,
) -> MomentReport:
    """Assemble Bias[h_hat] and Var[h_hat] from per-term and per-pair moments.

    ``signs`` is "exact", "sampled", or a fixed :class:`SignVector`.  The
    identity constant contributes to neither bias nor variance.  Method
    "auto" uses exact summation wherever it is affordable: the bias path
    and the per-term variance diagonal at any N1 (O(N1) sums), pair
    covariances exactly up to ``exact_pair_limit`` shots and by the saddle
    point above it.  Forcing "exact-summation" beyond the pair guard
    raises :class:`ExactModeLimitError`; "saddle-point" forces the saddle
    everywhere.  Sign estimators are independent of the Bell outcomes, and
    E[s_hat^2] = 1 throughout.
    """
    if h.m == 0:
        raise ValueError("Hamiltonian has no non-identity terms")
    n1 = config.n1
    moments = pauli_moments(state, h.strings)
    gram = pair_product_expectations(state, h.strings)
    coeffs = h.coefficients
    m = h.m

    def pvec_pair(i: int, j: int) -> np.ndarray:
        return _pair_probs(moments.mu[i], moments.mu[j], float(gram[i, j].real))

    e_s, pair_ss, n2_used = _sign_expectations(
        h, moments, signs, config, pvec_pair
    )

    method = config.method
    if method == "normal-approx" and m > 1:
        raise ValueError(
            "normal-approx pair integrals are not implemented; it is retained "
            "as a single-term reference, use saddle-point or exact-summation"
        )
    exact_pairs_ok = n1 <= config.exact_pair_limit
    if method == "exact-summation" and not exact_pairs_ok and m > 1:
        raise ExactModeLimitError(
            f"exact pair summation needs N1 <= {config.exact_pair_limit}; "
            "use saddle-point (or auto) instead"
        )
    var_by_saddle = method == "saddle-point" or (
        method == "auto" and not exact_pairs_ok
    )

    # Bias path: exact per-term sums unless a pure approximation is forced.
    if method in ("exact-summation", "auto"):
        e_b = np.array([exp_b_exact(q, n1) for q in moments.q])
        e_b2 = np.array([exp_b2_exact(q, n1) for q in moments.q])
        bias_method = "exact-summation"
    elif method == "saddle-point":
        e_b = np.array([saddle_exp_b(*mu_sigma_from_q(q, n1)) for q in moments.q])
        e_b2 = np.array([saddle_exp_b2(*mu_sigma_from_q(q, n1)) for q in moments.q])
        bias_method = "saddle-point"
    else:
        e_b = np.array([normal_exp_b(*mu_sigma_from_q(q, n1)) for q in moments.q])
        e_b2 = np.array([normal_exp_b2(*mu_sigma_from_q(q, n1)) for q in moments.q])
        bias_method = "normal-approx"

    # Variance paths.  Covariances need E[b] and E[b b] from one evaluator
    # so their truncation errors cancel; the per-term diagonal stands alone
    # and uses exact sums whenever they were computed (auto mode), which
    # matters for strings whose squared expectation sits below the
    # sampling scale.
    if var_by_saddle:
        vb = np.array([saddle_exp_b(*mu_sigma_from_q(q, n1)) for q in moments.q])
        if method == "saddle-point":
            diag_b, diag_b2 = vb, np.array(
                [saddle_exp_b2(*mu_sigma_from_q(q, n1)) for q in moments.q]
            )
            variance_method = "saddle-point"
        else:
            diag_b, diag_b2 = e_b, e_b2
            variance_method = "exact+saddle"
    else:
        vb = e_b
        diag_b, diag_b2 = e_b, e_b2
        variance_method = "exact-summation"

    e_bb = np.zeros((m, m))
    np.fill_diagonal(e_bb, diag_b2)
    e_ss = np.outer(e_s, e_s) if pair_ss is None else np.ones((m, m))
    np.fill_diagonal(e_ss, 1.0)
    variance = float(np.sum(coeffs**2 * (diag_b2 - (e_s * diag_b) ** 2)))
    iu, ju = np.triu_indices(m, k=1)
    if config.pair_cutoff > 0.0:
        mask = np.abs(coeffs[iu] * coeffs[ju]) >= config.pair_cutoff
        iu, ju = iu[mask], ju[mask]
    if len(iu):
        mu2 = moments.mu**2
        rho = (gram * gram).real
        qmat = _pair_probs_batch(mu2[iu], mu2[ju], rho[iu, ju])
        if var_by_saddle:
            try:
                ebb = saddle_exp_bb_batch(qmat, n1)
            except (SaddleInfeasibleError, SaddleConvergenceError):
                ebb = _pairwise_saddle_fallback(
                    qmat, n1, iu, ju, exact_pairs_ok, config.exact_pair_limit
                )
        else:
            ebb = exp_bb_exact_batch(qmat, n1, limit=config.exact_pair_limit)
        if pair_ss is None:
            ss = e_s[iu] * e_s[ju]
        else:
            ss = np.array([pair_ss(int(i), int(j)) for i, j in zip(iu, ju)])
            e_ss[iu, ju] = e_ss[ju, iu] = ss
        e_bb[iu, ju] = e_bb[ju, iu] = ebb
        sv = e_s * vb
        variance += float(
            2.0 * np.sum(coeffs[iu] * coeffs[ju] * (ss * ebb - sv[iu] * sv[ju]))
        )

    bias = float(np.sum(coeffs * e_s * e_b) - np.sum(coeffs * moments.mu))
    return MomentReport(
        n1=n1,
        n2=n2_used,
        e_b=e_b,
        e_b2=e_b2,
        e_s=e_s,
        e_bb=e_bb,
        e_ss=e_ss,
        bias=bias,
        variance=variance,
        std=math.sqrt(max(0.0, variance)),
        bias_method=bias_method,
        variance_method=variance_method,
    )


def _pair_probs(mean_i: float, mean_j: float, cross: float) -> np.ndarray:
    probs = (
        np.array(
            [
                1.0 + mean_i + mean_j + cross,
                1.0 + mean_i - mean_j - cross,
                1.0 - mean_i + mean_j - cross,
                1.0 - mean_i - mean_j + cross,
            ]
        )
        / 4.0
    )
    return np.clip(probs, 0.0, 1.0)


def _pair_probs_batch(mean_i, mean_j, cross) -> np.ndarray:
    probs = np.stack(
        [
            1.0 + mean_i + mean_j + cross,
            1.0 + mean_i - mean_j - cross,
            1.0 - mean_i + mean_j - cross,
            1.0 - mean_i - mean_j + cross,
        ],
        axis=1,
    ) / 4.0
    return np.clip(probs, 0.0, 1.0)


def _pairwise_saddle_fallback(
    qmat, n1, iu, ju, exact_ok: bool, exact_limit: int
) -> np.ndarray:
    """Per-pair saddle with exact-summation rescue, used when a batch fails."""
    out = np.empty(len(qmat))
    for k, qvec in enumerate(qmat):
        try:
            out[k] = saddle_exp_bb(qvec, n1)
        except (SaddleInfeasibleError, SaddleConvergenceError) as exc:
            if exact_ok:
                out[k] = exp_bb_exact(qvec, n1, limit=exact_limit)
            else:
                raise type(exc)(f"terms ({iu[k]}, {ju[k]}): {exc}") from exc
    return out


def qwc_baseline_std(
    h: PauliHamiltonian,
    state: StateVector,
    grouping: Grouping,
    mode: str,
    shots: int,
) -> float:
    """Population standard deviation of the grouped conventional estimator.

    Each shot measures one QWC group in its shared basis; Y_g is the
    coefficient-weighted outcome sum of group g.  WDS spreads shots at the
    asymptotic fraction w_g, giving variance ``sum_g Var[Y_g] / w_g`` per
    shot; WRS draws the group per shot with probability w_g and reweights,
    giving ``sum_g E[Y_g^2] / w_g - (sum_g E[Y_g])^2`` per shot.
    """
    if shots < 1:
        raise ValueError("shots must be >= 1")
    if mode not in ("wds", "wrs"):
        raise ValueError(f"unknown mode {mode!r}")
    moments = pauli_moments(state, h.strings)
    gram = pair_product_expectations(state, h.strings).real
    coeffs = h.coefficients
    total = 0.0
    mean_sum = 0.0
    for g, group in enumerate(grouping.groups):
        idx = np.fromiter(group, dtype=int)
        c = coeffs[idx]
        w = grouping.weights[g]
        mean_g = float(c @ moments.mu[idx])
        e_y2 = float(c @ gram[np.ix_(idx, idx)] @ c)
        if w <= 0.0:
            raise ValueError(f"group {g} has zero weight but nonzero terms")
        if mode == "wds":
            total += max(0.0, e_y2 - mean_g**2) / w
        else:
            total += e_y2 / w
            mean_sum += mean_g
    if mode == "wrs":
        total -= mean_sum**2
    return math.sqrt(max(0.0, total) / shots)
