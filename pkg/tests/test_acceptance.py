"""Acceptance suite: one test per criterion, each printing a PASS line.

Run with ``pytest tests/test_acceptance.py -v -s`` to see the per-criterion
lines; every tolerance here is fixed, not calibrated.
"""

import itertools
import math
import time

import numpy as np
import pytest
from scipy import special

import bellsampling as bs
from bellsampling import (
    BellOutcome,
    ExperimentConfig,
    Grouping,
    MomentConfig,
    PauliString,
    StateVector,
    allocate_shots,
    assemble_bias_variance,
    exact_bell_distribution,
    exp_b2_exact,
    exp_b_exact,
    exp_bb_exact,
    exp_s_exact,
    expectation,
    fit_loglog_slope,
    ground_state,
    joint_probs_doubled,
    lambda_product,
    mu_sigma_from_q,
    qwc_grouping,
    random_state,
    run_molecular_sweep,
    run_single_pauli_sweep,
    saddle_exp_b,
    saddle_exp_b2,
    saddle_exp_bb,
)

from conftest import load_fixture
from oracles import brute_bell_distribution


def _report(number: int, message: str) -> None:
    print(f"[criterion {number:02d}] PASS: {message}")


def test_criterion_01_single_string_scaling_regimes():
    start = time.monotonic()
    grid_small = bs.default_n1_grid(100, 1_000_000, 4)
    rows = run_single_pauli_sweep([0.0], grid_small, methods=("exact",))
    bias0 = [abs(r["bias"]) for r in rows]
    std0 = [r["std"] for r in rows]
    slope_bias0 = fit_loglog_slope(grid_small, bias0)
    slope_std0 = fit_loglog_slope(grid_small, std0)
    assert slope_bias0 == pytest.approx(-0.25, abs=0.05)
    assert slope_std0 == pytest.approx(-0.25, abs=0.05)

    grid_large = bs.default_n1_grid(1000, 1_000_000, 4)
    rows9 = run_single_pauli_sweep([0.9], grid_large, methods=("exact",))
    slope_bias9 = fit_loglog_slope(grid_large, [abs(r["bias"]) for r in rows9])
    slope_std9 = fit_loglog_slope(grid_large, [r["std"] for r in rows9])
    assert slope_bias9 == pytest.approx(-1.0, abs=0.1)
    assert slope_std9 == pytest.approx(-0.5, abs=0.05)
    elapsed = time.monotonic() - start
    assert elapsed < 60.0
    _report(
        1,
        f"slopes mu=0 bias {slope_bias0:+.3f}, std {slope_std0:+.3f}; "
        f"mu=0.9 bias {slope_bias9:+.3f}, std {slope_std9:+.3f} in {elapsed:.1f}s",
    )


def test_criterion_02_small_mu_constant():
    n1 = 10**6
    sigma = math.sqrt(1.0 / n1)  # q = 1/2 at mu = 0
    value = exp_b_exact(0.5, n1) / math.sqrt(sigma)
    constant = float(special.gamma(0.75) / (2.0**0.75 * math.sqrt(math.pi)))
    assert constant == pytest.approx(0.4111, abs=5e-5)
    assert value == pytest.approx(constant, rel=0.02)
    _report(2, f"E[b]/sqrt(sigma) = {value:.5f} vs {constant:.5f} (within 2%)")


def test_criterion_03_saddle_vs_summation(rng):
    n1 = 10_000
    worst = 0.0
    for q in (0.55, 0.7, 0.9, 0.99):
        mu, sigma = mu_sigma_from_q(q, n1)
        err_b = abs(saddle_exp_b(mu, sigma) / exp_b_exact(q, n1) - 1.0)
        err_b2 = abs(saddle_exp_b2(mu, sigma) / exp_b2_exact(q, n1) - 1.0)
        assert err_b < 0.01 and err_b2 < 0.01
        worst = max(worst, err_b, err_b2)

    # pair moments at N1 = 100 on random 3-qubit states, restricted to
    # pairs whose marginal means clear the sampling scale by 3x (the
    # feasibility margin under which the interior saddle is meaningful)
    n1 = 100
    strings = [PauliString(3, x, z) for x in range(8) for z in range(8)][1:]
    checked = 0
    worst_pair = 0.0
    for _ in range(6):
        amps = np.zeros(8, complex)
        amps[int(rng.integers(0, 8))] = 1.0
        amps += 0.2 * (rng.standard_normal(8) + 1j * rng.standard_normal(8))
        state = StateVector(3, amps / np.linalg.norm(amps))
        good = []
        for p in strings:
            mu, sigma = mu_sigma_from_q((1.0 + expectation(state, p) ** 2) / 2.0, n1)
            if sigma == 0.0 or mu / sigma >= 3.0:
                good.append(p)
        pairs = list(itertools.combinations(good, 2))
        rng.shuffle(pairs)
        for pi, pj in pairs[:8]:
            qvec = joint_probs_doubled(state, pi, pj)
            exact = exp_bb_exact(qvec, n1)
            err = abs(saddle_exp_bb(qvec, n1) / exact - 1.0)
            assert err < 0.02
            worst_pair = max(worst_pair, err)
            checked += 1
    assert checked >= 30
    _report(
        3,
        f"per-term worst {worst:.2e} (<1%), pair worst {worst_pair:.2e} "
        f"over {checked} pairs (<2%)",
    )


def test_criterion_04_monte_carlo_vs_analytic():
    rng = np.random.default_rng(515)
    q, n1, trials = 0.7, 50, 100_000
    counts = rng.binomial(n1, q, size=trials)
    b_hat = np.sqrt(np.clip(2.0 * counts / n1 - 1.0, 0.0, None))
    exact_mean = exp_b_exact(q, n1)
    exact_std = math.sqrt(exp_b2_exact(q, n1) - exact_mean**2)
    se_mean = b_hat.std(ddof=1) / math.sqrt(trials)
    se_std = b_hat.std(ddof=1) / math.sqrt(2.0 * (trials - 1))
    assert abs(b_hat.mean() - exact_mean) < 3.0 * se_mean
    assert abs(b_hat.std(ddof=1) - exact_std) < 3.0 * se_std

    p, n2 = 0.75, 3
    expected = 0.6875  # 1 - 2*(0.25^3 + 3*0.75*0.25^2)
    assert exp_s_exact(p, n2) == pytest.approx(expected, abs=1e-12)
    votes = rng.binomial(n2, p, size=trials)
    signs = np.where(2 * votes > n2, 1.0, -1.0)
    se_sign = signs.std(ddof=1) / math.sqrt(trials)
    assert abs(signs.mean() - expected) < 3.0 * se_sign
    _report(
        4,
        f"b_hat mean/std within 3 SE at (q=0.7, N1=50); "
        f"E[s] -> {signs.mean():.4f} vs 0.6875",
    )


def test_criterion_05_sampler_distribution_and_lambda():
    rng = np.random.default_rng(99)
    states = 0
    worst_tv = 0.0
    worst_lambda = 0.0
    for n in (1, 2, 3):
        for _ in range(7 if n < 3 else 6):
            state = random_state(n, rng)
            analytic = exact_bell_distribution(state)
            brute = brute_bell_distribution(state.amplitudes, n)
            tv = 0.5 * float(np.abs(analytic - brute).sum())
            assert tv < 1e-10
            worst_tv = max(worst_tv, tv)
            for x, z in itertools.product(range(1 << n), repeat=2):
                p = PauliString(n, x, z)
                mean = sum(
                    analytic[a, b] * lambda_product(p, BellOutcome(n, a, b))
                    for a in range(1 << n)
                    for b in range(1 << n)
                )
                gap = abs(mean - expectation(state, p) ** 2)
                assert gap < 1e-10
                worst_lambda = max(worst_lambda, gap)
            states += 1
    assert states == 20
    _report(
        5,
        f"20 states: worst TV {worst_tv:.1e}, worst |E[lambda]-mu^2| "
        f"{worst_lambda:.1e}",
    )


def test_criterion_06_fixture_fidelity():
    expected = {
        "h2.ham": (4, 15, 5),
        "h4.ham": (8, 185, 75),
        "h6.ham": (12, 919, 329),
        "lih.ham": (12, 631, 178),
    }
    summary = []
    for name, (qubits, terms, ref_groups) in expected.items():
        h = load_fixture(name)
        assert h.n == qubits
        assert h.m + 1 == terms  # constant term counts as the identity string
        groups = qwc_grouping(h).n_groups
        assert groups <= math.floor(1.1 * ref_groups)
        summary.append(f"{name.split('.')[0]}:{terms}t/{groups}g")
    _report(6, "; ".join(summary) + " (counts exact, groups within +10%)")


def test_criterion_07_h2_end_to_end():
    start = time.monotonic()
    config = ExperimentConfig(
        hamiltonian_path=str(bs.fixture_path("h2.ham")),
        sign_mode="exact",
        n1_grid=bs.default_n1_grid(100, 1_000_000, 4),
        method="auto",
    )
    rows, _ = run_molecular_sweep(config)
    for row in rows:
        if row.n1 >= 1000:
            assert row.bias < 0.1 * row.std
        assert row.std <= 3.0 * row.qwc_wds_std
    elapsed = time.monotonic() - start
    assert elapsed < 300.0
    ratios = [row.std / row.qwc_wds_std for row in rows]
    _report(
        7,
        f"|bias| < 0.1 std for N1 >= 1e3; std/wds in "
        f"[{min(ratios):.2f}, {max(ratios):.2f}] (<3) in {elapsed:.0f}s",
    )


def test_criterion_08_h4_crossover():
    config = ExperimentConfig(
        hamiltonian_path=str(bs.fixture_path("h4.ham")),
        sign_mode="exact",
        n1_grid=bs.default_n1_grid(1000, 100_000, 4),
        method="auto",
    )
    rows, _ = run_molecular_sweep(config)
    hits = [
        row.n1
        for row in rows
        if row.bias + row.std <= row.qwc_wds_std
        and 0.010 <= row.bias + row.std <= 0.030
    ]
    assert hits, "no sweep point beats the WDS baseline inside 10-30 mHa"
    _report(8, f"Bell <= QWC-WDS with total error in [10, 30] mHa at N1 in {hits}")


def test_criterion_09_h4_sampled_signs():
    start = time.monotonic()
    config = ExperimentConfig(
        hamiltonian_path=str(bs.fixture_path("h4.ham")),
        sign_mode="sampled",
        method="mc",
        trials=128,
        n2_ratio=5.0,
        grouping_mode="wds",
        n1_grid=bs.default_n1_grid(100, 10_000, 4),
        seed=2024,
    )
    rows, _ = run_molecular_sweep(config)
    coarse = [row for row in rows if row.bias + row.std >= 0.1]
    assert len(coarse) >= 3, "sweep must reach the coarse-accuracy region"
    for row in coarse:
        assert row.bias + row.std <= row.qwc_wds_std
    elapsed = time.monotonic() - start
    assert elapsed < 1800.0
    _report(
        9,
        f"Bell beats QWC-WDS at all {len(coarse)} grid points with error "
        f">= 0.1 Ha ({config.trials} trials, N2 = 5 N1) in {elapsed:.0f}s",
    )


def test_reduced_grid_h6_lih_sweeps():
    """Spec note: the 12-qubit sweeps run at reduced grids (N1 <= 1e5) with
    the criteria-7/8 style qualitative assertions; the full figures extend
    to N1 = 1e7 and are reproducible but slow."""
    summary = []
    for name, window_hit_expected in (("h6.ham", False), ("lih.ham", True)):
        config = ExperimentConfig(
            hamiltonian_path=str(bs.fixture_path(name)),
            sign_mode="exact",
            n1_grid=(1000, 3162, 10_000, 31_623, 100_000),
            method="auto",
        )
        rows, meta = run_molecular_sweep(config)
        assert all(np.isfinite(r.std) and r.std > 0 for r in rows)
        # Bell deviation stays within a small factor of the grouped baseline
        assert all(r.std <= 3.0 * r.qwc_wds_std for r in rows)
        beats = [r for r in rows if r.bias + r.std <= r.qwc_wds_std]
        assert beats, f"{name}: no grid point beats the WDS baseline"
        if window_hit_expected:
            assert any(0.010 <= r.bias + r.std <= 0.030 for r in beats)
        coarsest = beats[0]
        summary.append(
            f"{name.split('.')[0]}: beats at N1={coarsest.n1} "
            f"(total {coarsest.bias + coarsest.std:.3f} Ha)"
        )
    _report(0, "reduced-grid 12-qubit sweeps: " + "; ".join(summary))


def test_criterion_10_sign_pipeline_invariants():
    rng = np.random.default_rng(7171)
    # odd-shot majorities cannot tie
    for _ in range(200):
        n2 = int(rng.integers(0, 60)) * 2 + 1
        outcomes = rng.choice([-1, 1], size=n2)
        assert outcomes.sum() != 0
        assert (1 if outcomes.sum() > 0 else -1) ** 2 == 1  # E[s^2] = 1
    # WDS allocation determinism and budget accounting on random weights
    shaved = 0
    for _ in range(1000):
        k = int(rng.integers(2, 10))
        weights = rng.dirichlet(np.ones(k))
        weights = weights / weights.sum()
        grouping = Grouping(tuple((i,) for i in range(k)), tuple(weights))
        n2 = int(rng.integers(3, 500))
        first = allocate_shots(grouping, n2, "wds")
        second = allocate_shots(grouping, n2, "wds")
        assert first.counts == second.counts
        assert all(c == 0 or c % 2 == 1 for c in first.counts)
        from bellsampling.signs import largest_remainder

        nominal = np.zeros(k, dtype=int)
        shares = n2 * np.asarray(weights)
        eligible = shares >= 1.0
        if not eligible.any():
            eligible[int(np.argmax(weights))] = True
        nominal[eligible] = largest_remainder(np.asarray(weights)[eligible], n2)
        evens = int(np.sum((nominal > 0) & (nominal % 2 == 0)))
        expected_total = n2 if evens % 2 == 0 else n2 - 1
        assert first.total == expected_total
        shaved += int(first.total == n2 - 1)
    _report(
        10,
        f"no odd-shot ties; E[s^2] = 1; 1000 WDS allocations deterministic, "
        f"total preserved except the {shaved} odd-parity cases (one shot shaved)",
    )
