"""Sweep drivers that turn the estimators into reproducible CSV data.

Three experiment families: single-string sweeps over the expectation value
mu (no state needed, the moments depend on mu alone), molecular sweeps with
exact/oracle/sampled signs, and grouped-baseline sweeps.  Every run is
deterministic for a fixed seed, including the Monte Carlo pipeline, whose
per-trial seeds are spawned from one root seed.
"""

from __future__ import annotations

import csv
import io
import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass

import numpy as np

from .bell import estimate_abs_many, sample_bell_outcomes
from .moments import (
    MomentConfig,
    assemble_bias_variance,
    exp_b2_exact,
    exp_b_exact,
    mu_sigma_from_q,
    normal_exp_b,
    normal_exp_b2,
    qwc_baseline_std,
    saddle_exp_b,
    saddle_exp_b2,
)
from .paulis import Grouping, PauliHamiltonian, parse_hamiltonian, qwc_grouping
from .signs import allocate_shots, load_sign_oracle, sample_signs
from .states import StateVector, ground_state

__all__ = [
    "KCAL_PER_MOL_HARTREE",
    "ExperimentConfig",
    "SweepRow",
    "default_n1_grid",
    "fit_loglog_slope",
    "run_single_pauli_sweep",
    "run_molecular_sweep",
    "run_baseline_sweep",
    "simulate_energy_trials",
    "emit_report",
]

#: Chemical-accuracy reference line: 1 kcal/mol in Hartree.
KCAL_PER_MOL_HARTREE = 1.6e-3

SINGLE_PAULI_FIELDS = ("mu", "n1", "method", "e_b", "bias", "std")
MOLECULE_FIELDS = (
    "n1",
    "n2",
    "bias",
    "bias_sign",
    "std",
    "qwc_wds_std",
    "qwc_wrs_std",
    "method",
)
BASELINE_FIELDS = ("n1", "qwc_wds_std", "qwc_wrs_std")


def default_n1_grid(
    lo: int = 10, hi: int = 10_000_000, per_decade: int = 4
) -> tuple[int, ...]:
    """Logarithmic shot grid, `per_decade` points per decade of N1."""
    grid = []
    k = 0
    while True:
        value = int(round(10 ** (math.log10(lo) + k / per_decade)))
        if value > hi:
            break
        if not grid or value > grid[-1]:
            grid.append(value)
        k += 1
    return tuple(grid)


def fit_loglog_slope(n1s, values) -> float:
    """Least-squares slope of log10|values| against log10(n1s)."""
    x = np.log10(np.asarray(n1s, dtype=float))
    with np.errstate(divide="ignore"):
        y = np.log10(np.abs(np.asarray(values, dtype=float)))
    if not np.all(np.isfinite(y)):
        raise ValueError("slope fit needs nonzero values")
    return float(np.polyfit(x, y, 1)[0])


@dataclass(frozen=True)
class ExperimentConfig:
    """Configuration of one molecular sweep."""

    hamiltonian_path: str
    sign_mode: str = "exact"  # "exact" | "oracle" | "sampled"
    oracle_path: str | None = None
    n1_grid: tuple[int, ...] = ()
    n2_ratio: float = 5.0
    grouping_mode: str = "wds"
    method: str = "auto"  # "auto" | "exact" | "saddle" | "mc"
    trials: int = 1000
    seed: int = 0
    pair_cutoff: float = 0.0

    def __post_init__(self):
        grid = tuple(int(v) for v in self.n1_grid) or default_n1_grid()
        if any(v < 1 for v in grid) or any(
            b <= a for a, b in zip(grid, grid[1:])
        ):
            raise ValueError("n1 grid must be strictly increasing positive integers")
        object.__setattr__(self, "n1_grid", grid)
        if self.sign_mode not in ("exact", "oracle", "sampled"):
            raise ValueError(f"unknown sign mode {self.sign_mode!r}")
        if self.sign_mode == "oracle" and not self.oracle_path:
            raise ValueError("oracle sign mode needs an oracle path")
        if self.method not in ("auto", "exact", "saddle", "mc"):
            raise ValueError(f"unknown method {self.method!r}")
        if self.sign_mode == "sampled" and self.method != "mc":
            raise ValueError("sampled signs are simulated; use method='mc'")
        if self.method == "mc" and self.trials < 1:
            raise ValueError("Monte Carlo needs trials >= 1")
        if self.grouping_mode not in ("wds", "wrs"):
            raise ValueError(f"unknown grouping mode {self.grouping_mode!r}")
        if self.n2_ratio <= 0.0:
            raise ValueError("n2 ratio must be positive")


@dataclass(frozen=True)
class SweepRow:
    n1: int
    n2: int
    bias: float
    bias_sign: str
    std: float
    qwc_wds_std: float
    qwc_wrs_std: float
    method: str

    def __post_init__(self):
        assert self.std >= 0.0 and self.qwc_wds_std >= 0.0 and self.qwc_wrs_std >= 0.0


def run_single_pauli_sweep(mus, n1_grid, methods=("exact",)) -> list[dict]:
    """Bias/std of a single-string estimate for each mu, N1, and method.

    No quantum state is involved: the moments are functions of
    mu = <psi|P|psi> alone.  The sign is taken as known (sign of mu).
    """
    rows = []
    for mu in mus:
        if not -1.0 <= mu <= 1.0:
            raise ValueError(f"mu must be in [-1, 1], got {mu}")
        q = (1.0 + mu * mu) / 2.0
        sign = 1.0 if mu >= 0.0 else -1.0
        for n1 in n1_grid:
            for method in methods:
                if method == "exact":
                    e_b = exp_b_exact(q, n1)
                    e_b2 = exp_b2_exact(q, n1)
                elif method == "saddle":
                    e_b = saddle_exp_b(*mu_sigma_from_q(q, n1))
                    e_b2 = saddle_exp_b2(*mu_sigma_from_q(q, n1))
                elif method == "normal":
                    e_b = normal_exp_b(*mu_sigma_from_q(q, n1))
                    e_b2 = normal_exp_b2(*mu_sigma_from_q(q, n1))
                else:
                    raise ValueError(f"unknown method {method!r}")
                rows.append(
                    {
                        "mu": float(mu),
                        "n1": int(n1),
                        "method": method,
                        "e_b": e_b,
                        "bias": sign * e_b - mu,
                        "std": math.sqrt(max(0.0, e_b2 - e_b * e_b)),
                    }
                )
    return rows


def _load_problem(config: ExperimentConfig):
    with open(config.hamiltonian_path, encoding="utf-8") as fh:
        h = parse_hamiltonian(fh.read())
    energy, state = ground_state(h)
    grouping = qwc_grouping(h)
    signs = None
    if config.sign_mode == "oracle":
        with open(config.oracle_path, encoding="utf-8") as fh:
            signs = load_sign_oracle(fh.read(), h)
    return h, state, energy, grouping, signs


def run_molecular_sweep(config: ExperimentConfig) -> tuple[list[SweepRow], dict]:
    """One SweepRow per N1 for a molecular fixture.

    Exact/oracle signs go through the analytic moment engine; sampled signs
    run the full Monte Carlo pipeline (Bell batch, shot allocation, group
    measurements, majority vote) with N2 = round(n2_ratio * N1) and compare
    against the exact ground-state energy.  The grouped baselines are
    always evaluated at 2*N1 state preparations, matching the two copies
    per Bell shot.
    """
    h, state, energy, grouping, oracle = _load_problem(config)
    workers = int(os.environ.get("BELLSAMPLING_WORKERS", "1"))
    rows = []
    root = np.random.SeedSequence(config.seed)
    for n1 in config.n1_grid:
        wds = qwc_baseline_std(h, state, grouping, "wds", 2 * n1)
        wrs = qwc_baseline_std(h, state, grouping, "wrs", 2 * n1)
        if config.sign_mode == "sampled":
            n2 = int(round(config.n2_ratio * n1))
            trial_seed = int(root.spawn(1)[0].generate_state(1)[0])
            estimates = simulate_energy_trials(
                h,
                state,
                grouping,
                n1=n1,
                n2=n2,
                allocation_mode=config.grouping_mode,
                trials=config.trials,
                seed=trial_seed,
                workers=workers,
            )
            bias = float(estimates.mean() - energy)
            std = float(estimates.std(ddof=1)) if len(estimates) > 1 else 0.0
            method_tag = f"mc:{config.trials}"
        else:
            signs = oracle if config.sign_mode == "oracle" else "exact"
            method = {"auto": "auto", "exact": "exact-summation", "saddle": "saddle-point"}[
                config.method if config.method != "mc" else "auto"
            ]
            report = assemble_bias_variance(
                h,
                state,
                signs,
                MomentConfig(n1=n1, method=method, pair_cutoff=config.pair_cutoff),
            )
            bias, std = report.bias, report.std
            n2 = 0
            method_tag = report.variance_method
        rows.append(
            SweepRow(
                n1=int(n1),
                n2=int(n2),
                bias=abs(bias),
                bias_sign="+" if bias >= 0.0 else "-",
                std=std,
                qwc_wds_std=wds,
                qwc_wrs_std=wrs,
                method=method_tag,
            )
        )
    meta = {
        "config": asdict(config),
        "ground_energy": energy,
        "n_terms": h.m,
        "n_groups": grouping.n_groups,
        "kcal_per_mol_hartree": KCAL_PER_MOL_HARTREE,
    }
    return rows, meta


def run_baseline_sweep(hamiltonian_path: str, n1_grid) -> tuple[list[dict], dict]:
    """Grouped-baseline deviations alone, at 2*N1 state preparations."""
    with open(hamiltonian_path, encoding="utf-8") as fh:
        h = parse_hamiltonian(fh.read())
    energy, state = ground_state(h)
    grouping = qwc_grouping(h)
    rows = [
        {
            "n1": int(n1),
            "qwc_wds_std": qwc_baseline_std(h, state, grouping, "wds", 2 * n1),
            "qwc_wrs_std": qwc_baseline_std(h, state, grouping, "wrs", 2 * n1),
        }
        for n1 in n1_grid
    ]
    meta = {
        "hamiltonian": hamiltonian_path,
        "ground_energy": energy,
        "n_groups": grouping.n_groups,
        "kcal_per_mol_hartree": KCAL_PER_MOL_HARTREE,
    }
    return rows, meta


def _energy_trial(
    h: PauliHamiltonian,
    state: StateVector,
    grouping: Grouping,
    n1: int,
    n2: int,
    allocation_mode: str,
    seed_seq: np.random.SeedSequence,
) -> float:
    bell_seed, alloc_seed, sign_seed = (
        int(s.generate_state(1)[0]) for s in seed_seq.spawn(3)
    )
    batch = sample_bell_outcomes(state, n1, bell_seed)
    _, b_hat = estimate_abs_many(batch, h.strings)
    allocation = allocate_shots(grouping, n2, allocation_mode, seed=alloc_seed)
    signs = sample_signs(state, h, grouping, allocation, sign_seed)
    return float(h.constant + np.sum(h.coefficients * signs.as_array() * b_hat))


def _trial_chunk(args) -> list[float]:
    h, state, grouping, n1, n2, mode, seeds = args
    return [
        _energy_trial(h, state, grouping, n1, n2, mode, s) for s in seeds
    ]


def simulate_energy_trials(
    h: PauliHamiltonian,
    state: StateVector,
    grouping: Grouping,
    *,
    n1: int,
    n2: int,
    allocation_mode: str = "wds",
    trials: int,
    seed: int,
    workers: int = 1,
) -> np.ndarray:
    """Monte Carlo energy estimates from the full two-copy pipeline.

    Each trial samples a Bell batch of N1 shots for the absolute values and
    N2 grouped shots for the signs, then forms
    ``constant + sum_i c_i s_hat_i b_hat_i``.  Trials are independent with
    spawned seeds, so the result is identical for any worker count.
    """
    seqs = np.random.SeedSequence(seed).spawn(trials)
    if workers <= 1 or trials < 4:
        values = [
            _energy_trial(h, state, grouping, n1, n2, allocation_mode, s)
            for s in seqs
        ]
        return np.array(values)
    chunks = np.array_split(np.arange(trials), min(workers * 4, trials))
    payloads = [
        (h, state, grouping, n1, n2, allocation_mode, [seqs[i] for i in chunk])
        for chunk in chunks
        if len(chunk)
    ]
    values: list[float] = []
    with ProcessPoolExecutor(max_workers=workers) as pool:
        for part in pool.map(_trial_chunk, payloads):
            values.extend(part)
    return np.array(values)


def _format_cell(value) -> str:
    if isinstance(value, bool):
        return str(value)
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return f"{float(value):.17e}"
    return str(value)


def emit_report(rows, fieldnames, path: str, sidecar: dict | None = None) -> None:
    """Write rows as CSV (full-precision floats) plus a JSON sidecar.

    Rows may be dataclasses or dicts.  Reruns with identical inputs produce
    byte-identical files; the sidecar records the configuration and seed.
    """
    if not rows:
        raise ValueError("no rows to emit")
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(fieldnames)
    for row in rows:
        record = row if isinstance(row, dict) else asdict(row)
        writer.writerow([_format_cell(record[name]) for name in fieldnames])
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(buf.getvalue())
    if sidecar is not None:
        with open(path + ".json", "w", encoding="utf-8") as fh:
            json.dump(sidecar, fh, indent=2, sort_keys=True)
            fh.write("\n")
