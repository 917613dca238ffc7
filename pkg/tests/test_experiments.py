import json
import math
from pathlib import Path

import numpy as np
import pytest

from bellsampling import (
    ExperimentConfig,
    MomentConfig,
    assemble_bias_variance,
    default_n1_grid,
    emit_report,
    expectation,
    fit_loglog_slope,
    fixture_path,
    ground_state,
    parse_hamiltonian,
    run_baseline_sweep,
    run_molecular_sweep,
    run_single_pauli_sweep,
)
from bellsampling.cli import main as cli_main
from bellsampling.experiments import MOLECULE_FIELDS, SINGLE_PAULI_FIELDS

TOY = "qubits 3\n0.6 Z0\n0.4 X0 X1\n0.2 Z1 Z2\n-0.35\n"


@pytest.fixture
def toy_path(tmp_path):
    path = tmp_path / "toy.ham"
    path.write_text(TOY)
    return str(path)


class TestGridAndSlope:
    def test_default_grid(self):
        grid = default_n1_grid()
        assert grid[0] == 10 and grid[-1] == 10_000_000
        assert all(b > a for a, b in zip(grid, grid[1:]))
        # four points per decade
        assert sum(1 for v in grid if 100 <= v < 1000) == 4

    def test_slope_fit_recovers_power_law(self):
        n1 = np.array(default_n1_grid(100, 100_000, 4))
        values = 3.7 * n1 ** (-0.5)
        assert fit_loglog_slope(n1, values) == pytest.approx(-0.5, abs=1e-12)

    def test_slope_fit_rejects_zeros(self):
        with pytest.raises(ValueError):
            fit_loglog_slope([10, 100], [0.0, 1.0])


class TestSinglePauliSweep:
    def test_saturated_mu_is_exact(self):
        rows = run_single_pauli_sweep([1.0], [10, 100], methods=("exact",))
        for row in rows:
            assert row["bias"] == pytest.approx(0.0, abs=1e-14)
            assert row["std"] == pytest.approx(0.0, abs=1e-14)

    def test_negative_mu_symmetry(self):
        plus = run_single_pauli_sweep([0.5], [50], methods=("exact",))[0]
        minus = run_single_pauli_sweep([-0.5], [50], methods=("exact",))[0]
        assert minus["bias"] == pytest.approx(-plus["bias"], abs=1e-14)
        assert minus["std"] == pytest.approx(plus["std"], abs=1e-14)

    def test_methods_agree_at_large_n1(self):
        rows = run_single_pauli_sweep(
            [0.9], [100_000], methods=("exact", "saddle", "normal")
        )
        stds = {row["method"]: row["std"] for row in rows}
        assert stds["saddle"] == pytest.approx(stds["exact"], rel=1e-3)
        assert stds["normal"] == pytest.approx(stds["exact"], rel=1e-3)

    def test_mu_out_of_range(self):
        with pytest.raises(ValueError):
            run_single_pauli_sweep([1.5], [10])

    def test_bias_slope_transition_at_half(self):
        # mu = 0.5: the clipped regime at the smallest shot counts gives a
        # shallow bias slope that steepens to -1 once fluctuations drop
        # below the mean eigenvalue
        early = default_n1_grid(10, 100, 4)
        late = default_n1_grid(100_000, 10_000_000, 4)
        bias_early = [abs(r["bias"]) for r in run_single_pauli_sweep([0.5], early)]
        bias_late = [abs(r["bias"]) for r in run_single_pauli_sweep([0.5], late)]
        first_step = math.log10(bias_early[1] / bias_early[0]) / math.log10(
            early[1] / early[0]
        )
        late_slope = fit_loglog_slope(late, bias_late)
        assert first_step > -0.6
        assert late_slope == pytest.approx(-1.0, abs=0.1)
        assert first_step > late_slope + 0.15


class TestEmitReport:
    def test_single_row_two_lines(self, tmp_path):
        out = tmp_path / "r.csv"
        emit_report(
            [{"mu": 0.5, "n1": 10, "method": "exact", "e_b": 0.1, "bias": 0.0, "std": 1.0}],
            SINGLE_PAULI_FIELDS,
            str(out),
        )
        lines = out.read_text().splitlines()
        assert len(lines) == 2
        assert lines[0] == "mu,n1,method,e_b,bias,std"

    def test_deterministic_bytes_and_sidecar(self, toy_path, tmp_path):
        config = ExperimentConfig(
            hamiltonian_path=toy_path,
            sign_mode="sampled",
            method="mc",
            trials=50,
            n1_grid=(20, 40),
            seed=7,
        )
        blobs = []
        for name in ("a.csv", "b.csv"):
            rows, meta = run_molecular_sweep(config)
            out = tmp_path / name
            emit_report(rows, MOLECULE_FIELDS, str(out), sidecar=meta)
            blobs.append(out.read_bytes())
        assert blobs[0] == blobs[1]
        sidecar = json.loads((tmp_path / "b.csv.json").read_text())
        assert sidecar["kcal_per_mol_hartree"] == pytest.approx(1.6e-3)
        assert sidecar["config"]["seed"] == 7

    def test_round_trip_parses(self, toy_path, tmp_path):
        config = ExperimentConfig(
            hamiltonian_path=toy_path, n1_grid=(50, 100), method="auto"
        )
        rows, meta = run_molecular_sweep(config)
        out = tmp_path / "sweep.csv"
        emit_report(rows, MOLECULE_FIELDS, str(out), sidecar=meta)
        lines = out.read_text().splitlines()
        assert len(lines) == 3
        header = lines[0].split(",")
        record = dict(zip(header, lines[1].split(",")))
        assert float(record["std"]) == pytest.approx(rows[0].std)
        assert int(record["n1"]) == rows[0].n1
        assert record["bias_sign"] in "+-"

    def test_empty_rows_rejected(self, tmp_path):
        with pytest.raises(ValueError):
            emit_report([], SINGLE_PAULI_FIELDS, str(tmp_path / "x.csv"))


class TestConfigValidation:
    def test_grid_must_increase(self, toy_path):
        with pytest.raises(ValueError, match="increasing"):
            ExperimentConfig(hamiltonian_path=toy_path, n1_grid=(10, 10))

    def test_sampled_requires_mc(self, toy_path):
        with pytest.raises(ValueError, match="mc"):
            ExperimentConfig(
                hamiltonian_path=toy_path, sign_mode="sampled", method="auto"
            )

    def test_oracle_needs_path(self, toy_path):
        with pytest.raises(ValueError, match="oracle"):
            ExperimentConfig(hamiltonian_path=toy_path, sign_mode="oracle")

    def test_mc_trials_positive(self, toy_path):
        with pytest.raises(ValueError, match="trials"):
            ExperimentConfig(
                hamiltonian_path=toy_path, sign_mode="sampled", method="mc", trials=0
            )


class TestMolecularSweep:
    def test_monte_carlo_converges_to_exact(self, toy_path):
        analytic = run_molecular_sweep(
            ExperimentConfig(
                hamiltonian_path=toy_path, n1_grid=(30,), method="exact"
            )
        )[0][0]
        mc = run_molecular_sweep(
            ExperimentConfig(
                hamiltonian_path=toy_path,
                sign_mode="sampled",
                method="mc",
                trials=4000,
                n2_ratio=400.0,  # effectively exact signs
                n1_grid=(30,),
                seed=11,
            )
        )[0][0]
        se_mean = mc.std / math.sqrt(4000)
        se_std = mc.std / math.sqrt(2 * 3999)
        signed_analytic = analytic.bias if analytic.bias_sign == "+" else -analytic.bias
        signed_mc = mc.bias if mc.bias_sign == "+" else -mc.bias
        assert abs(signed_mc - signed_analytic) < 5 * se_mean
        assert abs(mc.std - analytic.std) < 5 * se_std

    def test_oracle_mode_matches_exact_when_oracle_is_exact(self, toy_path, tmp_path):
        h = parse_hamiltonian(Path(toy_path).read_text())
        _, state = ground_state(h)
        lines = [f"qubits {h.n}"]
        for _, p in h.terms:
            lines.append(f"{p} {expectation(state, p)!r}")
        oracle = tmp_path / "toy.signs"
        oracle.write_text("\n".join(lines) + "\n")
        base = ExperimentConfig(hamiltonian_path=toy_path, n1_grid=(100,))
        with_oracle = ExperimentConfig(
            hamiltonian_path=toy_path,
            sign_mode="oracle",
            oracle_path=str(oracle),
            n1_grid=(100,),
        )
        r_exact = run_molecular_sweep(base)[0][0]
        r_oracle = run_molecular_sweep(with_oracle)[0][0]
        assert r_oracle.bias == pytest.approx(r_exact.bias, abs=1e-14)
        assert r_oracle.std == pytest.approx(r_exact.std, abs=1e-14)

    def test_oracle_mismatch_rejected(self, toy_path, tmp_path):
        oracle = tmp_path / "bad.signs"
        oracle.write_text("qubits 3\nZ0 0.5\n")
        config = ExperimentConfig(
            hamiltonian_path=toy_path,
            sign_mode="oracle",
            oracle_path=str(oracle),
            n1_grid=(10,),
        )
        with pytest.raises(Exception, match="missing"):
            run_molecular_sweep(config)

    def test_baseline_sweep(self, toy_path):
        rows, meta = run_baseline_sweep(toy_path, (100, 200))
        assert rows[0]["qwc_wds_std"] > rows[1]["qwc_wds_std"]
        assert meta["n_groups"] >= 2

    def test_h4_cisd_oracle_worsens_bias_not_std(self):
        # wrong oracle signs add bias but leave the deviation structure alone
        ham = str(fixture_path("h4.ham"))
        signs = str(fixture_path("h4.signs"))
        exact = run_molecular_sweep(
            ExperimentConfig(hamiltonian_path=ham, n1_grid=(10_000,))
        )[0][0]
        oracle = run_molecular_sweep(
            ExperimentConfig(
                hamiltonian_path=ham,
                sign_mode="oracle",
                oracle_path=signs,
                n1_grid=(10_000,),
            )
        )[0][0]
        assert oracle.bias >= exact.bias
        assert oracle.std == pytest.approx(exact.std, rel=0.2)


class TestCli:
    def test_single_pauli_writes_files(self, tmp_path):
        out = tmp_path / "sp.csv"
        code = cli_main(
            [
                "single-pauli",
                "--mu",
                "0,0.9",
                "--n1-grid",
                "10,100",
                "--method",
                "exact,saddle",
                "--out",
                str(out),
            ]
        )
        assert code == 0
        assert out.exists() and Path(str(out) + ".json").exists()
        assert len(out.read_text().splitlines()) == 1 + 2 * 2 * 2

    def test_molecule_subcommand(self, toy_path, tmp_path):
        out = tmp_path / "mol.csv"
        code = cli_main(
            [
                "molecule",
                "--hamiltonian",
                toy_path,
                "--signs",
                "exact",
                "--n1-grid",
                "50,100",
                "--out",
                str(out),
            ]
        )
        assert code == 0
        assert len(out.read_text().splitlines()) == 3

    def test_baseline_subcommand(self, toy_path, tmp_path):
        out = tmp_path / "base.csv"
        assert cli_main(
            ["baseline", "--hamiltonian", toy_path, "--n1-grid", "64", "--out", str(out)]
        ) == 0
        assert out.read_text().startswith("n1,qwc_wds_std,qwc_wrs_std")

    def test_missing_file_is_diagnosed(self, tmp_path, capsys):
        code = cli_main(
            [
                "molecule",
                "--hamiltonian",
                str(tmp_path / "nope.ham"),
                "--out",
                str(tmp_path / "x.csv"),
            ]
        )
        assert code == 2
        assert "error" in capsys.readouterr().err

    def test_mc_method_spec(self, toy_path, tmp_path):
        out = tmp_path / "mc.csv"
        code = cli_main(
            [
                "molecule",
                "--hamiltonian",
                toy_path,
                "--signs",
                "sampled",
                "--method",
                "mc:30",
                "--n1-grid",
                "20",
                "--seed",
                "3",
                "--out",
                str(out),
            ]
        )
        assert code == 0
        assert ",mc:30" in out.read_text().splitlines()[1]
