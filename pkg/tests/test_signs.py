import numpy as np
import pytest

from bellsampling import (
    Grouping,
    HamiltonianFormatError,
    PauliString,
    StateVector,
    allocate_shots,
    basis_state,
    estimate_signs,
    exact_signs,
    exp_s_exact,
    ground_state,
    load_sign_oracle,
    parse_hamiltonian,
    qwc_grouping,
    sample_group_outcomes,
    sample_signs,
    serialize_hamiltonian,
)
from bellsampling.signs import GroupTallies, largest_remainder


class TestAllocateShots:
    def test_wds_parity_example(self):
        g = Grouping(((0,), (1,), (2,)), (0.5, 0.25, 0.25))
        alloc = allocate_shots(g, 12, "wds")
        # nominal (6, 3, 3); the single even count is decremented
        assert alloc.counts == (5, 3, 3)
        assert alloc.total == 11
        assert alloc.requested == 12

    def test_wds_single_group(self):
        g = Grouping(((0,),), (1.0,))
        assert allocate_shots(g, 7, "wds").counts == (7,)

    def test_wds_pairing_preserves_total(self):
        g = Grouping(((0,), (1,)), (0.5, 0.5))
        alloc = allocate_shots(g, 12, "wds")
        assert alloc.total == 12
        assert all(c % 2 == 1 for c in alloc.counts)

    def test_wds_small_share_gets_zero(self):
        g = Grouping(((0,), (1,)), (0.999, 0.001))
        alloc = allocate_shots(g, 100, "wds")
        assert alloc.counts[1] == 0
        assert alloc.counts[0] % 2 == 1

    def test_wds_properties_random(self, rng):
        for _ in range(300):
            k = int(rng.integers(2, 9))
            w = rng.dirichlet(np.ones(k))
            g = Grouping(tuple((i,) for i in range(k)), tuple(w / w.sum()))
            n2 = int(rng.integers(5, 400))
            alloc = allocate_shots(g, n2, "wds")
            again = allocate_shots(g, n2, "wds")
            assert alloc.counts == again.counts  # deterministic
            assert n2 - 1 <= alloc.total <= n2
            assert all(c == 0 or c % 2 == 1 for c in alloc.counts)

    def test_wrs_multinomial(self):
        g = Grouping(((0,), (1,)), (0.5, 0.5))
        alloc = allocate_shots(g, 10_000, "wrs", seed=9)
        assert alloc.total == 10_000
        # within 3 sigma of the binomial mean
        assert abs(alloc.counts[0] - 5000) < 3 * np.sqrt(10_000 * 0.25)

    def test_wrs_deterministic_given_seed(self):
        g = Grouping(((0,), (1,), (2,)), (0.2, 0.3, 0.5))
        assert allocate_shots(g, 99, "wrs", seed=4).counts == allocate_shots(
            g, 99, "wrs", seed=4
        ).counts

    def test_largest_remainder_total(self, rng):
        for _ in range(50):
            shares = rng.random(int(rng.integers(1, 7))) + 1e-3
            total = int(rng.integers(1, 200))
            counts = largest_remainder(shares, total)
            assert counts.sum() == total
            assert np.all(counts >= 0)

    def test_n2_must_be_positive(self):
        g = Grouping(((0,),), (1.0,))
        with pytest.raises(ValueError):
            allocate_shots(g, 0, "wds")


class TestSampleGroupOutcomes:
    def test_z_on_zero_state(self):
        tallies = sample_group_outcomes(
            basis_state(1, 0), [PauliString.from_letters("Z")], 5, seed=1
        )
        assert tallies.sums.tolist() == [5]

    def test_deterministic_basis_state(self):
        # |01>: qubit 0 in 0, qubit 1 in 1 -> outcomes (+1, -1, -1) each shot
        state = basis_state(2, 2)
        strings = [
            PauliString.from_letters("ZI"),
            PauliString.from_letters("IZ"),
            PauliString.from_letters("ZZ"),
        ]
        tallies = sample_group_outcomes(state, strings, 3, seed=7)
        assert tallies.sums.tolist() == [3, -3, -3]

    def test_x_on_zero_state_symmetry(self):
        tallies = sample_group_outcomes(
            basis_state(1, 0), [PauliString.from_letters("X")], 10_000, seed=3
        )
        assert abs(tallies.sums[0]) < 3 * np.sqrt(10_000)

    def test_non_qwc_group_rejected(self, rng):
        state = basis_state(1, 0)
        with pytest.raises(ValueError):
            sample_group_outcomes(
                state,
                [PauliString.from_letters("X"), PauliString.from_letters("Z")],
                5,
                seed=1,
            )

    def test_zero_shots(self):
        tallies = sample_group_outcomes(
            basis_state(1, 0), [PauliString.from_letters("Z")], 0, seed=1
        )
        assert tallies.shots == 0 and tallies.sums.tolist() == [0]


class TestEstimateSigns:
    def test_majorities(self):
        grouping = Grouping(((0, 1),), (1.0,))
        tallies = [GroupTallies((0, 1), np.array([3, -1]), 3)]
        sv = estimate_signs(tallies, grouping, 2)
        assert sv.values == (1, -1)
        assert sv.provenance == "sampled"

    def test_zero_shot_group_defaults_plus(self):
        grouping = Grouping(((0,), (1,)), (0.9, 0.1))
        tallies = [GroupTallies((0,), np.array([-5]), 5)]
        sv = estimate_signs(tallies, grouping, 2)
        assert sv.values == (-1, 1)

    def test_even_tie_defaults_plus(self):
        grouping = Grouping(((0,),), (1.0,))
        tallies = [GroupTallies((0,), np.array([0]), 4)]
        assert estimate_signs(tallies, grouping, 1).values == (1,)

    def test_odd_counts_never_tie(self, rng):
        # parity argument: an odd number of +/-1 cannot sum to zero
        state = basis_state(1, 0)
        for seed in range(30):
            tallies = sample_group_outcomes(
                state, [PauliString.from_letters("X")], 7, seed=seed
            )
            assert tallies.sums[0] != 0

    @pytest.mark.parametrize("p,n2", [(0.6, 3), (0.9, 5), (0.5, 7)])
    def test_majority_expectation_matches_binomial(self, p, n2, rng):
        trials = 100_000
        counts = rng.binomial(n2, p, size=trials)
        signs = np.where(2 * counts > n2, 1.0, -1.0)
        se = signs.std(ddof=1) / np.sqrt(trials)
        assert abs(signs.mean() - exp_s_exact(p, n2)) < 5.0 * se

    def test_sample_signs_pipeline(self, h2):
        energy, state = ground_state(h2)
        grouping = qwc_grouping(h2)
        alloc = allocate_shots(grouping, 2001, "wds")
        sv = sample_signs(state, h2, grouping, alloc, seed=5)
        exact = exact_signs(state, h2)
        # at 2k shots on the ground state every majority matches the truth
        assert sv.values == exact.values
        assert set(sv.values) <= {-1, 1}


class TestSignOracle:
    def _oracle_text(self, h, state, zero_index=None):
        from bellsampling import expectation

        lines = [f"qubits {h.n}"]
        for idx, (_, p) in enumerate(h.terms):
            value = 0.0 if idx == zero_index else expectation(state, p)
            lines.append(f"{p} {value!r}")
        return "\n".join(lines) + "\n"

    def test_matches_exact_signs(self, h2):
        _, state = ground_state(h2)
        sv = load_sign_oracle(self._oracle_text(h2, state), h2)
        assert sv.provenance == "oracle-file"
        assert sv.values == exact_signs(state, h2).values

    def test_zero_entry_warns_and_defaults(self, h2):
        _, state = ground_state(h2)
        with pytest.warns(UserWarning, match="zero"):
            sv = load_sign_oracle(self._oracle_text(h2, state, zero_index=3), h2)
        assert sv.values[3] == 1
        assert sv.zero_defaulted == (3,)

    def test_missing_term_rejected(self, h2):
        _, state = ground_state(h2)
        text = "\n".join(self._oracle_text(h2, state).splitlines()[:-1]) + "\n"
        with pytest.raises(HamiltonianFormatError, match="missing"):
            load_sign_oracle(text, h2)

    def test_qubit_mismatch_rejected(self, h2):
        with pytest.raises(HamiltonianFormatError, match="qubit count"):
            load_sign_oracle("qubits 3\n", h2)

    def test_committed_h2_oracle_matches_exact(self, h2, fixture_dir):
        _, state = ground_state(h2)
        sv = load_sign_oracle((fixture_dir / "h2.signs").read_text(), h2)
        assert sv.values == exact_signs(state, h2).values
