"""Two-copy Bell-sampling estimation of Pauli-Hamiltonian expectation values.

The package simulates Bell-basis measurements on two copies of a quantum
state, which estimate |<P>| for every Pauli string at once, evaluates the
resulting energy estimator's bias and variance analytically (exact
summation and saddle-point), and compares against conventional
qubit-wise-commuting grouped sampling.
"""

from importlib import resources

from .bell import (
    BELL_LABELS,
    BellOutcome,
    BellShotBatch,
    bell_eigenvalue,
    bitflip_distribution,
    dump_batch,
    estimate_abs,
    estimate_abs_many,
    exact_bell_distribution,
    lambda_product,
    lambda_products,
    sample_bell_outcomes,
    walsh_hadamard,
)
from .experiments import (
    ExperimentConfig,
    SweepRow,
    default_n1_grid,
    emit_report,
    fit_loglog_slope,
    run_baseline_sweep,
    run_molecular_sweep,
    run_single_pauli_sweep,
    simulate_energy_trials,
)
from .moments import (
    SMALL_MU_CONSTANT,
    ExactModeLimitError,
    MomentConfig,
    MomentReport,
    SaddleConvergenceError,
    SaddleInfeasibleError,
    assemble_bias_variance,
    asymptotic_reference,
    exp_b2_exact,
    exp_b_exact,
    exp_bb_exact,
    exp_s_exact,
    exp_ss_exact,
    mu_sigma_from_q,
    normal_exp_b,
    normal_exp_b2,
    qwc_baseline_std,
    saddle_exp_b,
    saddle_exp_b2,
    saddle_exp_bb,
)
from .paulis import (
    Grouping,
    HamiltonianFormatError,
    PauliHamiltonian,
    PauliString,
    is_valid_grouping,
    parse_hamiltonian,
    qubit_wise_commutes,
    qwc_grouping,
    serialize_hamiltonian,
)
from .signs import (
    GroupTallies,
    ShotAllocation,
    SignVector,
    allocate_shots,
    estimate_signs,
    exact_signs,
    load_sign_oracle,
    sample_group_outcomes,
    sample_signs,
)
from .states import (
    PauliMoments,
    StateVector,
    apply_pauli,
    basis_state,
    expectation,
    ground_state,
    hamiltonian_matrix,
    joint_probs_doubled,
    joint_probs_single,
    pair_product_expectations,
    pauli_images,
    pauli_moments,
    random_state,
)

__version__ = "0.1.0"


def fixture_path(name: str):
    """Path to a committed Hamiltonian or sign-oracle fixture file."""
    return resources.files("bellsampling").joinpath("fixtures", name)
