"""Biased estimator channels for classical shadows.

Shadow sampling on simulated states, biased/unbiased estimation of Pauli
expectation values and reduced density matrices, closed-form loss / SNR /
optimal-bias analytics, and the spin-ring perturbation experiment.
"""

from .analytics import (
    SnrReport,
    average_loss,
    best_case_mse,
    biased_mse,
    eps_min,
    minimize_worst_case,
    shadow_snr,
    snr,
    worst_case_mse,
    worst_case_mse_closed,
)
from .backend import ACTIVE_BACKEND
from .estimation import (
    BiasSpec,
    EstimateReport,
    alpha_from_epsilon,
    biased_local_channel,
    epsilon_from_alpha,
    mean_pauli_estimate,
    plugin_alpha_star,
    reduced_density_estimate,
    snapshot_pauli_estimate,
)
from .pauli import (
    PauliString,
    Statevector,
    bloch_of,
    density_from_bloch,
    exact_expectation,
    pauli_weight,
    reduced_density,
)
from .sampling import (
    ShadowCollection,
    Snapshot,
    SplitMix64,
    collect_shadow,
    outcome_distribution,
    sample_snapshot,
)
from .spinring import (
    CombinedReport,
    ExperimentReport,
    Hamiltonian,
    SpinRingSpec,
    build_spin_ring,
    combined_estimator_demo,
    emit_density_samples,
    ground_state,
    perturbation_experiment,
    spin_ring_hamiltonian,
)

__version__ = "0.1.0"

__all__ = [
    "ACTIVE_BACKEND",
    "BiasSpec",
    "CombinedReport",
    "EstimateReport",
    "ExperimentReport",
    "Hamiltonian",
    "PauliString",
    "ShadowCollection",
    "Snapshot",
    "SnrReport",
    "SpinRingSpec",
    "SplitMix64",
    "Statevector",
    "alpha_from_epsilon",
    "average_loss",
    "best_case_mse",
    "biased_local_channel",
    "biased_mse",
    "bloch_of",
    "build_spin_ring",
    "collect_shadow",
    "combined_estimator_demo",
    "density_from_bloch",
    "emit_density_samples",
    "eps_min",
    "epsilon_from_alpha",
    "exact_expectation",
    "ground_state",
    "mean_pauli_estimate",
    "minimize_worst_case",
    "outcome_distribution",
    "pauli_weight",
    "perturbation_experiment",
    "plugin_alpha_star",
    "reduced_density",
    "reduced_density_estimate",
    "sample_snapshot",
    "shadow_snr",
    "snapshot_pauli_estimate",
    "snr",
    "spin_ring_hamiltonian",
    "worst_case_mse",
    "worst_case_mse_closed",
]
