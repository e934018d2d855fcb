"""Heisenberg-Weyl reduced tomography of multiphoton states with two bucket
detectors: Fock-space simulation, DQC1 parity estimation, MLE fitting and
Clements-mesh noise."""

from .clements import ClementsPlan, MZElement, NoiseSpec, compose, decompose, noisy_unitary, perturb
from .dqc1 import (
    MeasurementConfig,
    build_circuit,
    estimate_full_table,
    estimate_hw_expectation,
    measurement_schedule,
    zeta_exact,
)
from .estimators import DQC1Reconstructor, HWReducedMLE
from .fock import FockBasis, basis_index, enumerate_basis, lift_operator, permanent
from .hw import (
    ExpectationTable,
    hw_expectations_exact,
    hw_matrix,
    hw_reduce,
    orbit_decomposition,
    reconstruct_hw_reduced,
)
from .mle import fidelity, fit

__version__ = "0.1.0"

__all__ = [
    "ClementsPlan", "MZElement", "NoiseSpec", "compose", "decompose", "noisy_unitary", "perturb",
    "MeasurementConfig", "build_circuit", "estimate_full_table", "estimate_hw_expectation",
    "measurement_schedule", "zeta_exact",
    "DQC1Reconstructor", "HWReducedMLE",
    "FockBasis", "basis_index", "enumerate_basis", "lift_operator", "permanent",
    "ExpectationTable", "hw_expectations_exact", "hw_matrix", "hw_reduce",
    "orbit_decomposition", "reconstruct_hw_reduced",
    "fidelity", "fit",
]
