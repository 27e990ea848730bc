"""Simulation of quantum non-demolition measurement of two-qubit Werner states.

The package builds the exact measurement gates and effective generators,
integrates the dissipative master equation for the probe, and runs the
joint, sequential, and steady-state-calibration readout protocols,
including the fidelity / estimation-error sweep tables exposed by the
CLI (``wernerqnd --help``).
"""

from .tensor import (
    SubsystemLayout,
    TWO_QUBITS,
    THREE_QUBITS,
    kron,
    dagger,
    embed_operator,
    partial_trace,
    hermitian_expm,
    check_unitary,
    check_hermitian,
    frobenius_distance,
)
from .states import (
    BellKind,
    DensityMatrix,
    PureState,
    MeasurementRecord,
    bell_state,
    werner,
    fidelity,
    purity,
    expectation,
    bell_relabel,
    sample_measurement,
    ground_state,
    excited_state,
)
from .operators import (
    FullModelParams,
    LindbladChannel,
    pauli,
    qnd_unitary,
    pair_unitary,
    effective_hamiltonian,
    pair_hamiltonian,
    effective_coupling,
    full_hamiltonian,
    dark_states,
    probe_decay_channel,
)
from .dynamics import (
    IntegratorConfig,
    Trajectory,
    SteadyStateResult,
    conjugate,
    propagate,
    lindblad_rhs,
    integrate_master,
    steady_state,
    liouvillian_matrix,
    liouvillian_kernel,
)
from .protocols import (
    JointConfig,
    SequentialConfig,
    CalibrationCurve,
    ProtocolReport,
    Estimate,
    Fig2Row,
    Fig3Row,
    run_joint,
    run_sequential,
    run_dissipative_calibration,
    estimate_x_from_probe,
    infer_mixing_parameter,
    sweep_population_surface,
    sweep_error_surface,
)
from .validation import ValidationConfig, ValidationReport, validate_full_model
from .errors import (
    CalibrationError,
    ConfigError,
    ConvergenceError,
    IntegrationError,
    NonInformativeTimeError,
)

__version__ = "0.1.0"

__all__ = [
    "SubsystemLayout", "TWO_QUBITS", "THREE_QUBITS",
    "kron", "dagger", "embed_operator", "partial_trace", "hermitian_expm",
    "check_unitary", "check_hermitian", "frobenius_distance",
    "BellKind", "DensityMatrix", "PureState", "MeasurementRecord",
    "bell_state", "werner", "fidelity", "purity", "expectation",
    "bell_relabel", "sample_measurement", "ground_state", "excited_state",
    "FullModelParams", "LindbladChannel", "pauli", "qnd_unitary",
    "pair_unitary", "effective_hamiltonian", "pair_hamiltonian",
    "effective_coupling", "full_hamiltonian", "dark_states",
    "probe_decay_channel",
    "IntegratorConfig", "Trajectory", "SteadyStateResult", "conjugate",
    "propagate", "lindblad_rhs", "integrate_master", "steady_state",
    "liouvillian_matrix", "liouvillian_kernel",
    "JointConfig", "SequentialConfig", "CalibrationCurve", "ProtocolReport",
    "Estimate", "Fig2Row", "Fig3Row", "run_joint", "run_sequential",
    "run_dissipative_calibration", "estimate_x_from_probe",
    "infer_mixing_parameter", "sweep_population_surface", "sweep_error_surface",
    "ValidationConfig", "ValidationReport", "validate_full_model",
    "CalibrationError", "ConfigError", "ConvergenceError", "IntegrationError",
    "NonInformativeTimeError",
]
