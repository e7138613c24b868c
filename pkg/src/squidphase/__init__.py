"""Non-adiabatic geometric-phase loops on flux-tunable charge qubits.

Library layout:

* :mod:`squidphase.core`       state evolution, propagators, Bloch map
* :mod:`squidphase.device`     device Hamiltonians and control schedules
* :mod:`squidphase.phases`     phase decomposition and loop geometry
* :mod:`squidphase.protocols`  the single- and two-qubit protocols, gate scoring
* :mod:`squidphase.validation` charge-basis check of the two-level model
* :mod:`squidphase.cli`        command-line front end
"""

__version__ = "0.1.0"

from .core import (
    ContractViolation,
    Trajectory,
    bloch_from_state,
    evolve_schedule,
    expm_hermitian,
    kron,
    two_level_propagator,
)
from .device import (
    ControlSegment,
    DeviceParams,
    Schedule,
    charge_hamiltonian,
    coupled_hamiltonian,
    effective_field,
    josephson_energy,
    schedule_hamiltonians,
    two_level_hamiltonian,
)
from .phases import (
    NonCyclicTrajectory,
    PhaseReport,
    bloch_loop,
    dynamic_phase,
    geodesic_deviation,
    geometric_phase,
    phase_consistency,
    solid_angle,
    total_phase,
    wrap_angle,
)
from .protocols import (
    GateReport,
    SingleQubitPlan,
    TwoQubitPlan,
    build_single_qubit_schedule,
    build_two_qubit_schedule,
    calibrate_delta,
    cnot_fidelity,
    complete_to_cnot,
    conditional_phase_gate,
    ideal_loop_unitary,
    predict_gamma,
    run_conditional_gate,
    run_single_qubit,
    x_rotation,
)
from .validation import compare_models, validity_sweep

__all__ = [
    "__version__",
    "ContractViolation",
    "ControlSegment",
    "DeviceParams",
    "GateReport",
    "NonCyclicTrajectory",
    "PhaseReport",
    "Schedule",
    "SingleQubitPlan",
    "Trajectory",
    "TwoQubitPlan",
    "bloch_from_state",
    "bloch_loop",
    "build_single_qubit_schedule",
    "build_two_qubit_schedule",
    "calibrate_delta",
    "charge_hamiltonian",
    "cnot_fidelity",
    "compare_models",
    "complete_to_cnot",
    "conditional_phase_gate",
    "coupled_hamiltonian",
    "dynamic_phase",
    "effective_field",
    "evolve_schedule",
    "expm_hermitian",
    "geodesic_deviation",
    "geometric_phase",
    "ideal_loop_unitary",
    "josephson_energy",
    "kron",
    "phase_consistency",
    "predict_gamma",
    "run_conditional_gate",
    "run_single_qubit",
    "schedule_hamiltonians",
    "solid_angle",
    "total_phase",
    "two_level_hamiltonian",
    "two_level_propagator",
    "validity_sweep",
    "wrap_angle",
    "x_rotation",
]
