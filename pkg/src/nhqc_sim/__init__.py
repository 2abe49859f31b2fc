"""Simulator and gate-synthesis toolkit for holonomic gates on parametrically
driven three-level transmons with decoherence-free-subspace encoding."""

from .hilbert import (
    SubsystemLayout,
    annihilation_op,
    embed,
    logical_basis,
    lowering_op,
    product_state,
    projector_op,
)
from .model import (
    Coupling,
    DeviceSpec,
    DriveTone,
    PulseSchedule,
    PulseSegment,
    TransmonSpec,
    bessel_j,
    effective_hamiltonian,
    interaction_hamiltonian,
    jacobi_anger_hamiltonian,
    lab_hamiltonian,
    schedule_hamiltonian,
    solve_beta_for_ratio,
    static_hamiltonian,
)
from .holonomy import (
    ControlledPhaseGate,
    SingleQubitGate,
    TwoQubitRotGate,
    check_cyclicity,
    check_parallel_transport,
    controlled_phase_unitary,
    decompose_K,
    gate_distance,
    single_loop_propagator,
    single_qubit_unitary,
    synth_schedule,
    target_unitary,
    two_qubit_unitary,
)
from .dynamics import (
    CollapseOp,
    EvolutionResult,
    IntegratorConfig,
    LogicalChannel,
    collapse_operators,
    evolve_lindblad,
    evolve_schrodinger,
    reconstruct_channel,
)
from .metrics import (
    FidelityReport,
    gate_fidelity_1q,
    gate_fidelity_2q,
    leakage,
    populations,
    state_fidelity,
)
from .experiments import (
    ExperimentConfig,
    GateJob,
    ResultRow,
    SweepAxis,
    calibrate_beta,
    emit_csv,
    emit_heatmap_svg,
    preset,
    run,
)

__version__ = "0.1.0"
