"""Simulator for a two-atom trapped-atom Otto engine with light-induced
dipole-dipole interactions: dissipative thermalization, finite-time or
quasi-static unitary driving, projection cooling, and parameter sweeps."""

from .cycle import (
    CycleOptions,
    CycleResult,
    StrokeMode,
    StrokeRecord,
    atomic_energy,
    friction_work,
    initial_state,
    project_to_initial,
    run_cycle,
    stroke_fidelities,
)
from .dynamics import (
    PropagationError,
    RampProtocol,
    Trajectory,
    adiabatic_map,
    lindblad_rhs,
    propagate_lindblad,
    propagate_lindblad_to_steady,
    propagate_unitary,
)
from .linalg import (
    QuantumState,
    herm_eig,
    kron,
    partial_trace,
    sqrtm_psd,
    uhlmann_fidelity,
)
from .model import (
    DDICoefficients,
    EngineParams,
    OperatorSet,
    beta_from_nbar,
    build_operators,
    build_system_hamiltonian,
    build_total_hamiltonian,
    ddi_coefficients,
    gibbs_state,
    jump_operators,
)
from .sweep import (
    TOOL_VERSION as __version__,
    SweepAxis,
    SweepRow,
    SweepSpec,
    load_spec,
    run_sweep,
    write_csv,
    write_json,
)
