"""Kicked disordered chiral spin-1/2 chains: exact Floquet dynamics,
period-doubling diagnostics, and AC-field sensing via quantum Fisher
information."""

__version__ = "0.1.0"

from .errors import (
    CapacityError,
    CheckpointMismatchError,
    ConfigError,
    ConsistencyError,
    DimensionError,
    SimulationError,
)
from .spin_ops import (
    MAX_SITES,
    BasisIndexing,
    ChainParams,
    DisorderRealization,
    SectorMatrix,
    build_basis,
    build_hamiltonian,
    embed_sectors,
    kick_state,
    sz_total_diagonal,
)
from .floquet import (
    ACFieldParams,
    DerivativePair,
    FloquetPropagator,
    StateVector,
    ac_period_phase,
    apply_kick,
    evolve_period,
    evolve_period_inverse,
    evolve_period_with_derivative,
    integrated_sine,
    prepare_initial_state,
    trotter_oracle,
)
from .observables import (
    DEFAULT_EPSILON,
    EnsembleStatistics,
    SaturationWindow,
    TrajectoryRecord,
    coherence,
    entanglement_entropy,
    lifetime,
    magnetization,
    qfi,
    saturation_average,
    sql_ratio,
)
from .sweep import (
    DEFAULT_SEED,
    SweepAxis,
    SweepCell,
    SweepGrid,
    run_ensemble,
    run_sweep,
    run_trajectory,
)
