"""Spin-boson (Dicke model) adiabatic ramp simulations.

Library layout:

- hilbert: bases, collective spin / truncated boson operators, states
- models: Dicke and Lipkin Hamiltonians, parity, cat targets
- spectral: parity-resolved gap curves, critical-point and detuning scans
- ramps: LIN / EXP / LAA transverse-field schedules
- evolve: time-dependent Schrodinger + permutation-invariant Lindblad runs
- analysis: QFI, disentangling protocol, longitudinal-field scans
- cli: batch driver with JSON scenario configs and CSV outputs
"""

__version__ = "0.1.0"

from .errors import (
    BasisMismatch,
    ConfigError,
    ConvergenceError,
    CostGuard,
    CoverageError,
    CutoffError,
    DickeRampError,
    EdgeMinimum,
    NoBracket,
    ParityAmbiguous,
    ProtocolError,
    RangeError,
    SingularGap,
    ToleranceError,
    TruncationError,
)
from .hilbert import (
    DensityMatrix,
    ModeBasis,
    ProductBasis,
    SpinBasis,
    StateVector,
    ThermalSpec,
    build_collective_spin_ops,
    build_mode_ops,
    coherent_spin_state,
    displaced_fock_state,
    partial_trace_mode,
    partial_trace_mode_states,
    product_state,
    thermal_weights,
)
from .models import (
    DickeParams,
    GeneratorSpec,
    HamiltonianSplit,
    build_dicke,
    build_lipkin,
    cat_state_target,
    parity_operator,
    spin_cat_target,
)
from .spectral import (
    GapCurve,
    SpectrumSlice,
    critical_field_estimate,
    fock_cutoff,
    gap_curve,
    gap_ratio_scan,
    lowest_eigenpairs,
    min_main_gap,
)
from .ramps import RampSchedule, build_exp, build_laa, build_lin, sample_schedule
from .evolve import (
    EvolutionResult,
    EvolutionSpec,
    cat_fidelity,
    crude_dephasing,
    distribution_Mz,
    ensemble_fidelity,
    evolve_fock_cutoff,
    evolve_lindblad_lipkin,
    evolve_thermal,
    fidelity,
    integrate_pure,
    ising_benchmark,
)
from .lindblad import DecoherenceParams
from .analysis import (
    CoherenceReport,
    DisentangleSpec,
    SpectralDecomposition,
    balance_scan,
    bz_resilience_scan,
    disentangle,
    fidelity_estimates,
    qfi,
    qfi_optimized,
)
