"""Complex-energy classical trajectories for 1D barrier decay.

The library reconstructs real-time tunneling saddles of one-dimensional
quantum mechanics: classical trajectories at complex energy, the action
carried by them (computed along independent routes that must agree),
small-energy expansions of the cycle and line integrals, and a direct
Schrodinger-evolution oracle that measures the decay rate the saddles
are supposed to explain.
"""

from .errors import (
    AmbiguousRoot,
    BranchAmbiguity,
    CFLQualityWarning,
    CutCollision,
    DomainError,
    EnergyDriftExceeded,
    Escaped,
    FitIllConditioned,
    InsufficientCycles,
    ModulusOutOfRange,
    NoConvergence,
    NoExit,
    NoExponentialWindow,
    PhaseConstraintViolated,
    TunnelError,
    WrongBasin,
)
from .potential import (
    Potential,
    WkbBundle,
    bounce_action_identity,
    bounce_time,
    euclidean_segment,
    wkb_actions,
)
from .elliptic import JacobiReference, sn, sn_cn_dn
from .contour import (
    CycleResult,
    SeriesCoefficients,
    a_i_closed_form,
    cycle_integral,
    cycle_integrals,
    cycle_time_integral,
    extract_log_coefficient,
    real_line_S,
    real_line_T,
    tracked_sqrt,
)
from .trajectory import (
    IntegratorConfig,
    Trajectory,
    cycle_amplitudes,
    cycle_durations,
    drift_coefficient,
    exit_tail,
    harmonic_reference,
    initial_velocity,
    integrate_eom,
    velocity_phase_winding,
)
from .saddle import (
    SaddleSolution,
    contour_action,
    epsilon_to_time,
    multi_instanton_epsilon,
    n_of_epsilon,
    solve_saddle,
)
from .action import (
    ActionBreakdown,
    action_decomposed,
    action_direct,
    action_expansion,
    factorize,
    false_vacuum_compensation,
)
from .oracle import (
    DecayFit,
    EvolutionRecord,
    GridSpec,
    SweepResult,
    absorber_profile,
    default_grid,
    evolve,
    fit_gamma,
    gamma_sweep,
    hamiltonian_expectation,
    prepare_initial_state,
    probability_current,
    relax_initial_state,
    resolved_potential,
)
from .verify import run_suite

__version__ = "0.1.0"

__all__ = [
    "AmbiguousRoot",
    "BranchAmbiguity",
    "CFLQualityWarning",
    "CutCollision",
    "DomainError",
    "EnergyDriftExceeded",
    "Escaped",
    "FitIllConditioned",
    "InsufficientCycles",
    "ModulusOutOfRange",
    "NoConvergence",
    "NoExit",
    "NoExponentialWindow",
    "PhaseConstraintViolated",
    "TunnelError",
    "WrongBasin",
    "Potential",
    "WkbBundle",
    "bounce_action_identity",
    "bounce_time",
    "euclidean_segment",
    "wkb_actions",
    "JacobiReference",
    "sn",
    "sn_cn_dn",
    "CycleResult",
    "SeriesCoefficients",
    "a_i_closed_form",
    "cycle_integral",
    "cycle_integrals",
    "cycle_time_integral",
    "extract_log_coefficient",
    "real_line_S",
    "real_line_T",
    "tracked_sqrt",
    "IntegratorConfig",
    "Trajectory",
    "cycle_amplitudes",
    "cycle_durations",
    "drift_coefficient",
    "exit_tail",
    "harmonic_reference",
    "initial_velocity",
    "integrate_eom",
    "velocity_phase_winding",
    "SaddleSolution",
    "contour_action",
    "epsilon_to_time",
    "multi_instanton_epsilon",
    "n_of_epsilon",
    "solve_saddle",
    "ActionBreakdown",
    "action_decomposed",
    "action_direct",
    "action_expansion",
    "factorize",
    "false_vacuum_compensation",
    "DecayFit",
    "EvolutionRecord",
    "GridSpec",
    "SweepResult",
    "absorber_profile",
    "default_grid",
    "evolve",
    "fit_gamma",
    "gamma_sweep",
    "hamiltonian_expectation",
    "prepare_initial_state",
    "probability_current",
    "relax_initial_state",
    "resolved_potential",
    "run_suite",
    "__version__",
]
