"""Mean-field and exact dynamics of dissipative collective spin models."""

from ._core import (
    Axis,
    CollapseResult,
    EnvelopePoint,
    Error,
    ExpFit,
    ExpectationTrace,
    FixedPoint,
    Mode,
    ModelParams,
    Operators,
    PolarState,
    PowerFit,
    SpectrumResult,
    SteadyStateMetrics,
    Trajectory,
    angles_from_bloch,
    ansatz_total_spin,
    best_collapse,
    bloch_from_angles,
    brute_force_total_spin,
    build_hamiltonian,
    build_liouvillian,
    build_operators,
    classify,
    classify_phase,
    coherent_state,
    collapse_score,
    detect_orbit,
    dominant_frequency,
    envelope,
    evolve,
    find_fixed_points,
    fit_exp_amplitude,
    fit_power_amplitude,
    gap_scaling,
    integrate,
    lindblad_rhs,
    pi_rotation_x,
    rhs_collective,
    rhs_local,
    spectrum,
    steady_state,
    steadystate_metrics,
)
from ._core import __version__

__all__ = [
    "Axis",
    "CollapseResult",
    "EnvelopePoint",
    "Error",
    "ExpFit",
    "ExpectationTrace",
    "FixedPoint",
    "Mode",
    "ModelParams",
    "Operators",
    "PolarState",
    "PowerFit",
    "SpectrumResult",
    "SteadyStateMetrics",
    "Trajectory",
    "__version__",
    "angles_from_bloch",
    "ansatz_total_spin",
    "best_collapse",
    "bloch_from_angles",
    "brute_force_total_spin",
    "build_hamiltonian",
    "build_liouvillian",
    "build_operators",
    "classify",
    "classify_phase",
    "coherent_state",
    "collapse_score",
    "detect_orbit",
    "dominant_frequency",
    "envelope",
    "evolve",
    "find_fixed_points",
    "fit_exp_amplitude",
    "fit_power_amplitude",
    "gap_scaling",
    "integrate",
    "lindblad_rhs",
    "pi_rotation_x",
    "rhs_collective",
    "rhs_local",
    "spectrum",
    "steady_state",
    "steadystate_metrics",
]
