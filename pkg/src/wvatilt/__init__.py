"""Tilt-sensitivity model of a birefringent-plate weak-value amplifier.

The package models a polarization qubit carried by a Gaussian beam through
a birefringent plate and a post-selecting analyzer: closed-form pointer
statistics over the full incidence-angle range, an independent quadrature
oracle for every closed form, enumeration of the phase-matching (coherency)
angles, tilt-sensitivity analysis, and least-squares recovery of the beam
divergence (momentum boost) from measurement records.
"""

__version__ = "0.1.0"

from .coherency import CoherencyPoint, PointKind, locate_points, nth_point
from .config import (
    OutputFormat,
    RunConfig,
    config_echo,
    default_beam,
    default_config,
    default_crystal,
    parse_config,
)
from .errors import (
    AngleDomainError,
    ConfigError,
    DegeneratePostSelection,
    GridTooCoarseError,
    PointNotFoundError,
    RankDeficientFitError,
    SingularSelectionError,
)
from .optics import (
    BeamSpec,
    CrystalSpec,
    InteractionParams,
    PhaseForm,
    classical_tilt_sensitivity,
    differential_shift_slope,
    interaction_params,
    phase_shift,
    phase_slope,
    ray_displacements,
)
from .oracle import GridRequest, moment, oracle_expectation_z, oracle_probability
from .pointer import (
    BoostSpec,
    InverseWvaShift,
    PointerWavefunction,
    Regime,
    RegimeLabel,
    RegimeThresholds,
    SelectionSpec,
    classify_regime,
    expectation_z,
    final_wavefunction,
    inverse_wva_prediction,
    postselection_probability,
    weak_value,
    wva_prediction,
)
from .sensitivity import (
    DensityMap,
    EpsilonRecord,
    FitResult,
    MeasurementSample,
    ProbabilityMap,
    SweepRecord,
    amplification_factor,
    density_map,
    fit_boost,
    optimal_epsilon,
    probability_map,
    read_measurements,
    sweep_epsilon,
    sweep_theta,
    synthesize_measurements,
    tilt_sensitivity,
)

__all__ = [
    "__version__",
    "AngleDomainError",
    "BeamSpec",
    "BoostSpec",
    "CoherencyPoint",
    "ConfigError",
    "CrystalSpec",
    "DegeneratePostSelection",
    "DensityMap",
    "EpsilonRecord",
    "FitResult",
    "GridRequest",
    "GridTooCoarseError",
    "InteractionParams",
    "InverseWvaShift",
    "MeasurementSample",
    "OutputFormat",
    "PhaseForm",
    "PointKind",
    "PointNotFoundError",
    "PointerWavefunction",
    "ProbabilityMap",
    "RankDeficientFitError",
    "Regime",
    "RegimeLabel",
    "RegimeThresholds",
    "RunConfig",
    "SelectionSpec",
    "SingularSelectionError",
    "SweepRecord",
    "amplification_factor",
    "classical_tilt_sensitivity",
    "classify_regime",
    "config_echo",
    "default_beam",
    "default_config",
    "default_crystal",
    "density_map",
    "differential_shift_slope",
    "expectation_z",
    "final_wavefunction",
    "fit_boost",
    "interaction_params",
    "inverse_wva_prediction",
    "locate_points",
    "moment",
    "nth_point",
    "optimal_epsilon",
    "oracle_expectation_z",
    "oracle_probability",
    "parse_config",
    "phase_shift",
    "phase_slope",
    "postselection_probability",
    "probability_map",
    "ray_displacements",
    "read_measurements",
    "sweep_epsilon",
    "sweep_theta",
    "synthesize_measurements",
    "tilt_sensitivity",
    "weak_value",
    "wva_prediction",
]
