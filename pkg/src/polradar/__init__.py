"""Passive polarimetric multistatic radar: simulation, GLRT detection,
dipole-moment estimation, and Monte-Carlo experiment harness."""

__version__ = "0.1.0"

from .geometry import (
    DegenerateGeometryError,
    Topography,
    lift_state,
    transverse_project,
    unit_toward,
)
from .targets import PointTarget, dominant_dipole, scatter_coupling
from .scene import AntennaPose, Receiver, Scene, Transmitter, Waveform, C0
from .forward import (
    ModelValidityError,
    SignalSet,
    bistatic_phase,
    direct_path_signal,
    doppler_factors,
    receive_matrix,
    synthesize,
    target_path_signal,
)
from .noise import NoiseCov, UndefinedSnrError, sample_noise, snr_to_variance, trial_rng
from .detector import (
    DetectionOutput,
    Hypothesis,
    SteeringSet,
    correlations,
    dipole_angle_error,
    estimate_dipole,
    glrt,
    mle_waveform,
    objective_j,
    receive_stack,
    steering,
)
from .eig import jacobi_eigh

__all__ = [
    "C0",
    "AntennaPose",
    "DegenerateGeometryError",
    "DetectionOutput",
    "Hypothesis",
    "ModelValidityError",
    "NoiseCov",
    "PointTarget",
    "Receiver",
    "Scene",
    "SignalSet",
    "SteeringSet",
    "Topography",
    "Transmitter",
    "UndefinedSnrError",
    "Waveform",
    "bistatic_phase",
    "correlations",
    "dipole_angle_error",
    "direct_path_signal",
    "dominant_dipole",
    "doppler_factors",
    "estimate_dipole",
    "glrt",
    "jacobi_eigh",
    "lift_state",
    "mle_waveform",
    "objective_j",
    "receive_matrix",
    "receive_stack",
    "sample_noise",
    "scatter_coupling",
    "snr_to_variance",
    "steering",
    "synthesize",
    "target_path_signal",
    "transverse_project",
    "trial_rng",
    "unit_toward",
]
