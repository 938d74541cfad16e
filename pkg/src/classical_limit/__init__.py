"""Neural emulation of the classical limit of the quantum harmonic oscillator."""

from classical_limit.dynamics import (
    OscillatorParams,
    PhaseState,
    TimeGrid,
    Trajectory,
    classical_closed_form,
    ehrenfest_rhs,
    energy,
    integrate_trajectory,
)
from classical_limit.estimator import ClassicalTrajectoryTransformer, TrajectoryMLPRegressor
from classical_limit.validation import ValidationError

__version__ = "0.1.0"

__all__ = [
    "ClassicalTrajectoryTransformer",
    "OscillatorParams",
    "PhaseState",
    "TimeGrid",
    "Trajectory",
    "TrajectoryMLPRegressor",
    "ValidationError",
    "classical_closed_form",
    "ehrenfest_rhs",
    "energy",
    "integrate_trajectory",
]
