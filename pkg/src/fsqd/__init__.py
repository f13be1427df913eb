"""Pure-state quantum dynamics through the lens of Fubini-Study geometry.

Evolve states under Hermitian Hamiltonians, measure projective distances and
decay velocities, and compare measured survival amplitudes against the cosine
law and the Mandelstam-Tamm bound.
"""

from .dynamics import (
    HamiltonianSchedule,
    Trajectory,
    evolve_exact,
    evolve_schedule,
    sample_trajectory,
)
from .exceptions import (
    DimensionMismatchError,
    GridError,
    HermiticityError,
    NormalizationError,
    ParseError,
    ScheduleError,
)
from .geometry import PathLengthResult, fs_distance, fs_rate, path_length
from .quantum_types import (
    DEFAULT_CONSTANTS,
    HermitianOperator,
    PhysicalConstants,
    Ray,
    StateVector,
    energy_uncertainty,
    expectation,
    inner_product,
    normalize,
    spectral_decomposition,
)
from .survival import (
    CosinePrediction,
    SurvivalReport,
    build_survival_report,
    decay_rate_closed,
    decay_rate_empirical,
    decay_velocity,
    mt_check,
    predicted_amplitude,
    survival_amplitude,
)

__version__ = "0.1.0"

__all__ = [
    "__version__",
    "StateVector",
    "Ray",
    "HermitianOperator",
    "PhysicalConstants",
    "DEFAULT_CONSTANTS",
    "inner_product",
    "normalize",
    "expectation",
    "energy_uncertainty",
    "spectral_decomposition",
    "fs_distance",
    "fs_rate",
    "path_length",
    "PathLengthResult",
    "HamiltonianSchedule",
    "Trajectory",
    "evolve_exact",
    "evolve_schedule",
    "sample_trajectory",
    "SurvivalReport",
    "CosinePrediction",
    "survival_amplitude",
    "predicted_amplitude",
    "mt_check",
    "decay_velocity",
    "decay_rate_empirical",
    "decay_rate_closed",
    "build_survival_report",
    "DimensionMismatchError",
    "NormalizationError",
    "HermiticityError",
    "ScheduleError",
    "GridError",
    "ParseError",
]
