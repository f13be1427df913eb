"""Fubini-Study geometry on the space of rays.

The projective distance between two pure states is

    cos²(x) = |⟨ψ₁|ψ₂⟩|² / (⟨ψ₁|ψ₁⟩ ⟨ψ₂|ψ₂⟩),   x ∈ [0, π/2],

and a state evolving under a Hamiltonian moves through ray space at the
instantaneous speed ΔH/ℏ, where ΔH is the energy uncertainty. Integrating
that speed along a trajectory gives the geometric path length, which can
never fall below the straight-line (geodesic) distance between endpoints.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import TYPE_CHECKING, Union

import numpy as np

from .exceptions import DimensionMismatchError, GridError
from .quantum_types import (
    DEFAULT_CONSTANTS,
    HermitianOperator,
    PhysicalConstants,
    Ray,
    StateVector,
    as_constants,
    energy_uncertainty,
)

if TYPE_CHECKING:
    from .dynamics import HamiltonianSchedule, Trajectory

__all__ = ["PathLengthResult", "fs_distance", "fs_rate", "path_length"]

StateLike = Union[Ray, StateVector]

_trapezoid = getattr(np, "trapezoid", None) or np.trapz  # numpy < 2 fallback


def _as_state(obj: StateLike) -> StateVector:
    if isinstance(obj, Ray):
        return obj.representative
    return obj


@dataclass(frozen=True)
class PathLengthResult:
    """Arc length of a trajectory in ray space, against its endpoint distance.

    ``deficit = length − endpoint_distance`` is non-negative up to quadrature
    error: the path is never shorter than the geodesic between its endpoints.
    """

    length: float
    endpoint_distance: float
    deficit: float


def fs_distance(a: StateLike, b: StateLike) -> float:
    """Fubini-Study distance arccos(|⟨a|b⟩| / (‖a‖‖b‖)) in radians.

    Symmetric, invariant under rescaling of either argument, and confined to
    [0, π/2]. The arccos argument is clamped to [0, 1] because floating-point
    overlap of coincident rays can exceed 1 by ~1e-16. Near-identical rays
    keep only absolute accuracy ~1e-8 (arccos loses relative precision at 1).
    """
    va = _as_state(a)
    vb = _as_state(b)
    if va.dim != vb.dim:
        raise DimensionMismatchError(
            f"states have mismatched dimensions: {va.dim} vs {vb.dim}"
        )
    overlap = abs(np.vdot(va.amplitudes, vb.amplitudes))
    denom = np.linalg.norm(va.amplitudes) * np.linalg.norm(vb.amplitudes)
    return float(np.arccos(np.clip(overlap / denom, 0.0, 1.0)))


def fs_rate(
    psi: StateVector,
    H: HermitianOperator,
    constants: PhysicalConstants | float = DEFAULT_CONSTANTS,
) -> float:
    """Instantaneous speed dx/dt = ΔH/ℏ of the ray of ``psi`` under ``H``.

    Matches the finite-difference limit fs_distance(ψ, ψ(δ))/δ as δ → 0.
    """
    constants = as_constants(constants)
    return energy_uncertainty(H, psi) / constants.hbar


def path_length(
    traj: "Trajectory",
    H_schedule: "HamiltonianSchedule",
    constants: PhysicalConstants | float = DEFAULT_CONSTANTS,
) -> PathLengthResult:
    """Trapezoidal arc length ∫ (ΔH/ℏ) dt along a sampled trajectory.

    The quadrature runs on the trajectory's own grid; the caller controls
    resolution through the step count used to generate it.
    """
    constants = as_constants(constants)
    if len(traj.times) < 2:
        raise GridError(
            f"path length needs at least 2 trajectory samples, got {len(traj.times)}"
        )
    rates = np.array(
        [
            fs_rate(state, H_schedule.at(t), constants)
            for t, state in zip(traj.times, traj.states)
        ]
    )
    length = float(_trapezoid(rates, traj.times))
    endpoint = fs_distance(traj.states[0], traj.states[-1])
    return PathLengthResult(
        length=length, endpoint_distance=endpoint, deficit=length - endpoint
    )
