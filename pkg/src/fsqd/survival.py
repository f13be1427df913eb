"""Survival amplitude, the cosine decay prediction, and decay rates.

The survival amplitude of an evolving state is A_t = ⟨ψ(0)|ψ(t)⟩, with
survival probability |A_t|². Geometrically, the claim under test here is

    |A_t| = cos(∫₀ᵗ ΔH/ℏ dt),

which for a time-independent Hamiltonian becomes |A_t| = cos(t·ΔH/ℏ). The
Mandelstam-Tamm inequality guarantees |A_t| ≥ cos(t·ΔH/ℏ) wherever
t·ΔH/ℏ ≤ π/2, with equality exactly on geodesic evolutions; this module
exposes both the measured amplitude and the cosine prediction so the two can
be compared, plus the decay rate w = d(1−|A_t|²)/dt in empirical
(finite-difference) and closed (sin) forms.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .dynamics import HamiltonianSchedule, Trajectory
from .exceptions import GridError
from .geometry import fs_rate
from .quantum_types import (
    DEFAULT_CONSTANTS,
    HermitianOperator,
    PhysicalConstants,
    StateVector,
    as_constants,
)

__all__ = [
    "SurvivalReport",
    "CosinePrediction",
    "survival_amplitude",
    "predicted_amplitude",
    "mt_check",
    "decay_velocity",
    "decay_rate_empirical",
    "decay_rate_closed",
    "build_survival_report",
]

# Slack added to the π/2 domain boundary so a grid point landing exactly on
# the horizon is not flagged out-of-domain by rounding.
_DOMAIN_SLACK = 1e-12

# Default violation tolerances: exact spectral propagation vs midpoint-stepped
# time-dependent schedules.
MT_TOL_EXACT = 1e-9
MT_TOL_STEPPED = 1e-7

# Relative spacing deviation accepted when a uniform grid is required.
_UNIFORM_RTOL = 1e-9


@dataclass(frozen=True)
class CosinePrediction:
    """cos(∫ΔH/ℏ dt) per grid point, with validity flags.

    ``values[k] = cos(integral[k])`` everywhere; ``in_domain[k]`` is False once
    the accumulated integral exceeds π/2, where a cosine can no longer equal a
    magnitude and the prediction is undefined.
    """

    values: np.ndarray
    in_domain: np.ndarray
    integral: np.ndarray


@dataclass(frozen=True, eq=False)
class SurvivalReport:
    """Per-time-point survival record.

    Out-of-domain entries of ``predicted_abs`` and ``mt_bound`` are NaN and
    serialize as empty CSV cells / JSON nulls. ``violations`` lists
    (index, depth) pairs where the measured amplitude fell below the
    Mandelstam-Tamm bound by more than the tolerance; it is None when the
    generating schedule was not constant (the bound needs a fixed ΔH).
    """

    times: np.ndarray
    amplitude_abs: np.ndarray
    probability: np.ndarray
    predicted_abs: np.ndarray
    predicted_in_domain: np.ndarray
    mt_bound: np.ndarray
    decay_rate_empirical: np.ndarray
    decay_rate_closed: np.ndarray
    violations: Optional[tuple[tuple[int, float], ...]]

    def __post_init__(self):
        arrays = {
            "times": np.float64,
            "amplitude_abs": np.float64,
            "probability": np.float64,
            "predicted_abs": np.float64,
            "predicted_in_domain": np.bool_,
            "mt_bound": np.float64,
            "decay_rate_empirical": np.float64,
            "decay_rate_closed": np.float64,
        }
        n = None
        for name, dtype in arrays.items():
            arr = np.asarray(getattr(self, name), dtype=dtype).copy()
            if arr.ndim != 1:
                raise GridError(f"report field {name} must be one-dimensional")
            if n is None:
                n = arr.size
            elif arr.size != n:
                raise GridError(
                    f"report field {name} has {arr.size} entries, expected {n}"
                )
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)
        if n == 0:
            raise GridError("report needs at least one time point")
        for name in ("times", "amplitude_abs", "probability"):
            if not np.all(np.isfinite(getattr(self, name))):
                raise ValueError(f"report field {name} must be finite")
        if np.any(self.amplitude_abs < 0) or np.any(self.amplitude_abs > 1 + 1e-12):
            raise ValueError("amplitude_abs out of [0, 1 + 1e-12]")
        if np.max(np.abs(self.probability - self.amplitude_abs**2)) > 1e-12:
            raise ValueError("probability must equal amplitude_abs² within 1e-12")
        if self.violations is not None:
            object.__setattr__(
                self,
                "violations",
                tuple((int(i), float(m)) for i, m in self.violations),
            )

    def __len__(self) -> int:
        return self.times.size


def survival_amplitude(traj: Trajectory) -> np.ndarray:
    """A_{t_k} = ⟨ψ(t₀)|ψ(t_k)⟩ along a trajectory; A_{t₀} = 1 within 1e-12."""
    matrix = traj.amplitude_matrix()
    return matrix @ matrix[0].conj()


def _accumulated_rate_integral(
    traj: Trajectory,
    sched: HamiltonianSchedule,
    constants: PhysicalConstants,
) -> np.ndarray:
    """Cumulative trapezoid of ΔH(t)/ℏ on the trajectory grid; starts at 0."""
    rates = np.array(
        [fs_rate(state, sched.at(float(t)), constants) for t, state in zip(traj.times, traj.states)]
    )
    if rates.size == 1:
        return np.zeros(1)
    increments = 0.5 * (rates[1:] + rates[:-1]) * np.diff(traj.times)
    return np.concatenate([[0.0], np.cumsum(increments)])


def predicted_amplitude(
    traj: Trajectory,
    sched: HamiltonianSchedule,
    constants: PhysicalConstants | float = DEFAULT_CONSTANTS,
) -> CosinePrediction:
    """Cosine prediction cos(∫₀ᵗ ΔH/ℏ dt) for |A_t| along a trajectory.

    Points where the accumulated integral exceeds π/2 are flagged
    out-of-domain: cos turns negative there while |A_t| ≥ 0, so the equality
    cannot hold in that form.
    """
    constants = as_constants(constants)
    integral = _accumulated_rate_integral(traj, sched, constants)
    return CosinePrediction(
        values=np.cos(integral),
        in_domain=integral <= math.pi / 2 + _DOMAIN_SLACK,
        integral=integral,
    )


def mt_check(
    traj: Trajectory,
    H: HermitianOperator,
    constants: PhysicalConstants | float = DEFAULT_CONSTANTS,
    tol: float = MT_TOL_EXACT,
) -> list[tuple[int, float]]:
    """Check |A_{t_k}| ≥ cos(t_k·ΔH/ℏ) − tol on the in-domain grid points.

    ΔH is evaluated in the initial state (constant-H trajectories only, where
    it is conserved). Returns (index, depth) for every violating point, depth
    being how far the amplitude fell below the bound; empty for correct
    unitary dynamics.
    """
    if tol <= 0:
        raise ValueError(f"tolerance must be positive, got {tol!r}")
    constants = as_constants(constants)
    rate = fs_rate(traj.states[0], H, constants)
    amplitude = np.abs(survival_amplitude(traj))
    # elapsed time since the reference state, for grids not anchored at 0
    angles = (traj.times - traj.times[0]) * rate
    in_domain = angles <= math.pi / 2 + _DOMAIN_SLACK
    depth = np.cos(angles) - amplitude
    violations = []
    for idx in np.nonzero(in_domain & (depth > tol))[0]:
        violations.append((int(idx), float(depth[idx])))
    return violations


def decay_velocity(
    psi: StateVector,
    H: HermitianOperator,
    constants: PhysicalConstants | float = DEFAULT_CONSTANTS,
) -> float:
    """Decay velocity v_d = ΔH/ℏ.

    This is the same quantity as `geometry.fs_rate` (the speed of the ray in
    projective space); the two names share one implementation.
    """
    return fs_rate(psi, H, constants)


def _uniform_spacing(times: np.ndarray) -> float:
    diffs = np.diff(times)
    h = float(diffs[0])
    if np.any(np.abs(diffs - h) > _UNIFORM_RTOL * max(abs(h), 1e-300)):
        raise GridError("decay-rate differentiation needs a uniform time grid")
    return h


def decay_rate_empirical(report_times, probability) -> np.ndarray:
    """Decay rate w = d(1−|A_t|²)/dt by finite differences on a uniform grid.

    Second-order central stencils in the interior, second-order one-sided
    stencils at both ends; needs at least 3 points.
    """
    times = np.asarray(report_times, dtype=np.float64)
    prob = np.asarray(probability, dtype=np.float64)
    if times.ndim != 1 or prob.ndim != 1 or times.size != prob.size:
        raise GridError(
            f"times and probabilities must be 1-D of equal length, got "
            f"{times.size} and {prob.size}"
        )
    if times.size < 3:
        raise GridError(f"decay rate needs at least 3 grid points, got {times.size}")
    if np.any(np.diff(times) <= 0):
        raise GridError("time grid must be strictly ascending")
    h = _uniform_spacing(times)
    return np.gradient(1.0 - prob, h, edge_order=2)


def decay_rate_closed(
    t,
    delta_h: float,
    constants: PhysicalConstants | float = DEFAULT_CONSTANTS,
    accumulated_integral=None,
):
    """Closed-form decay rate.

    With a constant Hamiltonian, w = sin(2t·ΔH/ℏ)·ΔH/ℏ. If
    ``accumulated_integral`` I = ∫₀ᵗ ΔH/ℏ dt is supplied (time-dependent
    case), w = sin(2I)·ΔH/ℏ with ΔH taken at the current time.

    Accepts scalar or array ``t`` / ``accumulated_integral`` / ``delta_h``.
    """
    constants = as_constants(constants)
    delta_h = np.asarray(delta_h, dtype=np.float64)
    if np.any(delta_h < 0):
        raise ValueError("delta_h must be non-negative")
    rate = delta_h / constants.hbar
    if accumulated_integral is None:
        phase = 2.0 * np.asarray(t, dtype=np.float64) * rate
    else:
        integral = np.asarray(accumulated_integral, dtype=np.float64)
        if np.any(integral < 0):
            raise ValueError("accumulated_integral must be non-negative")
        phase = 2.0 * integral
    result = np.sin(phase) * rate
    if np.ndim(result) == 0:
        return float(result)
    return result


def build_survival_report(
    traj: Trajectory,
    sched: HamiltonianSchedule,
    constants: PhysicalConstants | float = DEFAULT_CONSTANTS,
) -> SurvivalReport:
    """Aggregate amplitude, prediction, bound, and decay rates into one record.

    The Mandelstam-Tamm bound column and violation scan apply only when the
    schedule is constant; for time-dependent schedules they are left empty
    (NaN / None). The empirical decay rate needs at least 3 uniformly spaced
    points and is otherwise left as NaN.
    """
    constants = as_constants(constants)
    amplitude = np.abs(survival_amplitude(traj))
    probability = amplitude**2
    prediction = predicted_amplitude(traj, sched, constants)
    predicted_masked = np.where(prediction.in_domain, prediction.values, np.nan)

    n = len(traj)
    elapsed = traj.times - traj.times[0]
    if sched.kind == "constant":
        H = sched.at(0.0)
        rate0 = fs_rate(traj.states[0], H, constants)
        angles = elapsed * rate0
        bound_domain = angles <= math.pi / 2 + _DOMAIN_SLACK
        mt_bound = np.where(bound_domain, np.cos(angles), np.nan)
        tol = MT_TOL_EXACT
        if traj.schedule_digest.get("stepper", {}).get("method") == "midpoint_frozen":
            tol = MT_TOL_STEPPED
        violations: Optional[tuple] = tuple(mt_check(traj, H, constants, tol))
        w_closed = decay_rate_closed(elapsed, rate0 * constants.hbar, constants)
    else:
        mt_bound = np.full(n, np.nan)
        violations = None
        rates = np.array(
            [
                fs_rate(state, sched.at(float(t)), constants)
                for t, state in zip(traj.times, traj.states)
            ]
        )
        w_closed = np.sin(2.0 * prediction.integral) * rates

    try:
        w_empirical = decay_rate_empirical(traj.times, probability)
    except GridError:
        w_empirical = np.full(n, np.nan)

    return SurvivalReport(
        times=traj.times,
        amplitude_abs=amplitude,
        probability=probability,
        predicted_abs=predicted_masked,
        predicted_in_domain=prediction.in_domain,
        mt_bound=mt_bound,
        decay_rate_empirical=w_empirical,
        decay_rate_closed=np.asarray(w_closed, dtype=np.float64),
        violations=violations,
    )
