"""Unitary time evolution of pure states.

Time-independent Hamiltonians are propagated exactly through their spectral
decomposition, ψ(t) = V·exp(−iΛt/ℏ)·V†·ψ(0). Time-dependent schedules are
stepped on a uniform grid with the Hamiltonian frozen at each step's midpoint
(first-order Magnus), which keeps every step exactly unitary and the overall
method second-order accurate.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Mapping, Sequence

import numpy as np

from .exceptions import (
    DimensionMismatchError,
    GridError,
    NormalizationError,
    ScheduleError,
)
from .quantum_types import (
    DEFAULT_CONSTANTS,
    HermitianOperator,
    PhysicalConstants,
    StateVector,
    as_constants,
)

__all__ = [
    "HamiltonianSchedule",
    "Trajectory",
    "evolve_exact",
    "evolve_schedule",
    "sample_trajectory",
]

# Per-point norm drift beyond this is silently repaired (and counted in the
# trajectory digest); beyond _DRIFT_ERROR it indicates an integrator bug.
_DRIFT_RENORM = 1e-12
_DRIFT_ERROR = 1e-6

_KINDS = ("constant", "piecewise_constant", "sampled")


@dataclass(frozen=True, eq=False)
class HamiltonianSchedule:
    """Hamiltonian as a function of time.

    Three kinds are supported:

    * ``constant`` — one operator, defined for all t;
    * ``piecewise_constant`` — ordered (t_start, operator) breakpoints, each
      segment extending to the next breakpoint (the last one to +∞);
    * ``sampled`` — a table of (t, operator) samples, evaluated between
      samples by entrywise linear interpolation (convex combinations of
      Hermitian matrices stay Hermitian).
    """

    kind: str
    breakpoints: np.ndarray
    operators: tuple[HermitianOperator, ...]

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise ScheduleError(f"unknown schedule kind {self.kind!r}; expected one of {_KINDS}")
        times = np.asarray(self.breakpoints, dtype=np.float64).copy()
        ops = tuple(self.operators)
        if times.ndim != 1 or times.size != len(ops) or not ops:
            raise ScheduleError(
                f"schedule needs one breakpoint per operator, got {times.size} times "
                f"and {len(ops)} operators"
            )
        if np.any(np.diff(times) <= 0):
            raise ScheduleError("schedule breakpoint times must be strictly ascending")
        dims = {op.dim for op in ops}
        if len(dims) != 1:
            raise DimensionMismatchError(
                f"all schedule operators must share one dimension, got {sorted(dims)}"
            )
        if self.kind == "sampled" and len(ops) < 2:
            raise ScheduleError("a sampled schedule needs at least 2 samples")
        times.flags.writeable = False
        object.__setattr__(self, "breakpoints", times)
        object.__setattr__(self, "operators", ops)

    @classmethod
    def constant(cls, H: HermitianOperator) -> "HamiltonianSchedule":
        return cls(kind="constant", breakpoints=np.array([0.0]), operators=(H,))

    @classmethod
    def piecewise_constant(
        cls, segments: Sequence[tuple[float, HermitianOperator]]
    ) -> "HamiltonianSchedule":
        times = np.array([t for t, _ in segments], dtype=np.float64)
        ops = tuple(op for _, op in segments)
        return cls(kind="piecewise_constant", breakpoints=times, operators=ops)

    @classmethod
    def sampled(
        cls, times: Sequence[float], operators: Sequence[HermitianOperator]
    ) -> "HamiltonianSchedule":
        return cls(
            kind="sampled",
            breakpoints=np.asarray(times, dtype=np.float64),
            operators=tuple(operators),
        )

    @property
    def dim(self) -> int:
        return self.operators[0].dim

    def covers(self, t_start: float, t_end: float) -> bool:
        if self.kind == "constant":
            return True
        if self.kind == "piecewise_constant":
            return self.breakpoints[0] <= t_start
        return self.breakpoints[0] <= t_start and t_end <= self.breakpoints[-1]

    def at(self, t: float) -> HermitianOperator:
        """Hamiltonian in effect at time ``t``."""
        if self.kind == "constant":
            return self.operators[0]
        times = self.breakpoints
        if self.kind == "piecewise_constant":
            if t < times[0]:
                raise ScheduleError(
                    f"schedule gap: t = {t!r} precedes the first breakpoint {times[0]!r}"
                )
            idx = int(np.searchsorted(times, t, side="right")) - 1
            return self.operators[idx]
        # sampled
        if t < times[0] or t > times[-1]:
            raise ScheduleError(
                f"schedule gap: t = {t!r} outside the sampled window "
                f"[{times[0]!r}, {times[-1]!r}]"
            )
        right = int(np.searchsorted(times, t, side="left"))
        if times[right] == t:
            return self.operators[right]
        left = right - 1
        theta = (t - times[left]) / (times[right] - times[left])
        blended = (1.0 - theta) * self.operators[left].matrix + theta * self.operators[
            right
        ].matrix
        return HermitianOperator(blended)

    def describe(self) -> dict[str, Any]:
        info: dict[str, Any] = {
            "kind": self.kind,
            "dim": self.dim,
            "segments": len(self.operators),
        }
        if self.kind != "constant":
            info["t_first"] = float(self.breakpoints[0])
            info["t_last"] = float(self.breakpoints[-1])
        return info


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Time-ordered samples (t_k, ψ(t_k)) plus a digest of how they were made."""

    times: np.ndarray
    states: tuple[StateVector, ...]
    schedule_digest: Mapping[str, Any]

    def __post_init__(self):
        times = np.asarray(self.times, dtype=np.float64).copy()
        states = tuple(self.states)
        if times.ndim != 1 or times.size == 0 or times.size != len(states):
            raise GridError(
                f"trajectory needs matching non-empty grids, got {times.size} times "
                f"and {len(states)} states"
            )
        if np.any(np.diff(times) <= 0):
            raise GridError("trajectory times must be strictly ascending")
        dims = {s.dim for s in states}
        if len(dims) != 1:
            raise DimensionMismatchError(
                f"all trajectory states must share one dimension, got {sorted(dims)}"
            )
        for k, state in enumerate(states):
            if not state.is_normalized():
                state.require_normalized(f"trajectory state at index {k}")
        times.flags.writeable = False
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "states", states)

    @property
    def dim(self) -> int:
        return self.states[0].dim

    def amplitude_matrix(self) -> np.ndarray:
        """States stacked row-wise into a (points, dim) complex array."""
        return np.stack([s.amplitudes for s in self.states])

    def __len__(self) -> int:
        return self.times.size


def _propagate(amps: np.ndarray, H: HermitianOperator, t: float, hbar: float) -> np.ndarray:
    values, vectors = H._eigensystem()
    coeffs = vectors.conj().T @ amps
    coeffs = coeffs * np.exp(-1j * values * (t / hbar))
    return vectors @ coeffs


def evolve_exact(
    psi0: StateVector,
    H: HermitianOperator,
    t: float,
    constants: PhysicalConstants | float = DEFAULT_CONSTANTS,
) -> StateVector:
    """Propagate a normalized state by the exact unitary V·exp(−iΛt/ℏ)·V†.

    ``t`` may be negative (reverse evolution); ``t = 0`` returns the input
    state unchanged.
    """
    constants = as_constants(constants)
    if H.dim != psi0.dim:
        raise DimensionMismatchError(
            f"operator and state have mismatched dimensions: {H.dim} vs {psi0.dim}"
        )
    psi0.require_normalized("initial state")
    if not np.isfinite(t):
        raise ValueError(f"evolution time must be finite, got {t!r}")
    if t == 0.0:
        return psi0
    return StateVector(_propagate(psi0.amplitudes, H, float(t), constants.hbar))


def _checked_state(amps: np.ndarray, counter: list[int]) -> StateVector:
    norm = float(np.linalg.norm(amps))
    drift = abs(norm - 1.0)
    if drift > _DRIFT_ERROR:
        raise NormalizationError(
            f"propagated state norm drifted by {drift:.3e}; integrator contract broken"
        )
    if drift > _DRIFT_RENORM:
        counter[0] += 1
        amps = amps / norm
    return StateVector(amps)


def _validate_run(t_end: float, steps: int) -> None:
    if isinstance(steps, bool) or not isinstance(steps, (int, np.integer)) or steps < 1:
        raise GridError(f"steps must be a positive integer, got {steps!r}")
    try:
        t_end = float(t_end)
    except (TypeError, ValueError):
        raise GridError(f"t_end must be a positive real, got {t_end!r}") from None
    if not (np.isfinite(t_end) and t_end > 0):
        raise GridError(f"t_end must be positive and finite, got {t_end!r}")


def sample_trajectory(
    psi0: StateVector,
    H: HermitianOperator,
    t_end: float,
    steps: int,
    constants: PhysicalConstants | float = DEFAULT_CONSTANTS,
) -> Trajectory:
    """Exact evolution under a constant Hamiltonian, sampled on a uniform grid.

    Every grid state is computed directly from ψ(0), so there is no step-to-
    step error accumulation.
    """
    constants = as_constants(constants)
    _validate_run(t_end, steps)
    if H.dim != psi0.dim:
        raise DimensionMismatchError(
            f"operator and state have mismatched dimensions: {H.dim} vs {psi0.dim}"
        )
    psi0.require_normalized("initial state")
    times = np.linspace(0.0, float(t_end), steps + 1)
    values, vectors = H._eigensystem()
    coeffs0 = vectors.conj().T @ psi0.amplitudes
    phases = np.exp(-1j * np.outer(times, values) / constants.hbar)
    rows = (phases * coeffs0) @ vectors.T
    renorms = [0]
    states = [psi0]
    for k in range(1, times.size):
        states.append(_checked_state(rows[k], renorms))
    digest = {
        "schedule": {"kind": "constant", "dim": H.dim, "segments": 1},
        "stepper": {
            "method": "exact_spectral",
            "steps": int(steps),
            "t_end": float(t_end),
            "hbar": constants.hbar,
        },
        "renormalized_points": renorms[0],
    }
    return Trajectory(times=times, states=tuple(states), schedule_digest=digest)


def evolve_schedule(
    psi0: StateVector,
    sched: HamiltonianSchedule,
    t_end: float,
    steps: int,
    constants: PhysicalConstants | float = DEFAULT_CONSTANTS,
) -> Trajectory:
    """Step a state through a (possibly time-dependent) schedule on [0, t_end].

    Within each uniform step the Hamiltonian is frozen at the step midpoint
    and applied exactly, so each step is unitary and a constant schedule
    reproduces `evolve_exact` at every grid point.
    """
    constants = as_constants(constants)
    _validate_run(t_end, steps)
    if sched.dim != psi0.dim:
        raise DimensionMismatchError(
            f"schedule and state have mismatched dimensions: {sched.dim} vs {psi0.dim}"
        )
    psi0.require_normalized("initial state")
    if not sched.covers(0.0, float(t_end)):
        raise ScheduleError(
            f"schedule does not cover the evolution window [0, {t_end!r}]"
        )
    times = np.linspace(0.0, float(t_end), steps + 1)
    dt = float(t_end) / steps
    renorms = [0]
    states = [psi0]
    amps = psi0.amplitudes
    for k in range(steps):
        midpoint = 0.5 * (times[k] + times[k + 1])
        H_mid = sched.at(float(midpoint))
        amps = _propagate(amps, H_mid, dt, constants.hbar)
        state = _checked_state(amps, renorms)
        amps = state.amplitudes
        states.append(state)
    digest = {
        "schedule": sched.describe(),
        "stepper": {
            "method": "midpoint_frozen",
            "steps": int(steps),
            "t_end": float(t_end),
            "hbar": constants.hbar,
        },
        "renormalized_points": renorms[0],
    }
    return Trajectory(times=times, states=tuple(states), schedule_digest=digest)
