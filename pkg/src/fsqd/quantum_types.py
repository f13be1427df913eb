"""Core value types for pure states and Hermitian operators.

A pure state is a vector of complex amplitudes (z_1, ..., z_N) in an
N-dimensional Hilbert space; physically it is meaningful only up to a global
complex factor, which `Ray` captures by fixing a phase gauge. Hermitian
operators carry a cached spectral decomposition used for exact propagation.

All types are immutable after construction and every operation here is a
pure function, so values can be shared freely across threads.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass
from typing import Union

import numpy as np

from .exceptions import (
    DimensionMismatchError,
    HermiticityError,
    NormalizationError,
)

__all__ = [
    "NORM_ACCEPT_TOL",
    "StateVector",
    "Ray",
    "HermitianOperator",
    "PhysicalConstants",
    "DEFAULT_CONSTANTS",
    "as_constants",
    "inner_product",
    "normalize",
    "expectation",
    "energy_uncertainty",
    "spectral_decomposition",
]

# Norm deviation accepted at API boundaries; beyond this, callers must
# renormalize explicitly via `normalize`.
NORM_ACCEPT_TOL = 1e-9

# Relative tolerance for the Hermiticity check at operator construction.
HERMITICITY_RTOL = 1e-10

# Components with magnitude at or below this (on a unit vector) are treated
# as zero when picking the gauge component of a ray.
_GAUGE_EPS = 1e-12


def _as_complex_vector(amplitudes) -> np.ndarray:
    arr = np.asarray(amplitudes, dtype=np.complex128)
    if arr.ndim != 1:
        raise ValueError(f"amplitudes must be one-dimensional, got shape {arr.shape}")
    return arr


@dataclass(frozen=True, eq=False)
class StateVector:
    """Complex amplitude vector (z_1, ..., z_N) of a pure state.

    The vector is not required to have unit norm at construction (so it can
    be fed to `normalize`), but the zero vector and dimensions below 2 are
    rejected outright. Operations that need a normalized state accept a norm
    deviation of at most ``NORM_ACCEPT_TOL``.
    """

    amplitudes: np.ndarray

    def __post_init__(self):
        arr = _as_complex_vector(self.amplitudes).copy()
        if arr.size < 2:
            raise ValueError(f"state dimension must be at least 2, got {arr.size}")
        if not np.all(np.isfinite(arr)):
            raise ValueError("amplitudes must be finite complex numbers")
        if not arr.any():
            raise ValueError("the zero vector is not a valid state")
        arr.flags.writeable = False
        object.__setattr__(self, "amplitudes", arr)

    @property
    def dim(self) -> int:
        return self.amplitudes.size

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def is_normalized(self, tol: float = NORM_ACCEPT_TOL) -> bool:
        return abs(np.vdot(self.amplitudes, self.amplitudes).real - 1.0) <= tol

    def require_normalized(self, context: str = "state") -> None:
        deviation = abs(np.vdot(self.amplitudes, self.amplitudes).real - 1.0)
        if deviation > NORM_ACCEPT_TOL:
            raise NormalizationError(
                f"{context} has ⟨ψ|ψ⟩ = {np.vdot(self.amplitudes, self.amplitudes).real!r}, "
                f"deviating from 1 by {deviation:.3e} (tolerance {NORM_ACCEPT_TOL:.0e}); "
                "renormalize explicitly if intended"
            )

    def __repr__(self) -> str:
        return f"StateVector(dim={self.dim}, amplitudes={self.amplitudes!r})"


def _require_same_dim(a_dim: int, b_dim: int, what: str = "states") -> None:
    if a_dim != b_dim:
        raise DimensionMismatchError(f"{what} have mismatched dimensions: {a_dim} vs {b_dim}")


def _gauge_fix(amplitudes: np.ndarray) -> np.ndarray:
    """Rotate a unit vector so its first non-negligible component is real > 0."""
    magnitudes = np.abs(amplitudes)
    significant = np.nonzero(magnitudes > _GAUGE_EPS)[0]
    if significant.size == 0:
        raise ValueError("cannot gauge-fix a numerically zero vector")
    pivot = significant[0]
    phase = amplitudes[pivot] / magnitudes[pivot]
    return amplitudes * np.conj(phase)


@dataclass(frozen=True, eq=False)
class Ray:
    """Projective equivalence class [z] of states differing by a complex factor.

    The stored representative is normalized and gauge-fixed: the first
    component whose magnitude exceeds 1e-12 is made real and positive. Any
    two inputs related by a nonzero complex scalar therefore map to
    representatives equal componentwise to within ~1e-12.
    """

    representative: StateVector

    def __post_init__(self):
        rep = self.representative
        if not isinstance(rep, StateVector):
            rep = StateVector(_as_complex_vector(rep))
        amps = rep.amplitudes / np.linalg.norm(rep.amplitudes)
        object.__setattr__(self, "representative", StateVector(_gauge_fix(amps)))

    @property
    def dim(self) -> int:
        return self.representative.dim

    def __repr__(self) -> str:
        return f"Ray({self.representative.amplitudes!r})"


class HermitianOperator:
    """N x N complex Hermitian matrix (e.g. a Hamiltonian) with cached spectrum.

    The input must satisfy ‖M − M†‖_max ≤ 1e-10 · max(1, ‖M‖_max); the stored
    matrix is then the exact symmetrization (M + M†)/2, which keeps the
    spectrum real and the downstream propagator unitary. The eigensystem is
    computed lazily on first access behind a lock, so concurrent first access
    is race-free and deterministic.
    """

    def __init__(self, matrix):
        arr = np.asarray(matrix, dtype=np.complex128)
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
            raise ValueError(f"operator matrix must be square, got shape {arr.shape}")
        if arr.shape[0] < 2:
            raise ValueError(f"operator dimension must be at least 2, got {arr.shape[0]}")
        if not np.all(np.isfinite(arr)):
            raise ValueError("operator entries must be finite complex numbers")
        scale = max(1.0, float(np.max(np.abs(arr))))
        deviation = np.abs(arr - arr.conj().T)
        worst = float(deviation.max())
        if worst > HERMITICITY_RTOL * scale:
            i, j = np.unravel_index(int(deviation.argmax()), deviation.shape)
            raise HermiticityError(
                f"matrix is not Hermitian: |M − M†| = {worst:.6e} at "
                f"({i + 1},{j + 1})/({j + 1},{i + 1}) exceeds {HERMITICITY_RTOL:.0e}·max(1, ‖M‖_max)"
            )
        hermitized = (arr + arr.conj().T) / 2.0
        hermitized.flags.writeable = False
        self._matrix = hermitized
        self._lock = threading.Lock()
        self._eigenvalues: np.ndarray | None = None
        self._eigenvector_matrix: np.ndarray | None = None

    @property
    def matrix(self) -> np.ndarray:
        return self._matrix

    @property
    def dim(self) -> int:
        return self._matrix.shape[0]

    def _eigensystem(self) -> tuple[np.ndarray, np.ndarray]:
        """Ascending eigenvalues and the raw unitary eigenvector matrix."""
        if self._eigenvalues is None:
            with self._lock:
                if self._eigenvalues is None:
                    values, vectors = np.linalg.eigh(self._matrix)
                    values.flags.writeable = False
                    vectors.flags.writeable = False
                    # publish the guard attribute last: lock-free readers
                    # test _eigenvalues before touching the vectors
                    self._eigenvector_matrix = vectors
                    self._eigenvalues = values
        return self._eigenvalues, self._eigenvector_matrix

    @property
    def spectrum(self) -> np.ndarray:
        return self._eigensystem()[0]

    @property
    def eigenvectors(self) -> tuple[StateVector, ...]:
        _, vectors = self._eigensystem()
        return tuple(StateVector(_gauge_fix(vectors[:, k])) for k in range(self.dim))

    def apply(self, psi: StateVector) -> np.ndarray:
        _require_same_dim(self.dim, psi.dim, "operator and state")
        return self._matrix @ psi.amplitudes

    def __repr__(self) -> str:
        return f"HermitianOperator(dim={self.dim})"


@dataclass(frozen=True)
class PhysicalConstants:
    """Physical constants entering the dynamics; ℏ defaults to 1 (natural units)."""

    hbar: float = 1.0

    def __post_init__(self):
        if not (np.isfinite(self.hbar) and self.hbar > 0):
            raise ValueError(f"hbar must be a positive finite real, got {self.hbar!r}")


DEFAULT_CONSTANTS = PhysicalConstants()


def as_constants(value: Union[PhysicalConstants, float, int, None]) -> PhysicalConstants:
    """Coerce a bare positive number (or None) to PhysicalConstants."""
    if value is None:
        return DEFAULT_CONSTANTS
    if isinstance(value, PhysicalConstants):
        return value
    return PhysicalConstants(float(value))


def inner_product(a: StateVector, b: StateVector) -> complex:
    """Hermitian inner product ⟨a|b⟩ = Σ_i conj(a_i)·b_i.

    Conjugate-linear in the first argument; ``inner_product(a, a)`` is real
    and non-negative.
    """
    _require_same_dim(a.dim, b.dim)
    return complex(np.vdot(a.amplitudes, b.amplitudes))


def normalize(v: StateVector) -> StateVector:
    """Return the unit-norm state parallel to ``v``."""
    return StateVector(v.amplitudes / np.linalg.norm(v.amplitudes))


def expectation(H: HermitianOperator, psi: StateVector) -> float:
    """Energy moment ⟨ψ|H|ψ⟩ of a normalized state.

    The value is real for Hermitian H; any floating-point imaginary residue
    is checked against 1e-12·max(1, ‖H‖_max) and discarded.
    """
    psi.require_normalized()
    value = np.vdot(psi.amplitudes, H.apply(psi))
    scale = max(1.0, float(np.max(np.abs(H.matrix))))
    if abs(value.imag) > 1e-12 * scale:
        raise ArithmeticError(
            f"expectation of a Hermitian operator came out complex: {value!r}"
        )
    return float(value.real)


def energy_uncertainty(H: HermitianOperator, psi: StateVector) -> float:
    """Standard deviation ΔH = √(⟨ψ|H²|ψ⟩ − ⟨ψ|H|ψ⟩²) in a normalized state.

    Evaluated as ‖(H − ⟨H⟩)ψ‖, which is algebraically identical but avoids
    the cancellation the two-moment form suffers near eigenstates.
    """
    mean = expectation(H, psi)
    residual = H.apply(psi) - mean * psi.amplitudes
    return float(np.linalg.norm(residual))


def spectral_decomposition(
    H: HermitianOperator,
) -> tuple[np.ndarray, tuple[StateVector, ...]]:
    """Ascending eigenvalues of H and the matching orthonormal eigenvectors.

    Eigenvectors are gauge-fixed (first non-negligible component real and
    positive) so repeated runs on the same input produce identical output.
    Within a degenerate eigenspace the basis choice is whatever the dense
    solver returns, deterministically.
    """
    return H.spectrum, H.eigenvectors
