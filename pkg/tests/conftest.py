"""Shared random-instance builders for the test campaigns."""

import numpy as np

from fsqd import HermitianOperator, StateVector


def random_unit(rng: np.random.Generator, dim: int) -> StateVector:
    raw = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    return StateVector(raw / np.linalg.norm(raw))


def random_hermitian(rng: np.random.Generator, dim: int, scale: float = 1.0) -> HermitianOperator:
    raw = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    return HermitianOperator(scale * (raw + raw.conj().T) / 2.0)


def random_nonzero_scalar(rng: np.random.Generator) -> complex:
    magnitude = np.exp(rng.uniform(-3, 3))
    phase = rng.uniform(0, 2 * np.pi)
    return magnitude * np.exp(1j * phase)
