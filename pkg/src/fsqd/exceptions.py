"""Exception types shared across the package.

All are ValueError subclasses so callers that only care about "bad input"
can catch one base class, while the CLI can map parse problems and numerical
contract violations to distinct exit codes.
"""


class DimensionMismatchError(ValueError):
    """Objects that must share a Hilbert-space dimension do not."""


class NormalizationError(ValueError):
    """A state required to be normalized deviates beyond tolerance."""


class HermiticityError(ValueError):
    """A matrix required to be Hermitian deviates beyond tolerance."""


class ScheduleError(ValueError):
    """A Hamiltonian schedule is malformed or does not cover the requested window."""


class GridError(ValueError):
    """A time grid is empty, non-monotonic, or not uniform where uniformity is required."""


class ParseError(ValueError):
    """A document does not match the expected schema; message names the offending field."""
