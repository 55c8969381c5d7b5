"""Exception types shared across the package.

Everything derives from PucciLabError so callers can catch the whole
family at once; the CLI maps these onto its exit codes.
"""

from __future__ import annotations

__all__ = [
    "PucciLabError",
    "InputError",
    "ConvergenceError",
    "DegenerateCylinderError",
    "BoundaryProximityError",
    "GridFileError",
    "SingularGradientError",
    "CFLViolationError",
    "BlowUpError",
    "DegenerateFitError",
    "AlignmentError",
    "FaceDataError",
    "ConfigError",
]


class PucciLabError(Exception):
    """Base class for every error raised by this package."""


class InputError(PucciLabError):
    """Malformed numerical input: wrong shape, non-finite entries, bad range."""


class ConvergenceError(PucciLabError):
    """An iterative routine hit its iteration cap before reaching tolerance."""


class DegenerateCylinderError(PucciLabError):
    """A parabolic cylinder too small to contain any usable grid node."""


class BoundaryProximityError(PucciLabError):
    """A stencil was requested at a node without room for its footprint."""


class GridFileError(PucciLabError):
    """Grid-function file is corrupt: bad magic, bad metadata, or truncated payload."""


class SingularGradientError(PucciLabError):
    """Normalized p-Laplacian coefficients requested at a zero gradient with no regularization."""


class CFLViolationError(PucciLabError):
    """Explicit time step too large for the diffusion coefficients on this grid."""


class BlowUpError(PucciLabError):
    """A marched solution left the finite range; carries the offending step."""

    def __init__(self, message: str, step: int | None = None):
        super().__init__(message)
        self.step = step


class DegenerateFitError(PucciLabError):
    """Least-squares design matrix is rank deficient on the given node set."""


class AlignmentError(PucciLabError):
    """Rescaling radius incompatible with the lattice spacing."""


class FaceDataError(PucciLabError):
    """Half-space face values violate a precondition (for example, not zero)."""


class ConfigError(PucciLabError):
    """Scenario configuration failed validation."""
