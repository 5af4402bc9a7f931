"""Exception types raised by the library.

Every error carries enough context (offending value, tolerance, residual)
to act on without re-running the computation.
"""


class DickeRampError(Exception):
    """Base class for all library errors."""


class BasisMismatch(DickeRampError):
    """Operands live on different bases (or basis/parameter N disagree)."""


class TruncationError(DickeRampError):
    """State population at the Fock cutoff exceeds the allowed bound."""


class CutoffError(DickeRampError):
    """Fock cutoff too small to retain the requested thermal weight mass."""


class ConvergenceError(DickeRampError):
    """Iterative eigensolver failed; carries the residual report."""

    def __init__(self, message, residuals=None):
        super().__init__(message)
        self.residuals = residuals


class ParityAmbiguous(DickeRampError):
    """Eigenstate parity expectation below the classification threshold."""


class EdgeMinimum(DickeRampError):
    """Gap minimum sits on the boundary of the scanned field grid."""


class SingularGap(DickeRampError):
    """Gap curve is non-positive somewhere inside the ramp interval."""


class CoverageError(DickeRampError):
    """Gap curve does not cover the field range required by the schedule."""


class RangeError(DickeRampError):
    """Requested sample times fall outside the schedule domain."""


class ToleranceError(DickeRampError):
    """Integrator norm/trace drift exceeded its budget."""


class CostGuard(DickeRampError):
    """Requested problem size exceeds the guard for this method."""


class ProtocolError(DickeRampError):
    """Disentangling self-test left a residual phonon displacement."""


class NoBracket(DickeRampError):
    """Scanned curve does not change sign, no zero crossing to extract."""


class ConfigError(DickeRampError):
    """Scenario configuration failed schema validation."""
