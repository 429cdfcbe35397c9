"""Exception hierarchy for solver and configuration failures."""


class VortibcError(Exception):
    """Base class for all package errors."""


class InvalidSpec(VortibcError):
    """Domain specification violates its invariants."""


class ResolutionTooLow(VortibcError):
    """Grid resolution below the supported minimum."""


class NoBoundary(VortibcError):
    """Operation requires a boundary but the domain has none."""


class MissingTimeDerivative(VortibcError):
    """A norm or diagnostic needs a time derivative that was not supplied."""


class IncompatibleData(VortibcError):
    """Neumann data violates the solvability condition beyond tolerance."""


class SolverDiverged(VortibcError):
    """Linear solve failed to reach the requested residual."""


class LinearSolveFailed(VortibcError):
    """Sparse factorization or backsolve failed."""


class BCEnforcementFailed(VortibcError):
    """Ghost-value boundary system is singular."""


class BCViolation(VortibcError):
    """Input field violates a required boundary condition beyond tolerance."""


class DegenerateInput(VortibcError):
    """Input is identically zero where a ratio or fit would be 0/0."""


class CFLViolation(VortibcError):
    """Advective CFL number exceeds the configured limit."""


class NoContraction(VortibcError):
    """Picard iteration failed to contract over the configured window."""


class MaxIterExceeded(VortibcError):
    """Picard iteration hit the iteration cap before converging."""


class CirculationSystemSingular(VortibcError):
    """Streamfunction circulation constraint system is singular."""


class PartialSweep(VortibcError):
    """Some viscosities in a sweep failed; carries the completed rows."""

    def __init__(self, message, completed_rows=None):
        super().__init__(message)
        self.completed_rows = completed_rows or []


class ConfigError(VortibcError):
    """Run configuration failed to parse or validate."""
