"""Exception types shared across the package."""


class CapacityError(ValueError):
    """A dense materialization would exceed the configured size cap."""


class StripConditionError(ValueError):
    """A contour point violates the analyticity strip of a payoff transform."""


class NumericsError(RuntimeError):
    """Base class for numerical failures (CLI maps these to exit code 3)."""


class SingularMatrixError(NumericsError):
    """A pivot block or input matrix is numerically rank deficient."""

    def __init__(self, message, bond=None):
        super().__init__(message)
        self.bond = bond


class MaxvolIterationError(NumericsError):
    """maxvol row swaps did not settle within the iteration guard."""


class OracleBudgetError(NumericsError):
    """The configured oracle-call budget would be exceeded."""


class ResidueError(NumericsError):
    """The imaginary residue of a contour sum exceeded its tolerance."""
