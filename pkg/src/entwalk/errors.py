"""Exception types shared across the package."""


class WalkDomainError(ValueError):
    """An argument lies outside the domain an operation accepts."""


class InvariantViolation(RuntimeError):
    """A numerical invariant (norm, support, sizing) was broken during a run."""


class SpectralConsistencyError(RuntimeError):
    """A closed-form spectral quantity disagrees with its numerical counterpart.

    The message names the formula that failed so that transcription errors in
    the closed forms are easy to locate.
    """

    def __init__(self, formula: str, residual: float, tolerance: float):
        self.formula = formula
        self.residual = residual
        self.tolerance = tolerance
        super().__init__(
            f"{formula}: residual {residual:.3e} exceeds tolerance {tolerance:.1e}"
        )
