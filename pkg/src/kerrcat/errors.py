"""Exception types raised across the package."""


class KerrCatError(Exception):
    """Base class for all package errors."""


class InvalidSpaceError(KerrCatError, ValueError):
    pass


class TruncationError(KerrCatError):
    """Fock cutoff too small for the requested amplitude."""

    def __init__(self, message: str, recommended_dim: int):
        super().__init__(f"{message} (recommended dim >= {recommended_dim})")
        self.recommended_dim = recommended_dim


class DimensionMismatchError(KerrCatError, ValueError):
    pass


class CollisionLimitError(KerrCatError, ValueError):
    """The minus-state normalization diverges because the two amplitudes coincide."""


class PrecisionError(KerrCatError, ValueError):
    pass


class DegenerateSelectorError(KerrCatError, ValueError):
    pass


class DegenerateTargetError(KerrCatError, ValueError):
    pass


class OpenPathError(KerrCatError, ValueError):
    pass


class UnpredictableHolonomyError(KerrCatError):
    """Raised when a schedule passes through a near-collision that has no closed-form holonomy."""


class InfeasibleTargetError(KerrCatError):
    def __init__(self, constraint: str, detail: str = ""):
        super().__init__(f"infeasible target: {constraint}" + (f" ({detail})" if detail else ""))
        self.constraint = constraint
        self.detail = detail
