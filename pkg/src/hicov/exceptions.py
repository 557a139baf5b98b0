"""Exception types shared across the package."""


class NotPositiveDefiniteError(ValueError):
    """A matrix required to be positive definite failed the pivot check.

    ``pivot_index`` is the zero-based index of the first non-positive
    pivot of the triangular factorization, when known.
    """

    def __init__(self, message: str, pivot_index: int | None = None):
        super().__init__(message)
        self.pivot_index = pivot_index


class NotPSDError(ValueError):
    """A matrix has an eigenvalue too far below zero to be treated as PSD."""


class InvalidRegimeError(ValueError):
    """The dimension-to-sample ratio p/n must lie in (0, 1) for this operation."""
