"""Exception hierarchy shared by every module.

The CLI maps these onto its exit codes (2 for validation, 3 for resources).
"""


class CoarseLabError(Exception):
    pass


class ValidationError(CoarseLabError, ValueError):
    """Bad input: mismatched specs, invalid congruences, failed preconditions."""

    def __init__(self, message, certificate=None):
        super().__init__(message)
        self.certificate = certificate


class ResourceError(CoarseLabError):
    """A configured cap (vertex count, element count, search budget) was hit."""

    def __init__(self, message, cap=None):
        super().__init__(message)
        self.cap = cap


class ConsistencyError(CoarseLabError):
    """Internal invariant broken, e.g. a quotient map that is not equivariant."""
