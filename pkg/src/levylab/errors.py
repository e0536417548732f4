"""Exception types shared by the levylab modules."""


class InvalidArgument(ValueError):
    pass


class RankDeficientError(InvalidArgument):
    """Raised by :func:`levylab.subspace.orthonormalize`; ``index`` is the first
    input vector lying (numerically) in the span of its predecessors."""

    def __init__(self, index: int, message: str | None = None):
        self.index = index
        super().__init__(message or f"vector {index} is linearly dependent on vectors 0..{index - 1}")


class SupportViolationError(InvalidArgument):
    pass


class ResourceLimitError(RuntimeError):
    """A configured size or search budget was exceeded.

    ``best`` carries the best partial result found before giving up, if any.
    """

    def __init__(self, message: str, best=None):
        super().__init__(message)
        self.best = best
