"""Error taxonomy shared across the engine.

The CLI maps these onto exit codes; library callers catch them directly.
"""


class ReseqError(Exception):
    """Base class for all engine errors."""


class ContractError(ReseqError):
    """A precondition of an operation was violated by the caller."""


class IngestionError(ReseqError):
    """An input file could not be read or decoded."""

    def __init__(self, path, reason: str):
        self.path = str(path)
        super().__init__(f"cannot ingest {self.path}: {reason}")


class FormatError(ReseqError):
    """A binary container is malformed. Carries the byte offset of the defect."""

    def __init__(self, message: str, offset: int):
        self.offset = offset
        super().__init__(f"{message} (at byte offset {offset})")


class ValidationError(ReseqError):
    """Loaded data violates a structural invariant."""


class FitError(ReseqError):
    """A distribution fit could not be performed on the given sample."""


class NumericalError(ReseqError):
    """An iterative computation produced non-finite values."""


class PruneError(ReseqError):
    """Outlier pruning would leave too few frames. Carries the untouched matrix."""

    def __init__(self, message: str, matrix):
        self.matrix = matrix
        super().__init__(message)
