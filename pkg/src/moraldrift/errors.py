"""Exception types shared across the package."""


class MoraldriftError(Exception):
    """Base class for all moraldrift errors."""


class ParseError(MoraldriftError):
    """A data file could not be parsed (bad header, row, or value)."""


class DataError(MoraldriftError):
    """Inputs are structurally valid but violate an operation's contract."""


class CoverageError(DataError):
    """A word or seed class has no embedding in the requested space."""


class AlignmentError(DataError):
    """Embedding spaces cannot be aligned (dim mismatch, tiny overlap)."""
