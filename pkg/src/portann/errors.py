"""Exception types shared by all portann modules."""


class PortannError(Exception):
    """Base class for every error this package raises deliberately."""


class IngestError(PortannError):
    """A corpus-interchange document is malformed or violates a tree invariant."""


class AnchorSyntaxError(PortannError):
    """An anchor string does not follow the anchor grammar."""

    def __init__(self, message: str, position: int | None = None):
        if position is not None:
            message = f"syntax error at position {position}: {message}"
        super().__init__(message)
        self.position = position


class ResolutionError(PortannError):
    """An anchor could not be resolved against the sources store."""


class UnknownWorkError(ResolutionError):
    """The anchor's work id is not loaded."""


class UnresolvedAnchorError(ResolutionError):
    """The work is loaded but the anchor's path does not lead to an object."""


class UnknownTypeError(PortannError):
    """An object type is not part of the work's type order."""


class FeatureTableError(PortannError):
    """A feature table row is malformed, dangling, or conflicting."""


class QuerySyntaxError(PortannError):
    """A query string does not follow the query grammar."""

    def __init__(self, message: str, line: int, col: int):
        super().__init__(f"{message} at {line}:{col}")
        self.line = line
        self.col = col


class QueryError(PortannError):
    """A syntactically valid query cannot be evaluated (unknown type, bad limit)."""


class ValidationError(PortannError):
    """An annotation body or target list violates its invariants."""


class EmptyResultError(PortannError):
    """A freeze produced zero targets; target-less annotations are refused."""


class StoreFormatError(PortannError):
    """An annotation store file has a malformed record."""


class TripleSyntaxError(PortannError):
    """A triple document line does not parse, or a parsed set is incoherent."""


class PortingError(PortannError):
    """An annotation cannot be ported over the given alignment."""


class UnknownAnnotationError(PortannError):
    """An annotation id is not present in the store."""
