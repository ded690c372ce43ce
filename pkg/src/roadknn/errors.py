"""Exception hierarchy shared across the package.

The CLI maps these onto exit codes: usage and IO problems exit 1,
verification failures exit 2.
"""


class RoadKnnError(Exception):
    """Base class for all errors raised by this package."""


class GraphParseError(RoadKnnError):
    """Malformed graph or object-list input (carries a line number when known)."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class GraphStructureError(RoadKnnError):
    """Structurally invalid graph (disconnected, bad weights, bad ids)."""


class ObjectSetError(RoadKnnError):
    """Invalid candidate-object set (empty, out-of-range ids, bad density)."""


class UnknownVertexError(RoadKnnError):
    """A vertex id outside [0, n)."""


class QueryParameterError(RoadKnnError):
    """Query asked for more neighbors than the index stores."""


class UpdateError(RoadKnnError):
    """Invalid object insertion/deletion request."""


class BundleFormatError(RoadKnnError):
    """Persisted bundle is malformed (bad magic, version, or truncation)."""


class BundleIntegrityError(RoadKnnError):
    """Persisted bundle fails a checksum."""


class FingerprintMismatchError(RoadKnnError):
    """Bundle was built for a different graph than the one supplied."""
