"""Exception hierarchy shared by every cqmkit module."""


class CqmError(Exception):
    """Base class for all cqmkit errors."""


class DimensionMismatchError(CqmError, ValueError):
    """An assignment does not cover the variables an expression refers to."""


class ModelValidationError(CqmError, ValueError):
    """A model, expression or constraint violates a structural invariant."""


class TransformError(CqmError, ValueError):
    """A model cannot be converted to a penalised QUBO."""


class NonIntegralCoefficientError(TransformError):
    """A scaled inequality coefficient is not an integer."""

    def __init__(self, constraint, term, value, scale):
        self.constraint = constraint
        self.term = term
        self.value = value
        self.scale = scale
        super().__init__(
            f"constraint {constraint!r}: {term} has coefficient {value!r}, "
            f"which is not integral at scale {scale}"
        )


class CatalogError(CqmError, ValueError):
    """A catalog CSV could not be parsed or fails validation."""

    def __init__(self, message, row=None, column=None):
        self.row = row
        self.column = column
        where = []
        if row is not None:
            where.append(f"row {row}")
        if column is not None:
            where.append(f"column {column!r}")
        if where:
            message = f"{', '.join(where)}: {message}"
        super().__init__(message)


class SolverError(CqmError):
    """Base class for backend failures."""


class SearchSpaceTooLargeError(SolverError, ValueError):
    """The exact enumerator refuses a search space above its caps."""


class ProvenanceMismatchError(SolverError, ValueError):
    """A QUBO was not derived from the model it is being solved against."""


class RemoteError(SolverError):
    """Base class for remote-backend protocol failures."""


class RemoteConnectionError(RemoteError):
    """The remote endpoint could not be reached."""


class RemoteTimeoutError(RemoteError):
    """The remote endpoint did not answer within the time limit plus grace."""


class RemoteStatusError(RemoteError):
    """The remote endpoint answered with a non-2xx status."""

    def __init__(self, status, code=None, message=None):
        self.status = status
        self.code = code
        self.remote_message = message
        text = f"remote solver returned HTTP {status}"
        if code or message:
            text += f" ({code}: {message})"
        super().__init__(text)


class MalformedResponseError(RemoteError):
    """The response body is not a valid solve response document."""


class AssignmentLengthError(RemoteError, DimensionMismatchError):
    """A returned sample has the wrong number of bits."""
