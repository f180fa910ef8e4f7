"""Exception hierarchy shared by the library and the CLI."""


class HubModelError(Exception):
    """Base class for every error raised by :mod:`pchm`."""


class ValidationError(HubModelError, ValueError):
    """Input data or parameters violate a structural invariant."""


class DimensionError(ValidationError):
    """Array shapes do not agree."""


class ParameterError(ValidationError):
    """A scalar or configuration argument is out of its admissible range."""


class IngestError(ValidationError):
    """A group-by-individual matrix file could not be parsed.

    ``row`` and ``col`` are 1-based positions in the file body when known.
    """

    def __init__(self, message, row=None, col=None):
        super().__init__(message)
        self.row = row
        self.col = col


class DegenerateMassError(HubModelError):
    """A group has zero probability under the current parameters.

    This happens when no member of the group has a positive mixing weight, or
    when every candidate center is contradicted by an exact 0/1 entry of A.
    """

    def __init__(self, row):
        super().__init__(f"group {row} has zero mixture mass under the current parameters")
        self.row = row


class FitFailureError(HubModelError):
    """No random start produced a finite likelihood."""
