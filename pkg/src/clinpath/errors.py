"""Exception hierarchy.

Everything raised on bad input derives from :class:`DataError`, which the
command line maps to exit code 2.
"""
from __future__ import annotations


class ClinpathError(Exception):
    """Base class for all package errors."""


class DataError(ClinpathError, ValueError):
    """Input data (logs, nets, parameters) violates a contract."""


class EmptyLogError(DataError):
    pass


class MissingColumnError(DataError):
    def __init__(self, column: str):
        super().__init__(f"missing column: {column!r}")
        self.column = column


class UnparseableTimestampError(DataError):
    def __init__(self, row: int, value: str):
        super().__init__(f"unparseable timestamp {value!r} at row {row}")
        self.row = row
        self.value = value


class MalformedXmlError(DataError):
    def __init__(self, message: str, position: tuple[int, int] | None = None):
        super().__init__(message if position is None else f"{message} at line {position[0]}, column {position[1]}")
        self.position = position


class MissingConceptNameError(DataError):
    def __init__(self, event_index: int):
        super().__init__(f"event {event_index} has no concept:name")
        self.event_index = event_index


class DegenerateSplitError(DataError):
    pass


class UnknownPlaceError(DataError):
    pass


class NotEnabledError(DataError):
    pass


class FinalMarkingUnreachableError(DataError):
    pass


class MalformedPnmlError(DataError):
    pass


class MissingMarkingError(MalformedPnmlError):
    pass


class StateBudgetExceededError(DataError):
    def __init__(self, limit: int):
        super().__init__(f"state budget of {limit} explored states exceeded")
        self.limit = limit


class UnknownActivityError(DataError):
    def __init__(self, activity: str):
        super().__init__(f"activity {activity!r} not in column alphabet")
        self.activity = activity


class AlignmentFailedError(DataError):
    """An alignment error annotated with the offending trace and model."""

    def __init__(self, case_id: str, model_id: str, cause: Exception):
        super().__init__(f"aligning trace {case_id!r} against model {model_id!r}: {cause}")
        self.case_id = case_id
        self.model_id = model_id
        self.cause = cause


class EmptyPointSetError(DataError):
    pass


class LengthMismatchError(DataError):
    pass


class SingleClassError(DataError):
    pass


class InvalidSpecError(DataError):
    pass


class EmptyKnowledgeBaseError(DataError):
    def __init__(self, message: str = "empty knowledge base"):
        super().__init__(message)
