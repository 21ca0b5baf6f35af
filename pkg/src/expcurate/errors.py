"""Domain error hierarchy.

Every error raised by the engine derives from CurationError so interface
layers can map domain failures to exit codes / HTTP statuses uniformly.
"""


class CurationError(Exception):
    """Base class for all engine errors."""

    code = "ERROR"


# --- metamodel ---------------------------------------------------------


class EncodingError(CurationError):
    code = "ENCODING_ERROR"


class ValidationFailed(CurationError):
    code = "VALIDATION_FAILED"

    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__("; ".join(self.violations))


class CycleDetected(CurationError):
    code = "CYCLE_DETECTED"

    def __init__(self, cycle):
        self.cycle = list(cycle)
        super().__init__(" -> ".join(self.cycle))


class UnknownNode(CurationError):
    code = "UNKNOWN_NODE"


# --- store --------------------------------------------------------------


class PathOccupied(CurationError):
    code = "PATH_OCCUPIED"


class StoreLocked(CurationError):
    code = "STORE_LOCKED"


class UnknownLedger(CurationError):
    code = "UNKNOWN_LEDGER"


class UnknownBlob(CurationError):
    code = "UNKNOWN_BLOB"


class CorruptionMidLedger(CurationError):
    code = "CORRUPTION_MID_LEDGER"


# --- ingest -------------------------------------------------------------


class EmptySource(CurationError):
    code = "EMPTY_SOURCE"


class RaggedRow(CurationError):
    code = "RAGGED_ROW"

    def __init__(self, row_number):
        self.row_number = row_number
        super().__init__(f"row {row_number} has wrong arity")


class HeaderMalformed(CurationError):
    code = "HEADER_MALFORMED"


class SampleCountMismatch(CurationError):
    code = "SAMPLE_COUNT_MISMATCH"


class UnknownColumn(CurationError):
    code = "UNKNOWN_COLUMN"


# --- curate -------------------------------------------------------------


class MissingQuestion(CurationError):
    code = "MISSING_QUESTION"


class EmptyTeam(CurationError):
    code = "EMPTY_TEAM"


class NotTextBearing(CurationError):
    code = "NOT_TEXT_BEARING"


class NotTeamMember(CurationError):
    code = "NOT_TEAM_MEMBER"


class SeniorRequired(CurationError):
    code = "SENIOR_REQUIRED"


class StaleHistory(CurationError):
    """Optimistic-concurrency conflict: history advanced past the seq the caller saw."""

    code = "STALE_HISTORY"


class UnknownTarget(CurationError):
    code = "UNKNOWN_TARGET"


class UnmappedRequired(CurationError):
    code = "UNMAPPED_REQUIRED"


class NonNumericColumn(CurationError):
    code = "NON_NUMERIC_COLUMN"


# --- analytics ----------------------------------------------------------


class UnknownLabel(CurationError):
    code = "UNKNOWN_LABEL"


class LengthMismatch(CurationError):
    code = "LENGTH_MISMATCH"


class Empty(CurationError):
    code = "EMPTY"


class NoConfidences(CurationError):
    code = "NO_CONFIDENCES"


class BadK(CurationError):
    code = "BAD_K"


class TooFew(CurationError):
    code = "TOO_FEW"


class WindowTooLong(CurationError):
    code = "WINDOW_TOO_LONG"


class Underdetermined(CurationError):
    code = "UNDERDETERMINED"


class UnknownFormat(CurationError):
    code = "UNKNOWN_FORMAT"


# --- orchestrate --------------------------------------------------------


class UnknownOperation(CurationError):
    code = "UNKNOWN_OPERATION"


class ForwardReference(CurationError):
    code = "FORWARD_REFERENCE"


class MissingBlob(CurationError):
    code = "MISSING_BLOB"


class UnknownRecord(CurationError):
    """Lookup by id failed (dataset, release, experiment, run, ...)."""

    code = "UNKNOWN_RECORD"
