"""Exception hierarchy for the scoring pipeline.

Data problems (bad records, missing fields) and usage problems (bad
parameters) are kept as distinct subtrees so the CLI can map them to
exit codes without string matching.
"""


class MiaError(Exception):
    """Base class for all library errors."""


class DataError(MiaError):
    """A record or input file is malformed or inconsistent."""


class UsageError(MiaError):
    """Caller supplied invalid parameters."""


# moments ------------------------------------------------------------------

class NormalizationError(DataError):
    """Probabilities derived from a log-prob vector do not sum to 1."""


class EmptyVocabulary(UsageError):
    """A categorical distribution needs at least two outcomes."""


# aggregation ---------------------------------------------------------------

class EmptyScores(UsageError):
    """min-k aggregation over an empty score list."""


# detectors ------------------------------------------------------------------

class MissingText(DataError):
    """Detector requires raw text bytes the record does not carry."""


class MissingReference(DataError):
    """Detector requires a named reference pass the record does not carry."""


class EmptyNeighbors(DataError):
    """Neighbor detector requires at least one neighbor NLL."""


class ScoringError(DataError):
    """A record could not be scored; carries the offending record id."""

    def __init__(self, record_id: str, cause: Exception):
        super().__init__(f"record {record_id!r}: {cause}")
        self.record_id = record_id
        self.cause = cause


# evaluation ------------------------------------------------------------------

class DegenerateLabels(DataError):
    """AUROC/TPR need at least one member and one nonmember."""


# online ----------------------------------------------------------------------

class UnsupportedOnlineMethod(UsageError):
    """Detector cannot be applied per-window (needs per-window text/references)."""


class InsufficientPool(UsageError):
    """Online dataset builder needs non-empty member and nonmember pools."""


# toy LM ----------------------------------------------------------------------

class CorpusTooShort(UsageError):
    """Training corpus shorter than the model order."""


class TextTooShort(UsageError):
    """Scoring needs at least two symbols (one conditional position)."""


class InsufficientCorpus(UsageError):
    """Corpus too short for the requested snippet length."""


# ingestion --------------------------------------------------------------------

class SchemaVersionMismatch(DataError):
    """Line carries a schema tag this parser does not understand."""


class LengthMismatch(DataError):
    """Parallel arrays in a record line have different lengths."""


class MalformedLine(DataError):
    """A JSONL line failed parsing or validation; carries line number."""

    def __init__(self, lineno: int, reason: str):
        super().__init__(f"line {lineno}: {reason}")
        self.lineno = lineno
        self.reason = reason
