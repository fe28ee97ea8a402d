"""Exception types shared across the pipeline."""


class CqsError(Exception):
    """Base class for all domain errors."""


class TagError(CqsError):
    """Rejected issue-tag input (empty or malformed)."""


class IssueParseError(CqsError):
    """An issue block could not be parsed; message names the offending key."""


class DiffParseError(CqsError):
    """Unified diff text violated the expected structure."""


class UnknownFileError(CqsError):
    """A lookup referenced a file path that is not part of the diff."""


class GatewayError(CqsError):
    """Base for backend-call failures; always carries the backend id."""

    def __init__(self, message: str, backend_id: str):
        super().__init__(f"[{backend_id}] {message}")
        self.backend_id = backend_id


class GatewayTimeout(GatewayError):
    pass


class TransportError(GatewayError):
    pass


class BadStatusError(GatewayError):
    def __init__(self, message: str, backend_id: str, status: int):
        super().__init__(message, backend_id)
        self.status = status


class RetriesExhaustedError(GatewayError):
    pass


class VerdictError(CqsError):
    """A judge reply contained a malformed verdict; message names the index."""

    def __init__(self, message: str, index: int | None = None):
        super().__init__(message)
        self.index = index


class UnscoredReviewError(CqsError):
    """The judge could not produce one verdict per issue even after a re-ask."""


class ContractError(CqsError):
    """Caller violated an alignment precondition (e.g. verdicts vs issues)."""


class SamplingError(CqsError):
    """Every sample of a batch generation failed."""


class EvalError(CqsError):
    """Evaluation harness misuse (empty benchmark, comparator failure...)."""
