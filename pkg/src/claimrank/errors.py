"""Exception hierarchy shared by all claimrank modules."""

from __future__ import annotations


class ClaimRankError(Exception):
    """Base class for every error raised by claimrank."""


class ValidationError(ClaimRankError, ValueError):
    """Input data violates a documented invariant."""


class AssemblyEmptyError(ValidationError):
    pass


class ParseError(ValidationError):
    def __init__(self, path: str, line_no: int, message: str):
        super().__init__(f"{path}:{line_no}: {message}")
        self.path = path
        self.line_no = line_no


class DuplicateIdError(ValidationError):
    pass


class DanglingReferenceError(ValidationError):
    pass


class ZeroVectorError(ValidationError):
    pass


class DimensionMismatchError(ValidationError):
    pass


class FormatError(ValidationError):
    pass


class EmptyCandidateSetError(ValidationError):
    pass


class EmptyInputError(ValidationError):
    pass


class MissingRunError(ValidationError):
    pass


class PostCoverageMismatchError(ValidationError):
    pass


class NoGoldPostsError(ValidationError):
    pass


class EmptyTableError(ValidationError):
    pass


class ProviderError(ClaimRankError):
    """An embedding provider failed (non-retryable status or retries exhausted)."""

    def __init__(self, message: str, provider_id: str = "", batch_index: int | None = None):
        parts = [message]
        if provider_id:
            parts.append(f"provider={provider_id}")
        if batch_index is not None:
            parts.append(f"batch={batch_index}")
        super().__init__(" ".join(parts))
        self.provider_id = provider_id
        self.batch_index = batch_index


class AuthError(ProviderError):
    """Credentials for a provider are missing or rejected."""
