"""Exception types shared across the package."""

from __future__ import annotations


class SowgenError(Exception):
    """Base class for all package errors."""


class DimensionMismatch(SowgenError):
    """An embedding's length does not match the configured dimension."""


class ZeroNorm(SowgenError):
    """Cosine similarity is undefined for a zero-length vector."""


class LoadError(SowgenError):
    """A persisted index file is malformed."""

    def __init__(self, message: str, line: int | None = None):
        super().__init__(message if line is None else f"line {line}: {message}")
        self.line = line


class OverlappingEntities(SowgenError):
    """Two entity spans overlap, so substitution would be ambiguous."""


class TemplateError(SowgenError):
    """A prompt template violates its own declared contract."""


class UnboundPlaceholder(SowgenError):
    """A template placeholder has no binding."""

    def __init__(self, name: str):
        super().__init__(f"no binding for placeholder '{name}'")
        self.name = name


class ParseFailure(SowgenError):
    """Model output contained no parseable JSON object."""

    def __init__(self, reason: str):
        super().__init__(reason)
        self.reason = reason


class SchemaViolation(SowgenError):
    """Model output parsed as JSON but does not fit the draft schema."""

    def __init__(self, violations: list[str]):
        super().__init__("; ".join(violations))
        self.violations = list(violations)


class UnsupportedFormat(SowgenError):
    """Requested render format is not available."""


class UnknownSow(SowgenError):
    """No run is registered under the given sow_id."""


class UnknownSection(SowgenError):
    """The referenced section does not exist in the draft."""


class NothingToRevise(SowgenError):
    """Revision was requested but the reports contain no defect."""


class EmptyText(SowgenError):
    """Embedding input was empty or contained no tokens."""


class TransportError(SowgenError):
    """An HTTP backend call failed after exhausting retries."""


class Timeout(TransportError):
    """An HTTP backend call timed out after exhausting retries."""


class RateLimited(TransportError):
    """An HTTP backend kept answering 429 after exhausting retries."""
