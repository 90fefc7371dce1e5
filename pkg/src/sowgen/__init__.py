"""sowgen: retrieval-grounded drafting, compliance review, and validation of
Statement of Work documents behind one pipeline, HTTP service, and CLI."""

__version__ = "0.1.0"
