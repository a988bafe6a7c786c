"""Exception types shared across the toolkit."""

from __future__ import annotations


class FuzzymonError(Exception):
    """Base class for all toolkit errors."""


class SchemaError(FuzzymonError, ValueError):
    """A feature schema document is structurally invalid."""


class EncodingError(FuzzymonError, ValueError):
    """A record cannot be encoded under the given schema."""


class SchemaMismatchError(FuzzymonError, ValueError):
    """An observation does not match the dimensionality the model was trained on."""


class RecordParseError(FuzzymonError, ValueError):
    """A record file line failed to parse or validate.

    ``line`` is 1-based; ``reason`` is the human-readable cause.
    """

    def __init__(self, line: int, reason: str):
        super().__init__(f"line {line}: {reason}")
        self.line = line
        self.reason = reason


class StateFormatError(FuzzymonError, ValueError):
    """A persisted model document is corrupted or has an unsupported version."""


class OddParseError(FuzzymonError, ValueError):
    """An ODD specification text failed to parse.

    ``line`` and ``column`` are 1-based positions of the first violation.
    """

    def __init__(self, line: int, column: int, reason: str):
        super().__init__(f"line {line}, column {column}: {reason}")
        self.line = line
        self.column = column
        self.reason = reason


class OddSchemaError(FuzzymonError, ValueError):
    """An ODD specification references attributes unknown to the schema."""
