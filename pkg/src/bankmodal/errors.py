"""Shared error types for the data pipeline and command-line layer.

ValidationError marks inputs that violate a documented contract (caller
mistake); DataError marks input files that are malformed or internally
inconsistent.  The command-line layer maps them to distinct exit codes.
"""


class ValidationError(ValueError):
    """Inputs violate a documented contract (caller error)."""


class DataError(ValueError):
    """An input file is malformed or inconsistent."""
