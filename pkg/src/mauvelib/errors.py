"""Exception hierarchy shared by every module in the package.

All library errors derive from :class:`Error` so callers (and the CLI)
can distinguish our failures from programming bugs with one except
clause.
"""

from __future__ import annotations


class Error(Exception):
    """Base class for all errors raised by this package."""


class ParameterError(Error):
    """A scalar argument or option is out of its documented range."""


class DimensionError(Error):
    """Array shapes or support sizes that must agree do not."""


class DataFormatError(Error):
    """An input file or record does not match its documented format."""


class DegenerateDataError(Error):
    """The data is structurally unable to support the requested fit."""


class ConsistencyError(Error):
    """An internal cross-check that should always hold failed."""
