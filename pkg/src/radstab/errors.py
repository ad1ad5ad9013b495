"""Exception hierarchy shared by all radstab stages.

The CLI maps these onto exit codes: usage errors exit 2 (argparse),
:class:`DataError` exits 3, :class:`NumericalError` exits 4.
"""


class RadstabError(Exception):
    """Base class for all radstab errors."""


class DataError(RadstabError):
    """Malformed, missing, or inconsistent input data."""


class NumericalError(RadstabError):
    """A numerical procedure failed to converge or produced invalid values."""
