"""Exception types shared across the package."""


class GyrostabError(Exception):
    """Base class for all package errors."""


class DimensionError(GyrostabError):
    """Sphere dimensions of composed or compared classes do not match."""


class PresentationError(GyrostabError):
    """Group elements built against the wrong presentation."""


class StuckError(GyrostabError):
    """Normalization found a chain no rule applies to.

    This always indicates a dataset gap (or a genuinely undetermined
    composite); it is never silently treated as zero.
    """

    def __init__(self, message, chain_text=None, group_name=None):
        super().__init__(message)
        self.chain_text = chain_text
        self.group_name = group_name


class UnassignedParameterError(GyrostabError):
    """A relation needed a parameter value not present in the assignment."""

    def __init__(self, name):
        super().__init__(f"parameter {name!r} has no assigned value")
        self.name = name


class DatasetError(GyrostabError):
    """A declaration references something the database does not declare."""
