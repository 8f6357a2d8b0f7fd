"""Exception hierarchy.

Each category maps to a CLI exit code so scripted runs can tell a bad
config apart from a numerical singularity.
"""


class HdtorusError(Exception):
    exit_code = 1


class ConfigError(HdtorusError, ValueError):
    exit_code = 2


class DomainError(HdtorusError, ValueError):
    """A numeric argument lies outside the region where the quantity is defined."""

    exit_code = 3


class DimensionError(DomainError):
    """A field does not have V entries."""


class UnsupportedFamilyError(DomainError):
    pass


class SizeError(HdtorusError, ValueError):
    """The requested computation exceeds a hard size cap."""

    exit_code = 4


class SingularityError(HdtorusError, ArithmeticError):
    exit_code = 5

    def __init__(self, message, k=None):
        super().__init__(message)
        self.k = k
