"""Exception types raised by the library."""


class NumericError(RuntimeError):
    """A numerical routine failed (eigensolver, non-finite result, ...)."""


class ResourceLimitError(ValueError):
    """The request exceeds a configured memory/size cap."""
