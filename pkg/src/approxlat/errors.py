class UsageError(ValueError):
    """A precondition of an operation was violated (CLI exit code 2)."""


class SchemeError(UsageError):
    """Invalid scheme parameters or mismatched rings."""


class CapacityError(RuntimeError):
    """The requested region would exceed the point-count cap (CLI exit code 3)."""
