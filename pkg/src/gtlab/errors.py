"""Shared exception types.

ValidationError covers bad parameters and malformed configuration (CLI exit
code 2); NumericalError covers runtime numerical failures such as NaN blowup
or root searches coming up empty (CLI exit code 3).
"""


class ValidationError(ValueError):
    """A precondition or configuration value is invalid."""


class GridMismatchError(ValidationError):
    """Two grid functions live on incompatible grids."""


class NumericalError(RuntimeError):
    """A numerical procedure failed (NaN detected, no roots found, ...)."""
