"""Exception hierarchy. CLI exit codes map onto these classes."""


class CarmichaelWindowError(Exception):
    exit_code = 1


class ValidationError(CarmichaelWindowError, ValueError):
    """Bad input or configuration (exit code 1)."""

    exit_code = 1


class DomainError(ValidationError):
    """Argument outside the mathematical domain of an operation."""


class BudgetError(CarmichaelWindowError):
    """A configured resource ceiling (sieve, factoring, enumeration) was hit."""

    exit_code = 2


class ConsistencyError(CarmichaelWindowError):
    """A post-hoc check of something guaranteed by construction failed."""

    exit_code = 3


class ReplayMismatch(ConsistencyError):
    pass
