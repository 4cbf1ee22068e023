"""
Exception hierarchy shared by all layers. The exit code of the command line
interface is read from the exception class.
"""
from typing import Any


class RankLabError(Exception):
    exit_code = 1

    def detail(self) -> dict[str, Any]:
        return {"error": type(self).__name__, "message": str(self)}


class DomainError(RankLabError, ValueError):
    """A precondition on the input was violated."""

    exit_code = 2


class ResourceError(RankLabError):
    exit_code = 3


class CapExceeded(ResourceError):
    def __init__(self, message: str, partial_count: int | None = None):
        super().__init__(message)
        self.partial_count = partial_count

    def detail(self):
        return super().detail() | {"partial_count": self.partial_count}


class BudgetExceeded(ResourceError):
    """
    Raised when the subgroup class enumeration hits its budget. The classes
    found so far are attached as `partial` (flagged non-exhaustive).
    """

    def __init__(self, message: str, partial: Any = None):
        super().__init__(message)
        self.partial = partial


class SearchExhausted(ResourceError):
    pass


class NotPrimePower(DomainError):
    pass


class NotNilpotent(RankLabError):
    exit_code = 2


class NotInvariant(DomainError):
    pass


class NotDecomposable(RankLabError):
    exit_code = 2


class NotFaithful(DomainError):
    pass


class PrecisionError(RankLabError):
    exit_code = 2


class VerificationMismatch(RankLabError):
    exit_code = 4

    def __init__(self, message: str, payload: dict | None = None):
        super().__init__(message)
        self.payload = payload or {}

    def detail(self):
        return super().detail() | {"payload": self.payload}
