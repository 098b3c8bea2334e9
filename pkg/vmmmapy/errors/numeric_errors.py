"""Contains custom exceptions for numeric failures (exit code 2 in the CLI)."""
from .cli_errors import VmmmapyException

__all__: tuple[str, ...] = (
    "NumericError",
    "DomainError",
    "NotACovarianceError",
    "KumulantDomainError",
    "GridMismatchError",
    "MomentError",
)


class NumericError(VmmmapyException):
    pass


class DomainError(NumericError, ValueError):
    """DomainError is raised when an argument lies outside a function's domain of finiteness"""


class NotACovarianceError(NumericError):
    """NotACovarianceError is raised when a covariance table has a significantly negative spectrum"""


class KumulantDomainError(NumericError):
    """KumulantDomainError is raised when a kumulant argument leaves the seed cumulant's domain"""

    def __init__(self, message: str, node: tuple[int, ...]) -> None:
        self.node = node
        super().__init__(f"{message} at quadrature node {node}")


class GridMismatchError(NumericError, ValueError):
    """GridMismatchError is raised when a sample does not cover or align with the required lattice"""


class MomentError(NumericError):
    """MomentError is raised when a required moment of the basis is not finite"""
