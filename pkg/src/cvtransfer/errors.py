"""Exception types raised across the package."""


class CVTransferError(Exception):
    """Base class for all package errors."""


class DomainError(CVTransferError, ValueError):
    """An argument lies outside the domain an operation accepts."""


class ContractViolation(CVTransferError, ValueError):
    """An input breaks a structural precondition (e.g. a matrix is not Hermitian)."""


class NotPSDError(ContractViolation):
    """A matrix expected to be positive semidefinite has a clearly negative eigenvalue."""


class BracketError(CVTransferError, ValueError):
    """A root-finding bracket does not contain the target value."""


class TruncationOverflow(CVTransferError):
    """The Fock truncation needed for the requested tail bound exceeds the cap."""

    def __init__(self, required_nmax: int, max_n: int):
        self.required_nmax = required_nmax
        self.max_n = max_n
        super().__init__(
            f"truncation needs Nmax={required_nmax} but the cap is max_n={max_n}"
        )
