"""Exception types raised across the package."""


class AWQAEError(Exception):
    """Base class for all package errors."""


class CapacityError(AWQAEError):
    """Requested qubit count or bit budget exceeds what the simulator supports."""


class ValidationError(AWQAEError, ValueError):
    """Malformed input: non-unitary gate, bad indices, out-of-range probability."""


class ContractError(AWQAEError, ValueError):
    """A documented precondition of an operation was violated."""


class EmptyConditioningError(AWQAEError):
    """No probability mass (or no kept shots) survived ancilla post-selection."""

    def __init__(self, message: str, block_index: int | None = None):
        super().__init__(message)
        self.block_index = block_index
