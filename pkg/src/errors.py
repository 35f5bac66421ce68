"""Exceptions raised by the bilocal tomography toolkit."""


class BitomoError(Exception):
    """Base class for all toolkit errors."""


class DomainError(BitomoError, ValueError):
    """An argument lies outside the domain of an operation."""


class CountOverflowError(BitomoError, ArithmeticError):
    """An integer count left the signed 64-bit range."""


class MalformedTableError(DomainError):
    """A K(N) table is inconsistent or violates K(1) = 1."""


class InvalidStateError(DomainError):
    """A matrix is not a valid (unnormalized) density matrix."""


class IncompleteFrameError(BitomoError):
    """A measurement frame does not span the target matrix space."""

    def __init__(self, rank: int, required: int):
        self.rank = rank
        self.required = required
        self.deficit = required - rank
        super().__init__(
            f"frame is not informationally complete: rank {rank} < {required} "
            f"(deficit {self.deficit})"
        )


class InconsistentDataError(BitomoError):
    """Measured statistics lie outside the range of the frame."""

    def __init__(self, residual: float, tolerance: float):
        self.residual = residual
        self.tolerance = tolerance
        super().__init__(
            f"statistics are inconsistent with the frame: residual {residual:.3e} "
            f"> {tolerance:.1e}"
        )


class UnsupportedLevelError(BitomoError, NotImplementedError):
    """The requested locality level is not derived by the ideality solver."""


class DerivationError(BitomoError, RuntimeError):
    """A symbolic derivation produced an inconsistent or underdetermined system."""
