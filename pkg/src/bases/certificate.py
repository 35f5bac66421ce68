"""Numerical certificates for operator bases."""

from dataclasses import dataclass
from typing import Optional, Sequence

from ..dimension_calculus import COMPLEX_QUANTUM, REAL_QUANTUM, SystemDims, kl_single
from ..errors import DomainError
from .complex_projectors import complex_projector_basis, local_product_basis
from .hermitian import RANK_TOLERANCE, BasisKind, OperatorBasis, Reality, linear_independence_rank
from .real_products import (
    bilocal_projector_basis,
    local_real_product_basis,
    real_product_basis,
    sigma_basis,
)


PROJECTOR_KINDS = {
    BasisKind.COMPLEX_PROJECTOR,
    BasisKind.COMPLEX_PRODUCT,
    BasisKind.BILOCAL_PROJECTOR,
}

# CLI names for the constructions
KIND_ALIASES = {
    "complex": BasisKind.COMPLEX_PROJECTOR,
    "complex-product": BasisKind.COMPLEX_PRODUCT,
    "sigma": BasisKind.SIGMA,
    "real": BasisKind.REAL_PRODUCT,
    "real-local": BasisKind.REAL_LOCAL,
    "bilocal-projector": BasisKind.BILOCAL_PROJECTOR,
}


@dataclass
class BasisCertificate:
    """Rank, idempotence and locality summary of a basis."""
    kind: BasisKind
    dims: tuple[int, ...]
    count: int
    rank: int
    target_dimension: int
    min_relative_singular_value: float
    max_idempotence_error: Optional[float]
    all_real: bool
    max_locality_degree: int
    idempotence_tolerance: float

    @property
    def independent(self) -> bool:
        return self.rank == self.count

    @property
    def complete(self) -> bool:
        """Spans the matrix space the construction targets."""
        return self.rank == self.target_dimension

    @property
    def passed(self) -> bool:
        checks = [self.independent]
        if self.max_idempotence_error is not None:
            checks.append(self.max_idempotence_error <= self.idempotence_tolerance)
        if self.kind in (BasisKind.REAL_PRODUCT, BasisKind.BILOCAL_PROJECTOR):
            checks.extend([self.all_real, self.complete, self.max_locality_degree <= 2])
        if self.kind in (BasisKind.COMPLEX_PROJECTOR, BasisKind.COMPLEX_PRODUCT):
            checks.append(self.complete)
        return all(checks)

    def as_dict(self) -> dict:
        return {
            "kind": self.kind.value,
            "dims": ",".join(str(n) for n in self.dims),
            "count": str(self.count),
            "rank": str(self.rank),
            "target_dimension": str(self.target_dimension),
            "min_relative_singular_value": self.min_relative_singular_value,
            "max_idempotence_error": self.max_idempotence_error,
            "all_real": self.all_real,
            "max_locality_degree": str(self.max_locality_degree),
            "passed": self.passed,
        }


def target_dimension(kind: BasisKind, dims: Sequence[int]) -> int:
    """Dimension of the matrix space a construction is meant to span."""
    total = SystemDims(tuple(dims)).total
    if kind in (BasisKind.REAL_PRODUCT, BasisKind.REAL_LOCAL, BasisKind.BILOCAL_PROJECTOR):
        return kl_single(total, REAL_QUANTUM).k
    return kl_single(total, COMPLEX_QUANTUM).k


def certify(
    basis: OperatorBasis,
    rank_threshold: float = RANK_TOLERANCE,
    idempotence_tolerance: float = 1e-12,
) -> BasisCertificate:
    """Run rank, idempotence, reality and locality checks over a basis.

    Args:
        basis: Basis to inspect.
        rank_threshold: Relative singular value cut-off for the rank.
        idempotence_tolerance: Largest ||P^2 - P|| accepted for projector kinds.

    Returns:
        BasisCertificate; `passed` needs independence, idempotence within
        tolerance for projector kinds, and completeness for the spanning kinds.
    """
    rank, min_relative = linear_independence_rank(basis.ops, rank_threshold)
    idempotence = None
    if basis.kind in PROJECTOR_KINDS:
        idempotence = max(op.idempotence_error() for op in basis)
    labels = [label for label in basis.labels if label is not None]
    return BasisCertificate(
        kind=basis.kind,
        dims=basis.dims,
        count=len(basis),
        rank=rank,
        target_dimension=target_dimension(basis.kind, basis.dims),
        min_relative_singular_value=min_relative,
        max_idempotence_error=idempotence,
        all_real=all(op.reality is Reality.REAL_SYMMETRIC for op in basis),
        max_locality_degree=max((label.locality_degree for label in labels), default=1),
        idempotence_tolerance=idempotence_tolerance,
    )


def build_basis(
    kind: str | BasisKind,
    dims: SystemDims,
    pairing: Optional[Sequence[Sequence[int]]] = None,
) -> OperatorBasis:
    """Construct a basis by CLI kind name."""
    if isinstance(kind, str):
        if kind not in KIND_ALIASES:
            raise DomainError(f"unknown basis kind '{kind}' (choose from {', '.join(KIND_ALIASES)})")
        kind = KIND_ALIASES[kind]
    if kind is BasisKind.COMPLEX_PROJECTOR:
        if len(dims) == 1:
            return complex_projector_basis(dims.dims[0])
        return local_product_basis(dims)
    if kind is BasisKind.COMPLEX_PRODUCT:
        return local_product_basis(dims)
    if kind is BasisKind.SIGMA:
        if len(dims) != 1:
            raise DomainError("the sigma basis is a single-site construction")
        return sigma_basis(dims.dims[0])
    if kind is BasisKind.REAL_PRODUCT:
        return real_product_basis(dims)
    if kind is BasisKind.REAL_LOCAL:
        return local_real_product_basis(dims)
    return bilocal_projector_basis(dims, pairing)
