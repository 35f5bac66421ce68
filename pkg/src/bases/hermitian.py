"""Hermitian operators, basis labels, and the linear algebra shared by all bases.

Vectorization convention: an operator is flattened row-major and its real
parts are stacked before its imaginary parts, giving a real vector of length
2 * dim^2. Rank certificates and dual-frame solves both rely on it.
"""

from dataclasses import dataclass, field
from enum import Enum
from functools import reduce
from typing import Optional, Sequence

import numpy as np
from scipy import linalg

from ..errors import DomainError


HERMITIAN_TOLERANCE = 1e-12
RANK_TOLERANCE = 1e-10


class Reality(str, Enum):
    """How an operator's entries sit relative to the real axis."""
    REAL_SYMMETRIC = "real-symmetric"
    IMAGINARY_ANTISYMMETRIC = "imaginary-antisymmetric"
    GENERAL_HERMITIAN = "general-hermitian"


class BasisKind(str, Enum):
    """Which construction produced an OperatorBasis."""
    COMPLEX_PROJECTOR = "complex-projector"
    COMPLEX_PRODUCT = "complex-product"
    SIGMA = "sigma"
    REAL_PRODUCT = "real-product"
    REAL_LOCAL = "real-local"
    BILOCAL_PROJECTOR = "bilocal-projector"


@dataclass(frozen=True)
class SiteLabel:
    """One site's factor: diag(v), x(u, v) or y(u, v), 1-based, u < v."""
    kind: str
    v: int
    u: Optional[int] = None

    def __post_init__(self):
        if self.kind == "diag":
            if self.u is not None or self.v < 1:
                raise DomainError(f"diag label needs a single level v >= 1, got {self}")
        elif self.kind in ("x", "y"):
            if self.u is None or not 1 <= self.u < self.v:
                raise DomainError(f"{self.kind} label needs 1 <= u < v, got u={self.u}, v={self.v}")
        else:
            raise DomainError(f"unknown site label kind '{self.kind}'")

    @property
    def is_sigma(self) -> bool:
        return self.kind != "diag"

    def __str__(self) -> str:
        if self.kind == "diag":
            return f"P{self.v}"
        return f"{self.kind}{self.u}{self.v}" if self.v < 10 else f"{self.kind}{self.u}_{self.v}"


@dataclass(frozen=True)
class BasisLabel:
    """Per-site labels of a product operator plus its measurement blocks.

    `blocks` groups sites that are measured jointly; by default every site
    is its own block.
    """
    site_labels: tuple[SiteLabel, ...]
    blocks: tuple[tuple[int, ...], ...] = ()

    def __post_init__(self):
        if not self.site_labels:
            raise DomainError("a basis label needs at least one site")
        if not self.blocks:
            object.__setattr__(
                self, "blocks", tuple((i,) for i in range(len(self.site_labels)))
            )
        covered = sorted(site for block in self.blocks for site in block)
        if covered != list(range(len(self.site_labels))):
            raise DomainError(f"blocks {self.blocks} do not partition the sites of {self}")

    @property
    def y_count(self) -> int:
        return sum(1 for label in self.site_labels if label.kind == "y")

    @property
    def sigma_count(self) -> int:
        return sum(1 for label in self.site_labels if label.is_sigma)

    @property
    def y_sites(self) -> tuple[int, ...]:
        return tuple(i for i, label in enumerate(self.site_labels) if label.kind == "y")

    @property
    def locality_degree(self) -> int:
        """Largest number of sites measured jointly."""
        return max(len(block) for block in self.blocks)

    def with_blocks(self, blocks: Sequence[Sequence[int]]) -> "BasisLabel":
        return BasisLabel(self.site_labels, tuple(tuple(b) for b in blocks))

    def __str__(self) -> str:
        return "⊗".join(str(label) for label in self.site_labels)


def classify_reality(matrix: np.ndarray, tol: float = HERMITIAN_TOLERANCE) -> Reality:
    """Reality class of a Hermitian matrix, from its entries."""
    if np.max(np.abs(matrix.imag), initial=0.0) <= tol:
        return Reality.REAL_SYMMETRIC
    if np.max(np.abs(matrix.real), initial=0.0) <= tol:
        return Reality.IMAGINARY_ANTISYMMETRIC
    return Reality.GENERAL_HERMITIAN


@dataclass(frozen=True, eq=False)
class HermitianOp:
    """A dense Hermitian matrix with its reality flag and optional basis label."""
    matrix: np.ndarray
    reality: Optional[Reality] = None
    label: Optional[BasisLabel] = None

    def __post_init__(self):
        matrix = np.array(self.matrix, dtype=np.complex128)
        if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1] or matrix.shape[0] < 1:
            raise DomainError(f"operator must be a nonempty square matrix, got shape {matrix.shape}")
        if np.max(np.abs(matrix - matrix.conj().T)) > HERMITIAN_TOLERANCE:
            raise DomainError("operator is not Hermitian")
        matrix.setflags(write=False)
        object.__setattr__(self, "matrix", matrix)

        actual = classify_reality(matrix)
        if self.reality is None:
            object.__setattr__(self, "reality", actual)
        elif self.reality is Reality.REAL_SYMMETRIC and actual is not Reality.REAL_SYMMETRIC:
            raise DomainError(f"operator {self.label} is flagged real-symmetric but has imaginary entries")
        elif (
            self.reality is Reality.IMAGINARY_ANTISYMMETRIC
            and actual is not Reality.IMAGINARY_ANTISYMMETRIC
        ):
            raise DomainError(f"operator {self.label} is flagged imaginary-antisymmetric but has real entries")

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def idempotence_error(self) -> float:
        """max |P^2 - P| entrywise."""
        return float(np.max(np.abs(self.matrix @ self.matrix - self.matrix)))

    def vectorize(self) -> np.ndarray:
        return vectorize(self.matrix)

    def __str__(self) -> str:
        return str(self.label) if self.label is not None else f"<{self.dim}x{self.dim} operator>"


@dataclass(frozen=True)
class OperatorBasis:
    """An ordered family of equal-dimension operators with their labels."""
    ops: tuple[HermitianOp, ...]
    kind: BasisKind
    dims: tuple[int, ...] = field(default=())

    def __post_init__(self):
        object.__setattr__(self, "ops", tuple(self.ops))
        if not self.ops:
            raise DomainError("a basis needs at least one operator")
        if len({op.dim for op in self.ops}) != 1:
            raise DomainError("all operators of a basis must share one dimension")
        if not self.dims:
            object.__setattr__(self, "dims", (self.ops[0].dim,))

    @property
    def dim(self) -> int:
        return self.ops[0].dim

    @property
    def labels(self) -> tuple[Optional[BasisLabel], ...]:
        return tuple(op.label for op in self.ops)

    def __len__(self) -> int:
        return len(self.ops)

    def __iter__(self):
        return iter(self.ops)

    def __getitem__(self, index: int) -> HermitianOp:
        return self.ops[index]

    def matrices(self) -> np.ndarray:
        """Stacked matrices, shape (len, dim, dim)."""
        return np.stack([op.matrix for op in self.ops])

    def vectorized(self) -> np.ndarray:
        """Rows are vectorized operators, shape (len, 2 * dim^2)."""
        return np.stack([op.vectorize() for op in self.ops])


def vectorize(matrix: np.ndarray) -> np.ndarray:
    """Row-major real parts followed by row-major imaginary parts."""
    matrix = np.asarray(matrix, dtype=np.complex128)
    return np.concatenate([matrix.real.ravel(), matrix.imag.ravel()])


def unvectorize(vector: np.ndarray, dim: int) -> np.ndarray:
    vector = np.asarray(vector, dtype=np.float64)
    half = dim * dim
    return (vector[:half] + 1j * vector[half:]).reshape(dim, dim)


def tensor(ops: Sequence[HermitianOp]) -> HermitianOp:
    """Kronecker product in site order, with the reality flag from the parity rule."""
    if not ops:
        raise DomainError("tensor needs at least one operator")
    matrix = reduce(np.kron, (op.matrix for op in ops))
    if any(op.reality is Reality.GENERAL_HERMITIAN for op in ops):
        reality = Reality.GENERAL_HERMITIAN
    else:
        imaginary = sum(1 for op in ops if op.reality is Reality.IMAGINARY_ANTISYMMETRIC)
        reality = Reality.REAL_SYMMETRIC if imaginary % 2 == 0 else Reality.IMAGINARY_ANTISYMMETRIC

    label = None
    if all(op.label is not None for op in ops):
        site_labels = tuple(s for op in ops for s in op.label.site_labels)
        blocks, offset = [], 0
        for op in ops:
            blocks.extend(tuple(site + offset for site in block) for block in op.label.blocks)
            offset += len(op.label.site_labels)
        label = BasisLabel(site_labels, tuple(blocks))
    return HermitianOp(matrix, reality=reality, label=label)


def embed(site_matrices: dict[int, np.ndarray], dims: Sequence[int]) -> np.ndarray:
    """Kronecker product over all sites, identity where no matrix is given."""
    factors = [site_matrices.get(i, np.eye(n)) for i, n in enumerate(dims)]
    return reduce(np.kron, factors).astype(np.complex128)


def singular_values(ops: Sequence[HermitianOp]) -> np.ndarray:
    if not ops:
        raise DomainError("rank of an empty operator list is undefined")
    if len({op.dim for op in ops}) != 1:
        raise DomainError("all operators must share one dimension")
    return linalg.svdvals(np.stack([op.vectorize() for op in ops]))


def linear_independence_rank(
    ops: Sequence[HermitianOp],
    threshold: float = RANK_TOLERANCE,
) -> tuple[int, float]:
    """Numerical rank of the vectorized operators.

    Returns:
        (rank, min_relative_singular_value) where rank counts singular values
        with sigma_i / sigma_max > threshold.
    """
    values = singular_values(list(ops))
    top = values[0] if values.size else 0.0
    if top == 0.0:
        return 0, 0.0
    relative = values / top
    rank = int(np.count_nonzero(relative > threshold))
    return rank, float(relative[-1])


def expand_in_basis(matrix: np.ndarray, basis: OperatorBasis) -> np.ndarray:
    """Real coefficients c with sum_i c_i B_i closest to `matrix` (least squares)."""
    matrix = np.asarray(matrix, dtype=np.complex128)
    if matrix.shape != (basis.dim, basis.dim):
        raise DomainError(f"matrix shape {matrix.shape} does not match basis dim {basis.dim}")
    coefficients, *_ = linalg.lstsq(basis.vectorized().T, vectorize(matrix))
    return coefficients
