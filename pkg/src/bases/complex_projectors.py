"""Projector bases for complex Hilbert space (local tomography)."""

from itertools import combinations, product

import numpy as np

from ..dimension_calculus import SystemDims
from ..errors import DomainError
from .hermitian import BasisKind, BasisLabel, HermitianOp, OperatorBasis, SiteLabel, tensor


def _ket(n: int, level: int) -> np.ndarray:
    vector = np.zeros(n, dtype=np.complex128)
    vector[level - 1] = 1.0
    return vector


def _ray(vector: np.ndarray) -> np.ndarray:
    """Projector onto the span of `vector`."""
    return np.outer(vector, vector.conj()) / np.vdot(vector, vector).real


def complex_projector_basis(n: int) -> OperatorBasis:
    """The n^2 rank-one projectors P_v, P_uvx, P_uvy on C^n.

    P_uvx projects onto |u> + |v>, P_uvy onto |u> + i|v>; the rays are
    normalized so every element is idempotent. Ordering: diagonal, then x,
    then y, each lexicographic in (u, v).
    """
    if n < 1:
        raise DomainError(f"n must be at least 1, got {n}")
    ops = [
        HermitianOp(_ray(_ket(n, v)), label=BasisLabel((SiteLabel("diag", v),)))
        for v in range(1, n + 1)
    ]
    pairs = list(combinations(range(1, n + 1), 2))
    for u, v in pairs:
        ops.append(HermitianOp(
            _ray(_ket(n, u) + _ket(n, v)),
            label=BasisLabel((SiteLabel("x", v=v, u=u),)),
        ))
    for u, v in pairs:
        ops.append(HermitianOp(
            _ray(_ket(n, u) + 1j * _ket(n, v)),
            label=BasisLabel((SiteLabel("y", v=v, u=u),)),
        ))
    return OperatorBasis(tuple(ops), BasisKind.COMPLEX_PROJECTOR, (n,))


def local_product_basis(dims: SystemDims) -> OperatorBasis:
    """Products of per-site complex projectors: the local-tomography frame."""
    site_bases = [complex_projector_basis(n) for n in dims]
    ops = tuple(tensor(factors) for factors in product(*site_bases))
    return OperatorBasis(ops, BasisKind.COMPLEX_PRODUCT, dims.dims)
