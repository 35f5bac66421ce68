"""Real-vector-space operator bases and their bilocal projector form.

Per site the sigma basis holds N diagonal projectors P_v, N(N-1)/2 real
symmetric sigma_uvx and N(N-1)/2 imaginary antisymmetric sigma_uvy. Products
with an even number of y factors are real and span the real symmetric
matrices; each pair of y factors is a 2-component observable, so the whole
family is measurable bilocally.
"""

from itertools import combinations, product
from typing import Optional, Sequence

import numpy as np

from ..dimension_calculus import SystemDims
from ..errors import DomainError
from .hermitian import (
    BasisKind,
    BasisLabel,
    HermitianOp,
    OperatorBasis,
    Reality,
    SiteLabel,
    embed,
    tensor,
)


def _unit(n: int, row: int, col: int) -> np.ndarray:
    matrix = np.zeros((n, n), dtype=np.complex128)
    matrix[row - 1, col - 1] = 1.0
    return matrix


def site_matrix(label: SiteLabel, n: int) -> np.ndarray:
    """Matrix of a single-site sigma-basis element on C^n."""
    if label.v > n:
        raise DomainError(f"level {label.v} exceeds site dimension {n}")
    if label.kind == "diag":
        return _unit(n, label.v, label.v)
    if label.kind == "x":
        return _unit(n, label.u, label.v) + _unit(n, label.v, label.u)
    return -1j * (_unit(n, label.u, label.v) - _unit(n, label.v, label.u))


def _pair_sum(label: SiteLabel, n: int) -> np.ndarray:
    """P_u + P_v for the levels an x or y label couples."""
    return _unit(n, label.u, label.u) + _unit(n, label.v, label.v)


def sigma_basis(n: int) -> OperatorBasis:
    """P_v, sigma_uvx and sigma_uvy on C^n, in that order."""
    if n < 1:
        raise DomainError(f"n must be at least 1, got {n}")
    pairs = list(combinations(range(1, n + 1), 2))
    labels = (
        [SiteLabel("diag", v) for v in range(1, n + 1)]
        + [SiteLabel("x", v=v, u=u) for u, v in pairs]
        + [SiteLabel("y", v=v, u=u) for u, v in pairs]
    )
    ops = tuple(
        HermitianOp(
            site_matrix(label, n),
            reality=Reality.IMAGINARY_ANTISYMMETRIC if label.kind == "y" else Reality.REAL_SYMMETRIC,
            label=BasisLabel((label,)),
        )
        for label in labels
    )
    return OperatorBasis(ops, BasisKind.SIGMA, (n,))


def default_pairing(y_sites: Sequence[int]) -> list[tuple[int, int]]:
    """Adjacent pairs, left to right."""
    if len(y_sites) % 2:
        raise DomainError(f"cannot pair an odd number of y sites: {tuple(y_sites)}")
    return [(y_sites[i], y_sites[i + 1]) for i in range(0, len(y_sites), 2)]


def validate_pairing(pairing: Sequence[Sequence[int]], site_count: int) -> list[tuple[int, int]]:
    """Check a preferred pairing: disjoint pairs of distinct, in-range sites."""
    seen: set[int] = set()
    checked = []
    for pair in pairing:
        if len(pair) != 2:
            raise DomainError(f"pairing entries must be site pairs, got {tuple(pair)}")
        i, j = int(pair[0]), int(pair[1])
        if i == j or not (0 <= i < site_count and 0 <= j < site_count):
            raise DomainError(f"invalid pair ({i}, {j}) for {site_count} sites")
        if i in seen or j in seen:
            raise DomainError(f"site repeated in pairing {tuple(map(tuple, pairing))}")
        seen.update((i, j))
        checked.append((min(i, j), max(i, j)))
    return checked


def resolve_pairing(
    y_sites: Sequence[int],
    pairing: Optional[Sequence[tuple[int, int]]] = None,
) -> list[tuple[int, int]]:
    """Pair one product's y sites, preferring listed pairs inside its y-site set."""
    remaining = list(y_sites)
    chosen = []
    for i, j in pairing or ():
        if i in remaining and j in remaining:
            chosen.append((i, j))
            remaining.remove(i)
            remaining.remove(j)
    chosen.extend(default_pairing(remaining))
    covered = sorted(site for pair in chosen for site in pair)
    if covered != sorted(y_sites):
        raise DomainError(f"pairing {chosen} does not cover y sites {tuple(y_sites)}")
    return chosen


def _blocks_for(label: BasisLabel, pairs: Sequence[tuple[int, int]]) -> tuple[tuple[int, ...], ...]:
    paired = {site for pair in pairs for site in pair}
    singles = [(i,) for i in range(len(label.site_labels)) if i not in paired]
    return tuple(sorted(singles + [tuple(pair) for pair in pairs]))


def _products(dims: SystemDims, keep) -> tuple[HermitianOp, ...]:
    site_bases = [sigma_basis(n) for n in dims]
    ops = []
    for factors in product(*site_bases):
        y_count = sum(1 for op in factors if op.label.site_labels[0].kind == "y")
        if not keep(y_count):
            continue
        op = tensor(factors)
        pairs = default_pairing(op.label.y_sites)
        ops.append(HermitianOp(
            op.matrix,
            reality=Reality.REAL_SYMMETRIC,
            label=op.label.with_blocks(_blocks_for(op.label, pairs)),
        ))
    return tuple(ops)


def real_product_basis(dims: SystemDims) -> OperatorBasis:
    """Products of per-site sigma elements with an even number of y factors.

    There are N(N+1)/2 of them for N = prod(dims), all real symmetric.
    Ordering follows itertools.product over the site bases, first site outermost.
    """
    return OperatorBasis(_products(dims, lambda y: y % 2 == 0), BasisKind.REAL_PRODUCT, dims.dims)


def local_real_product_basis(dims: SystemDims) -> OperatorBasis:
    """Products of real single-site factors only: what 1-component measurements see."""
    return OperatorBasis(_products(dims, lambda y: y == 0), BasisKind.REAL_LOCAL, dims.dims)


def y_pair_projector(
    i: int, a: SiteLabel, j: int, b: SiteLabel, dims: Sequence[int],
) -> np.ndarray:
    """[(P_u + P_v)_i (x) (P_u' + P_v')_j + sigma_y,i (x) sigma_y,j] / 2, identity elsewhere."""
    if a.kind != "y" or b.kind != "y":
        raise DomainError(f"y-pair replacement needs two y factors, got {a} and {b}")
    return (
        embed({i: _pair_sum(a, dims[i]), j: _pair_sum(b, dims[j])}, dims)
        + embed({i: site_matrix(a, dims[i]), j: site_matrix(b, dims[j])}, dims)
    ) / 2


def bilocal_projector(
    label: BasisLabel,
    dims: Sequence[int],
    pairing: Optional[Sequence[tuple[int, int]]] = None,
) -> HermitianOp:
    """Projector obtained from a real product label by the replacement rules.

    sigma_x -> (P_u + P_v + sigma_x) / 2 on its site, and each chosen pair of
    y factors -> [(P_u + P_v) (x) (P_u' + P_v') + sigma_y (x) sigma_y] / 2.
    """
    if label.y_count % 2:
        raise DomainError(f"label {label} has an odd number of y factors")
    pairs = resolve_pairing(label.y_sites, pairing)

    singles = {}
    for site, site_label in enumerate(label.site_labels):
        n = dims[site]
        if site_label.kind == "diag":
            singles[site] = site_matrix(site_label, n)
        elif site_label.kind == "x":
            singles[site] = (_pair_sum(site_label, n) + site_matrix(site_label, n)) / 2
    matrix = embed(singles, dims)

    for i, j in pairs:
        matrix = matrix @ y_pair_projector(i, label.site_labels[i], j, label.site_labels[j], dims)

    return HermitianOp(
        matrix,
        reality=Reality.REAL_SYMMETRIC,
        label=label.with_blocks(_blocks_for(label, pairs)),
    )


def bilocal_projector_basis(
    dims: SystemDims,
    pairing: Optional[Sequence[Sequence[int]]] = None,
) -> OperatorBasis:
    """Bilocal projectors replacing every element of real_product_basis, in the same order.

    Args:
        dims: Basic components of the system.
        pairing: Preferred disjoint site pairs for grouping y factors.
            Pairs inside a product's y sites are used first and the rest
            are paired left to right.

    Returns:
        OperatorBasis of N(N+1)/2 real projectors, each acting on at most
        two components.

    Raises:
        DomainError: If the pairing repeats a site or is out of range.
    """
    preferred = validate_pairing(pairing, len(dims)) if pairing else None
    ops = tuple(
        bilocal_projector(op.label, dims.dims, preferred)
        for op in real_product_basis(dims)
    )
    return OperatorBasis(ops, BasisKind.BILOCAL_PROJECTOR, dims.dims)
