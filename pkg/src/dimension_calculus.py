"""Parameter counting for locally and bilocally tomographic theories.

A system with N reliably distinguishable states carries K accessible
parameters and L latent ones. In a bilocally ideal theory the pair composes as

    K_AB = K_A K_B + L_A L_B
    L_AB = K_A L_B + L_A K_B

so K + L and K - L are both multiplicative, and the regular solutions are
K = (N^r + N^s) / 2, L = (N^r - N^s) / 2 with r >= s >= 1.

All arithmetic is exact integer arithmetic. Counts are confined to the signed
64-bit range; anything larger raises CountOverflowError instead of being
silently carried along.
"""

from dataclasses import dataclass, field
from functools import reduce
from math import isqrt, prod
from typing import Iterable, Optional, Sequence

from sympy.utilities.iterables import multiset_partitions

from .errors import CountOverflowError, DomainError, MalformedTableError, DerivationError


MAX_COUNT = 2**63 - 1


def _checked(value: int, what: str = "count") -> int:
    """Raise CountOverflowError when a count leaves the int64 range."""
    if abs(value) > MAX_COUNT:
        raise CountOverflowError(f"{what} exceeds the 64-bit range ({value.bit_length()} bits)")
    return value


@dataclass(frozen=True)
class KLPair:
    """Accessible (k) and latent (l) parameter counts of a system."""
    k: int
    l: int

    def __post_init__(self):
        if self.k < 1:
            raise DomainError(f"K must be at least 1 for a nonempty system, got {self.k}")
        if not 0 <= self.l <= self.k:
            raise DomainError(f"need K >= L >= 0, got K={self.k}, L={self.l}")

    @property
    def total(self) -> int:
        """K + L, multiplicative under composition."""
        return self.k + self.l

    @property
    def difference(self) -> int:
        """K - L, multiplicative under composition."""
        return self.k - self.l


@dataclass(frozen=True)
class TheoryProfile:
    """Exponents (r, s) and composition factor alpha of a family of theories."""
    r: int
    s: int
    alpha: int = 1

    def __post_init__(self):
        if not self.r >= self.s >= 1:
            raise DomainError(f"need r >= s >= 1, got r={self.r}, s={self.s}")
        if self.alpha < 1:
            raise DomainError(f"alpha must be a positive integer, got {self.alpha}")

    @property
    def locally_tomographic(self) -> bool:
        """r == s means L vanishes and K_AB = K_A K_B."""
        return self.r == self.s


COMPLEX_QUANTUM = TheoryProfile(r=2, s=2)
REAL_QUANTUM = TheoryProfile(r=2, s=1)


@dataclass(frozen=True)
class SystemDims:
    """Distinguishable-state counts N_i of the basic components, in order."""
    dims: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "dims", tuple(int(n) for n in self.dims))
        if not self.dims:
            raise DomainError("a system needs at least one component")
        if any(n < 1 for n in self.dims):
            raise DomainError(f"every component needs N >= 1, got {self.dims}")

    @classmethod
    def parse(cls, text: str) -> "SystemDims":
        """Parse a comma-separated list such as '2,2,2'."""
        parts = [p.strip() for p in text.split(",") if p.strip()]
        try:
            return cls(tuple(int(p) for p in parts))
        except ValueError as e:
            raise DomainError(f"cannot parse dims '{text}'") from e

    @property
    def total(self) -> int:
        """N of the whole system (product of the component N's)."""
        return prod(self.dims)

    def __len__(self) -> int:
        return len(self.dims)

    def __iter__(self):
        return iter(self.dims)

    def __str__(self) -> str:
        return ",".join(str(n) for n in self.dims)


@dataclass(frozen=True)
class RedundancyAudit:
    """Naive bilocal parameter count against the true K of the system."""
    naive_count: int
    true_k: int
    per_class: dict[str, int] = field(default_factory=dict)

    @property
    def surplus(self) -> int:
        return self.naive_count - self.true_k


def _checked_power(base: int, exponent: int, what: str) -> int:
    # base^exponent >= 2^((bits - 1) * exponent), so reject before building it
    if (base.bit_length() - 1) * exponent >= 63:
        raise CountOverflowError(f"{what} exceeds the 64-bit range ({base}^{exponent})")
    return _checked(base**exponent, what)


def kl_single(n: int, profile: TheoryProfile) -> KLPair:
    """K and L of a single system with n distinguishable states.

    Args:
        n: Number of distinguishable states, at least 1.
        profile: Exponents and composition factor; the effective state
            count is alpha * n.

    Returns:
        KLPair with K = ((alpha n)^r + (alpha n)^s) / 2 and
        L = ((alpha n)^r - (alpha n)^s) / 2.

    Raises:
        DomainError: If n < 1.
        CountOverflowError: If a power leaves the signed 64-bit range.
    """
    if n < 1:
        raise DomainError(f"n must be at least 1, got {n}")
    base = profile.alpha * n
    high = _checked_power(base, profile.r, "N^r")
    low = _checked_power(base, profile.s, "N^s")
    # high and low share the base, so their parity matches
    return KLPair(k=(high + low) // 2, l=(high - low) // 2)


def kl_compose(a: KLPair, b: KLPair) -> KLPair:
    """Compose two systems: K = KaKb + LaLb, L = KaLb + LaKb."""
    k = _checked(a.k * b.k + a.l * b.l, "K")
    l = _checked(a.k * b.l + a.l * b.k, "L")
    return KLPair(k=k, l=l)


def kl_multi(dims: SystemDims, profile: TheoryProfile) -> KLPair:
    """K and L of a composite, as a left fold of kl_compose.

    Args:
        dims: Basic components in order; each is counted with kl_single.
        profile: Counting profile shared by all components.

    Returns:
        The composite KLPair. Any other association order gives the same pair.
    """
    return reduce(kl_compose, (kl_single(n, profile) for n in dims))


def k_three_body(k_a: int, k_b: int, k_c: int, k_ab: int, k_ac: int, k_bc: int) -> int:
    """Bilocally accessible parameter count of a three-component system.

    K_A K_BC + K_B K_AC + K_C K_AB - 2 K_A K_B K_C.
    """
    values = (k_a, k_b, k_c, k_ab, k_ac, k_bc)
    if any(v < 1 for v in values):
        raise DomainError(f"all counts must be at least 1, got {values}")
    _checked(k_a * k_b * k_c, "K_A K_B K_C")
    return _checked(k_a * k_bc + k_b * k_ac + k_c * k_ab - 2 * k_a * k_b * k_c)


def bilocal_bound_holds(
    k_a: int, k_b: int, k_c: int, k_ab: int, k_ac: int, k_bc: int, k_abc: int
) -> bool:
    """Whether K_ABC stays within what bilocal measurements can reach."""
    return k_abc <= k_three_body(k_a, k_b, k_c, k_ab, k_ac, k_bc)


def h_value(na: int, nb: int, profile: TheoryProfile) -> int:
    """Parameters only a joint measurement reveals: K_AB - K_A K_B.

    The composite of na and nb states has alpha * na * nb of them, so the
    result equals L(na) L(nb) for every profile.

    Args:
        na: State count of the first system.
        nb: State count of the second system.
        profile: Counting profile shared by both systems.

    Returns:
        The nonnegative excess h(na, nb).
    """
    if na < 1 or nb < 1:
        raise DomainError(f"na and nb must be at least 1, got {na}, {nb}")
    joint = kl_single(_checked(profile.alpha * na * nb), profile).k
    return _checked(joint - kl_single(na, profile).k * kl_single(nb, profile).k)


def latent_from_h(n: int, profile: TheoryProfile, reference: Optional[int] = None) -> int:
    """Recover L(n) from the excess function alone.

    L(n) = h(n, x) / sqrt(h(x, x)) for a reference x with h(x, x) > 0; when
    h vanishes everywhere (searched over 1..8) L is 0.
    """
    if reference is None:
        reference = next((x for x in range(1, 9) if h_value(x, x, profile) > 0), None)
        if reference is None:
            return 0
    hxx = h_value(reference, reference, profile)
    if hxx <= 0:
        raise DomainError(f"reference {reference} has h(x, x) = {hxx}, need > 0")
    root = isqrt(hxx)
    if root * root != hxx:
        raise DerivationError(f"h({reference}, {reference}) = {hxx} is not a perfect square")
    numerator = h_value(n, reference, profile)
    if numerator % root:
        raise DerivationError(f"h({n}, {reference}) = {numerator} is not divisible by {root}")
    return numerator // root


def is_regular(profile: TheoryProfile, n_max: int) -> bool:
    """K + L and K - L both strictly increase over n = 1..n_max."""
    pairs = [kl_single(n, profile) for n in range(1, n_max + 1)]
    return all(
        b.total > a.total and b.difference > a.difference
        for a, b in zip(pairs, pairs[1:])
    )


def _normalize_table(k_table: Iterable[tuple[int, int]]) -> dict[int, int]:
    table: dict[int, int] = {}
    for n, k in k_table:
        n, k = int(n), int(k)
        if n < 1 or k < 1:
            raise MalformedTableError(f"entries need n >= 1 and K >= 1, got ({n}, {k})")
        if n in table and table[n] != k:
            raise MalformedTableError(f"conflicting entries for n={n}: {table[n]} and {k}")
        table[n] = k
    if table.get(1, 1) != 1:
        raise MalformedTableError(
            f"K(1) must be 1 (a one-state system carries only its normalization), got {table[1]}"
        )
    if 2 not in table or 3 not in table:
        raise MalformedTableError("the table needs entries for n=2 and n=3")
    return table


def fit_profile_with_reason(
    k_table: Iterable[tuple[int, int]],
) -> tuple[Optional[TheoryProfile], str]:
    """Find the unique (r, s) reproducing a K(n) table, with an explanation.

    The search is exhaustive over r >= s >= 1 with r bounded by
    K(2) >= 2^(r-1), i.e. r <= bit_length(K(2)).
    """
    table = _normalize_table(k_table)
    ordered = sorted(table.items())
    if any(k2 <= k1 for (_, k1), (_, k2) in zip(ordered, ordered[1:])):
        return None, "K(n) is not strictly increasing, so K+L and K-L cannot both be regular"

    r_max = table[2].bit_length()
    matches = []
    for r in range(1, r_max + 1):
        for s in range(1, r + 1):
            profile = TheoryProfile(r=r, s=s)
            if all(kl_single(n, profile).k == k for n, k in ordered):
                matches.append(profile)
    if not matches:
        return None, f"no (r, s) with r >= s >= 1 and r <= {r_max} reproduces the table"
    if len(matches) > 1:
        found = ", ".join(f"({p.r}, {p.s})" for p in matches)
        return None, f"table is ambiguous between {found}"
    profile = matches[0]
    return profile, f"K(n) = (n^{profile.r} + n^{profile.s}) / 2 fits all {len(ordered)} entries"


def fit_profile(k_table: Iterable[tuple[int, int]]) -> Optional[TheoryProfile]:
    """The unique TheoryProfile whose K(n) matches every table entry, or None."""
    profile, _ = fit_profile_with_reason(k_table)
    return profile


def _pair_partitions(count: int) -> Iterable[list[list[int]]]:
    """Set partitions of range(count) into singletons and pairs."""
    for partition in multiset_partitions(list(range(count))):
        if all(len(block) <= 2 for block in partition):
            yield partition


def shape_label(sizes: Sequence[int]) -> str:
    """Canonical partition-class label, largest block first: '2+1+1'."""
    return "+".join(str(size) for size in sorted(sizes, reverse=True))


def bilocal_redundancy_audit(dims: SystemDims, profile: TheoryProfile) -> RedundancyAudit:
    """Count parameters bilocal measurements could supply as if all were independent.

    Every partition of the components into singletons and pairs contributes
    prod(pairs: K_pair - K K) * prod(singletons: K). The naive total is
    compared with the true K of the whole system.

    Args:
        dims: At least three basic components.
        profile: Counting profile shared by all components.

    Returns:
        RedundancyAudit with per-class contributions keyed by shape label,
        most blocks first.

    Raises:
        DomainError: If fewer than three components are given.
    """
    if len(dims) < 3:
        raise DomainError(f"the audit needs at least 3 components, got {len(dims)}")
    singles = [kl_single(n, profile) for n in dims]

    per_class: dict[str, int] = {}
    for partition in _pair_partitions(len(dims)):
        contribution = 1
        for block in partition:
            if len(block) == 1:
                contribution *= singles[block[0]].k
            else:
                i, j = block
                joint = kl_compose(singles[i], singles[j]).k
                contribution *= joint - singles[i].k * singles[j].k
            _checked(contribution, "audit contribution")
        label = shape_label([len(block) for block in partition])
        per_class[label] = _checked(per_class.get(label, 0) + contribution, "audit class")

    per_class = dict(sorted(per_class.items(), key=lambda item: item[0].count("+"), reverse=True))
    naive = _checked(sum(per_class.values()), "naive count")
    return RedundancyAudit(
        naive_count=naive,
        true_k=kl_multi(dims, profile).k,
        per_class=per_class,
    )
