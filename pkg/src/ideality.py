"""Exact derivation of n-local ideality coefficients.

An n-local ideality condition is written as

    K_{A1...A(n+1)} = sum over partition shapes S of c_S * (sum of K-products of shape S)

where permutation invariance lets one coefficient stand for every labeled
partition of a shape. Coefficients are fixed by substituting trivial systems
(K = 1, no effect on larger systems), by novelty (the reduced equations must
vanish identically, otherwise they would restate a lower-level condition),
and for n = 3 by inclusion (every bilocally ideal theory must also satisfy
the 3-local condition).

A K-product is a frozenset of blocks, each block a frozenset of component
names; an equation is held as its residual, a dict from K-product to a sympy
coefficient, with the convention residual = LHS - RHS = 0.
"""

from dataclasses import dataclass, field
from functools import lru_cache
from itertools import combinations, permutations
from math import lcm
from typing import Optional

import sympy
from sympy.utilities.iterables import multiset_partitions, partitions

from .dimension_calculus import SystemDims, TheoryProfile, kl_multi, shape_label
from .errors import DerivationError, DomainError, UnsupportedLevelError


COMPONENT_NAMES = "ABCDEFGHIJKLMNOP"
UNKNOWN_NAMES = ("alpha", "beta", "gamma", "delta", "zeta", "eta", "theta", "kappa")
EPSILON = sympy.Symbol("epsilon")
MAX_SOLVED_LEVEL = 3

Shape = tuple[int, ...]
Product = frozenset  # frozenset[frozenset[str]]
Residual = dict  # dict[Product, sympy.Expr]


def shape_of(product: Product) -> Shape:
    return tuple(sorted((len(block) for block in product), reverse=True))


def format_product(product: Product) -> str:
    blocks = sorted(("".join(sorted(block)) for block in product), key=lambda b: (-len(b), b))
    return " ".join(f"K_{b}" for b in blocks)


@lru_cache(maxsize=None)
def _labeled_products(components: tuple[str, ...]) -> tuple[Product, ...]:
    return tuple(
        frozenset(frozenset(block) for block in partition)
        for partition in multiset_partitions(list(components))
    )


def _add(residual: Residual, product: Product, coefficient) -> None:
    value = sympy.expand(residual.get(product, 0) + coefficient)
    if value == 0:
        residual.pop(product, None)
    else:
        residual[product] = value


@dataclass
class PartitionAnsatz:
    """Permutation-symmetric ansatz for the (n+1)-component ideality condition."""
    n: int
    components: tuple[str, ...]
    terms: dict[Shape, sympy.Expr]

    def __post_init__(self):
        full = (self.n + 1,)
        if full in self.terms:
            raise DomainError("the single-block shape is the left-hand side, not a term")
        for shape in self.terms:
            if sum(shape) != self.n + 1:
                raise DomainError(f"shape {shape} does not partition {self.n + 1} components")

    @property
    def unknowns(self) -> tuple[sympy.Symbol, ...]:
        found = []
        for coefficient in self.terms.values():
            for symbol in sorted(sympy.sympify(coefficient).free_symbols, key=str):
                if symbol not in found:
                    found.append(symbol)
        return tuple(found)

    def labeled_products(self, shape: Shape) -> list[Product]:
        return [p for p in _labeled_products(self.components) if shape_of(p) == shape]

    def multiplicity(self, shape: Shape) -> int:
        """How many labeled partitions share a shape, e.g. 3 for (2, 2)."""
        return len(self.labeled_products(shape))

    def residual(self) -> Residual:
        result: Residual = {frozenset([frozenset(self.components)]): sympy.Integer(1)}
        for shape, coefficient in self.terms.items():
            for product in self.labeled_products(shape):
                _add(result, product, -coefficient)
        return result

    def substitute(self, values: dict) -> "PartitionAnsatz":
        return PartitionAnsatz(
            self.n,
            self.components,
            {shape: sympy.sympify(c).subs(values) for shape, c in self.terms.items()},
        )

    def describe(self) -> str:
        """Human-readable form of the condition."""
        parts = []
        for shape, coefficient in self.terms.items():
            products = " + ".join(format_product(p) for p in self.labeled_products(shape))
            parts.append(f"({coefficient})({products})")
        return f"K_{''.join(self.components)} = " + " + ".join(parts)


@dataclass
class Constraint:
    """A linear equation expr = 0 with its provenance tag."""
    expr: sympy.Expr
    provenance: str

    def as_equation(self) -> sympy.Eq:
        constant = self.expr.as_coeff_Add()[0]
        return sympy.Eq(self.expr - constant, -constant)

    def __str__(self) -> str:
        equation = self.as_equation()
        return f"{equation.lhs} = {equation.rhs}  [{self.provenance}]"


@dataclass
class ConstraintSystem:
    """Linear equations over declared unknowns."""
    equations: list[Constraint]
    unknowns: tuple[sympy.Symbol, ...]
    reduced: dict[Shape, sympy.Expr] = field(default_factory=dict)

    def __post_init__(self):
        declared = set(self.unknowns)
        for constraint in self.equations:
            stray = constraint.expr.free_symbols - declared
            if stray:
                raise DomainError(f"equation {constraint} uses undeclared unknowns {sorted(map(str, stray))}")

    def merged(self, other: "ConstraintSystem") -> "ConstraintSystem":
        unknowns = self.unknowns + tuple(u for u in other.unknowns if u not in self.unknowns)
        return ConstraintSystem(self.equations + other.equations, unknowns)

    def retagged(self, provenance: str) -> "ConstraintSystem":
        return ConstraintSystem(
            [Constraint(c.expr, provenance) for c in self.equations],
            self.unknowns,
            dict(self.reduced),
        )

    def solution_space(self) -> sympy.Set:
        return sympy.linsolve([c.expr for c in self.equations], list(self.unknowns))

    def solve(self) -> dict[sympy.Symbol, sympy.Rational]:
        """The unique solution; DerivationError if there is none or a family."""
        space = self.solution_space()
        if space is sympy.S.EmptySet or len(space) == 0:
            raise DerivationError("constraint system is inconsistent")
        (point,) = tuple(space)
        free = set().union(*(sympy.sympify(v).free_symbols for v in point))
        if free:
            raise DerivationError(
                f"constraint system is underdetermined (free: {sorted(map(str, free))})"
            )
        return {u: sympy.Rational(v) for u, v in zip(self.unknowns, point)}


def _normalize(expr: sympy.Expr, unknowns: tuple[sympy.Symbol, ...]) -> sympy.Expr:
    """Sign-normalize so the first unknown present has a positive coefficient."""
    expr = sympy.expand(expr)
    for symbol in unknowns:
        coefficient = expr.coeff(symbol)
        if coefficient != 0:
            return -expr if coefficient < 0 else expr
    return expr


def _partition_shapes(size: int) -> list[Shape]:
    shapes = []
    for parts in partitions(size):
        # partitions() reuses its dict between yields
        shape = tuple(sorted((k for k, m in parts.items() for _ in range(m)), reverse=True))
        shapes.append(shape)
    return sorted(shapes, reverse=True)


def build_ansatz(n: int) -> PartitionAnsatz:
    """One unknown per partition shape of n+1 components, the single block excluded."""
    if n < 1:
        raise DomainError(f"level must be at least 1, got {n}")
    if n + 1 > len(COMPONENT_NAMES):
        raise DomainError(f"level {n} needs more than {len(COMPONENT_NAMES)} components")
    shapes = [s for s in _partition_shapes(n + 1) if s != (n + 1,)]
    names = list(UNKNOWN_NAMES) + [f"c{i}" for i in range(len(UNKNOWN_NAMES), len(shapes))]
    terms = {shape: sympy.Symbol(name) for shape, name in zip(shapes, names)}
    return PartitionAnsatz(n, tuple(COMPONENT_NAMES[: n + 1]), terms)


def _reduce_residual(residual: Residual, trivial: set[str]) -> Residual:
    """Drop trivial components from every block; empty blocks contribute K = 1."""
    reduced: Residual = {}
    for product, coefficient in residual.items():
        blocks = frozenset(block - trivial for block in product if block - trivial)
        _add(reduced, blocks, coefficient)
    return reduced


def _coefficients_by_shape(residual: Residual, components: tuple[str, ...]) -> dict[Shape, sympy.Expr]:
    """Collapse a permutation-symmetric residual to one coefficient per shape."""
    by_shape: dict[Shape, sympy.Expr] = {}
    for product in _labeled_products(components):
        shape = shape_of(product)
        coefficient = sympy.expand(residual.get(product, 0))
        if shape in by_shape:
            if sympy.expand(by_shape[shape] - coefficient) != 0:
                raise DerivationError(f"residual is not permutation symmetric on shape {shape}")
        else:
            by_shape[shape] = coefficient
    return dict(sorted(by_shape.items(), reverse=True))


def trivial_reduce(ansatz: PartitionAnsatz, num_trivial: int) -> ConstraintSystem:
    """Make the last `num_trivial` components trivial and collect what survives.

    The reduced residual is kept per surviving shape in `reduced`; its
    coefficients must all vanish, which is returned as the equations.
    """
    remaining = len(ansatz.components) - num_trivial
    if num_trivial < 1 or remaining < min(2, ansatz.n):
        raise DomainError(
            f"{num_trivial} trivial systems leave {remaining} of {len(ansatz.components)} components"
        )
    survivors = ansatz.components[:remaining]
    reduced = _reduce_residual(ansatz.residual(), set(ansatz.components[remaining:]))
    by_shape = _coefficients_by_shape(reduced, survivors)

    unknowns = ansatz.unknowns
    equations = [
        Constraint(_normalize(coefficient, unknowns), f"trivial-system-{num_trivial}")
        for coefficient in by_shape.values()
        if coefficient != 0
    ]
    return ConstraintSystem(equations, unknowns, by_shape)


def novelty_constraints(n: int) -> ConstraintSystem:
    """For n = 3: alpha = 1, alpha + beta + gamma = 0, 3 gamma + delta = 0.

    With one trivial component the 3-local condition would otherwise restate
    a 2-local (or 1-local) condition, so every reduced coefficient vanishes.
    """
    if n != 3:
        raise UnsupportedLevelError(f"novelty constraints are derived for n = 3 only, got {n}")
    return trivial_reduce(build_ansatz(3), 1).retagged("novelty")


def _rename(residual: Residual, mapping: dict[str, str]) -> Residual:
    renamed: Residual = {}
    for product, coefficient in residual.items():
        blocks = frozenset(frozenset(mapping.get(c, c) for c in block) for block in product)
        _add(renamed, blocks, coefficient)
    return renamed


def _split(residual: Residual, component: str, into: tuple[str, ...]) -> Residual:
    """Replace one component by a composite of several."""
    split: Residual = {}
    for product, coefficient in residual.items():
        blocks = frozenset(
            frozenset(block - {component}) | frozenset(into) if component in block else block
            for block in product
        )
        _add(split, blocks, coefficient)
    return split


def _times_singleton(residual: Residual, component: str) -> Residual:
    return {product | {frozenset([component])}: c for product, c in residual.items()}


def _symmetrize(residual: Residual, components: tuple[str, ...]) -> Residual:
    """Average over all permutations of the components."""
    total: Residual = {}
    orderings = list(permutations(components))
    for ordering in orderings:
        mapping = dict(zip(components, ordering))
        for product, coefficient in _rename(residual, mapping).items():
            _add(total, product, coefficient)
    weight = sympy.Rational(1, len(orderings))
    return {product: sympy.expand(c * weight) for product, c in total.items()}


@dataclass
class InclusionFamily:
    """Coefficients of the 3-local condition implied by bilocal ideality, in epsilon."""
    epsilon: sympy.Symbol
    coefficients: dict[Shape, sympy.Expr]
    symmetrized: dict[Shape, sympy.Rational]

    def at(self, value) -> dict[Shape, sympy.Rational]:
        return {
            shape: sympy.Rational(sympy.sympify(c).subs(self.epsilon, value))
            for shape, c in self.coefficients.items()
        }

    def constraints(self, ansatz: PartitionAnsatz) -> ConstraintSystem:
        equations = [
            Constraint(_normalize(ansatz.terms[shape] - c, ansatz.unknowns), "inclusion(epsilon)")
            for shape, c in self.coefficients.items()
        ]
        return ConstraintSystem(equations, ansatz.unknowns + (self.epsilon,))


def _rhs_coefficients(residual: Residual, components: tuple[str, ...]) -> dict[Shape, sympy.Expr]:
    by_shape = _coefficients_by_shape(residual, components)
    full = (len(components),)
    if sympy.expand(by_shape.pop(full, 0) - 1) != 0:
        raise DerivationError("left-hand side lost its unit coefficient")
    return {shape: sympy.expand(-c) for shape, c in by_shape.items()}


def inclusion_family(n: int) -> InclusionFamily:
    """Coefficients epsilon -> (1/2 + epsilon, 1/3, -1/3 - 2 epsilon, 8 epsilon).

    Start from the bilocal condition on ABC, group C -> CD, symmetrize over
    all permutations of ABCD, then subtract epsilon times the bilocal residual
    of every triple (times the remaining single K), which vanishes on any
    bilocally ideal theory.
    """
    if n != 3:
        raise UnsupportedLevelError(f"the inclusion family is derived for n = 3 only, got {n}")
    bilocal = build_ansatz(2).substitute(_solved_symbols(2)).residual()
    components = tuple(COMPONENT_NAMES[:4])
    *_, last = components

    grouped = _split(bilocal, "C", ("C", last))
    symmetric = _symmetrize(grouped, components)
    symmetrized = {
        shape: sympy.Rational(c) for shape, c in _rhs_coefficients(symmetric, components).items()
    }

    family = dict(symmetric)
    for triple in combinations(components, 3):
        (rest,) = set(components) - set(triple)
        renamed = _rename(bilocal, dict(zip(COMPONENT_NAMES[:3], triple)))
        for product, coefficient in _times_singleton(renamed, rest).items():
            _add(family, product, -EPSILON * coefficient)

    return InclusionFamily(EPSILON, _rhs_coefficients(family, components), symmetrized)


@dataclass
class IdealitySolution:
    """Exact coefficients of the n-local ideality condition."""
    n: int
    coefficients: dict[Shape, sympy.Rational]
    epsilon: Optional[sympy.Rational] = None

    def as_dict(self) -> dict:
        """Exact fraction strings keyed by shape label ('3+1', ...)."""
        result = {
            "level": str(self.n),
            "coefficients": {shape_label(s): str(c) for s, c in self.coefficients.items()},
        }
        if self.epsilon is not None:
            result["epsilon"] = str(self.epsilon)
        return result


def ideality_constraints(n: int) -> ConstraintSystem:
    """Every constraint the derivation uses at level n."""
    if not 1 <= n <= MAX_SOLVED_LEVEL:
        raise UnsupportedLevelError(
            f"ideality coefficients are derived for levels 1..{MAX_SOLVED_LEVEL}, got {n}"
        )
    ansatz = build_ansatz(n)
    max_trivial = len(ansatz.components) - min(2, n)
    if n < 3:
        system = trivial_reduce(ansatz, 1)
        for t in range(2, max_trivial + 1):
            system = system.merged(trivial_reduce(ansatz, t))
        return system
    system = novelty_constraints(3)
    for t in range(2, max_trivial + 1):
        system = system.merged(trivial_reduce(ansatz, t))
    return system.merged(inclusion_family(3).constraints(ansatz))


@lru_cache(maxsize=None)
def _solved(n: int) -> tuple[tuple[tuple[Shape, sympy.Rational], ...], Optional[sympy.Rational]]:
    values = ideality_constraints(n).solve()
    ansatz = build_ansatz(n)
    coefficients = tuple((shape, values[symbol]) for shape, symbol in ansatz.terms.items())
    return coefficients, values.get(EPSILON)


def _solved_symbols(n: int) -> dict[sympy.Symbol, sympy.Rational]:
    ansatz = build_ansatz(n)
    coefficients, _ = _solved(n)
    return {ansatz.terms[shape]: value for shape, value in coefficients}


def solve_ideality(n: int) -> IdealitySolution:
    """Unique coefficients: (1), (1, -2), and (1, 1/3, -4/3, 4) with epsilon = 1/2."""
    coefficients, epsilon = _solved(n)
    return IdealitySolution(n, dict(coefficients), epsilon)


def verify_ideality_numeric(level: int, profile: TheoryProfile, dims: SystemDims) -> int:
    """|scale * (K_whole - RHS)| in exact integers for a level+1 component system.

    `scale` clears the coefficient denominators, so 0 means the condition holds.
    """
    if len(dims) != level + 1:
        raise DomainError(f"level {level} needs {level + 1} components, got {len(dims)}")
    solution = solve_ideality(level)
    components = tuple(COMPONENT_NAMES[: level + 1])
    n_of = dict(zip(components, dims.dims))
    scale = lcm(*(int(c.q) for c in solution.coefficients.values()))

    def k_of(block: frozenset) -> int:
        return kl_multi(SystemDims(tuple(n_of[c] for c in sorted(block))), profile).k

    rhs = 0
    for product in _labeled_products(components):
        shape = shape_of(product)
        if shape == (level + 1,):
            continue
        coefficient = solution.coefficients[shape] * scale
        value = 1
        for block in product:
            value *= k_of(block)
        rhs += int(coefficient) * value
    return abs(scale * kl_multi(dims, profile).k - rhs)


def verify_inclusion_numeric(profile: TheoryProfile, dims: SystemDims) -> int:
    """Residual of the 3-local condition on a four-component system."""
    if len(dims) != 4:
        raise DomainError(f"the 3-local check needs 4 components, got {len(dims)}")
    return verify_ideality_numeric(3, profile, dims)
