"""Tests for the exact ideality derivation."""

from itertools import product

import pytest
import sympy
from sympy import Rational, Symbol

from src.dimension_calculus import COMPLEX_QUANTUM, REAL_QUANTUM, SystemDims, TheoryProfile, kl_multi
from src.errors import DerivationError, DomainError, UnsupportedLevelError
from src.ideality import (
    EPSILON,
    Constraint,
    ConstraintSystem,
    build_ansatz,
    ideality_constraints,
    inclusion_family,
    novelty_constraints,
    solve_ideality,
    trivial_reduce,
    verify_ideality_numeric,
    verify_inclusion_numeric,
)


alpha, beta, gamma, delta = (Symbol(name) for name in ("alpha", "beta", "gamma", "delta"))


def _exprs(system):
    return {sympy.expand(c.expr) for c in system.equations}


class TestAnsatz:
    @pytest.mark.parametrize("n, unknowns", [(1, 1), (2, 2), (3, 4), (4, 6)])
    def test_unknown_count(self, n, unknowns):
        ansatz = build_ansatz(n)
        assert len(ansatz.unknowns) == unknowns == sympy.npartitions(n + 1) - 1

    def test_level3_shapes(self):
        ansatz = build_ansatz(3)
        assert list(ansatz.terms) == [(3, 1), (2, 2), (2, 1, 1), (1, 1, 1, 1)]
        assert list(ansatz.terms.values()) == [alpha, beta, gamma, delta]
        assert [ansatz.multiplicity(s) for s in ansatz.terms] == [4, 3, 6, 1]

    def test_residual_has_unit_lhs(self):
        residual = build_ansatz(2).residual()
        lhs = frozenset([frozenset("ABC")])
        assert residual[lhs] == 1
        assert residual[frozenset([frozenset("AB"), frozenset("C")])] == -alpha

    def test_describe(self):
        text = build_ansatz(1).describe()
        assert text.startswith("K_AB = (alpha)(K_A K_B)")

    def test_level_zero(self):
        with pytest.raises(DomainError):
            build_ansatz(0)


class TestTrivialReduce:
    def test_level1(self):
        assert _exprs(trivial_reduce(build_ansatz(1), 1)) == {alpha - 1}

    def test_level2(self):
        assert _exprs(trivial_reduce(build_ansatz(2), 1)) == {alpha - 1, 2 * alpha + beta}

    def test_level3_one_trivial(self):
        system = trivial_reduce(build_ansatz(3), 1)
        assert system.reduced == {
            (3,): 1 - alpha,
            (2, 1): -(alpha + beta + gamma),
            (1, 1, 1): -(3 * gamma + delta),
        }

    def test_level3_two_trivial(self):
        system = trivial_reduce(build_ansatz(3), 2)
        assert _exprs(system) == {2 * alpha + beta + gamma - 1, 2 * alpha + 2 * beta + 5 * gamma + delta}
        assert {c.provenance for c in system.equations} == {"trivial-system-2"}

    def test_too_many_trivial(self):
        with pytest.raises(DomainError):
            trivial_reduce(build_ansatz(3), 3)
        with pytest.raises(DomainError):
            trivial_reduce(build_ansatz(2), 0)


class TestNovelty:
    def test_equations(self):
        system = novelty_constraints(3)
        assert _exprs(system) == {alpha - 1, alpha + beta + gamma, 3 * gamma + delta}
        assert all(c.provenance == "novelty" for c in system.equations)

    def test_leaves_one_parameter(self):
        (point,) = tuple(novelty_constraints(3).solution_space())
        free = set().union(*(sympy.sympify(v).free_symbols for v in point))
        assert len(free) == 1

    def test_underdetermined_raises(self):
        with pytest.raises(DerivationError):
            novelty_constraints(3).solve()

    @pytest.mark.parametrize("n", [1, 2, 4])
    def test_other_levels(self, n):
        with pytest.raises(UnsupportedLevelError):
            novelty_constraints(n)


class TestInclusion:
    def test_family(self):
        family = inclusion_family(3)
        assert family.coefficients == {
            (3, 1): Rational(1, 2) + EPSILON,
            (2, 2): Rational(1, 3),
            (2, 1, 1): -Rational(1, 3) - 2 * EPSILON,
            (1, 1, 1, 1): 8 * EPSILON,
        }

    def test_symmetrized_intermediate(self):
        assert inclusion_family(3).symmetrized == {
            (3, 1): Rational(1, 2),
            (2, 2): Rational(1, 3),
            (2, 1, 1): Rational(-1, 3),
            (1, 1, 1, 1): 0,
        }

    @pytest.mark.parametrize("epsilon, expected", [
        (0, (Rational(1, 2), Rational(1, 3), Rational(-1, 3), 0)),
        (Rational(1, 2), (1, Rational(1, 3), Rational(-4, 3), 4)),
    ])
    def test_at(self, epsilon, expected):
        assert tuple(inclusion_family(3).at(epsilon).values()) == expected

    def test_other_levels(self):
        with pytest.raises(UnsupportedLevelError):
            inclusion_family(2)


class TestSolve:
    @pytest.mark.parametrize("n, expected", [
        (1, ("1",)),
        (2, ("1", "-2")),
        (3, ("1", "1/3", "-4/3", "4")),
    ])
    def test_coefficients(self, n, expected):
        solution = solve_ideality(n)
        assert tuple(str(c) for c in solution.coefficients.values()) == expected

    def test_epsilon(self):
        assert solve_ideality(3).epsilon == Rational(1, 2)
        assert solve_ideality(2).epsilon is None

    def test_as_dict(self):
        data = solve_ideality(3).as_dict()
        assert data == {
            "level": "3",
            "coefficients": {"3+1": "1", "2+2": "1/3", "2+1+1": "-4/3", "1+1+1+1": "4"},
            "epsilon": "1/2",
        }

    def test_results_are_independent_copies(self):
        first = solve_ideality(2)
        first.coefficients[(2, 1)] = Rational(7)
        assert solve_ideality(2).coefficients[(2, 1)] == 1

    @pytest.mark.parametrize("n", [0, 4])
    def test_unsupported(self, n):
        with pytest.raises(UnsupportedLevelError):
            solve_ideality(n)

    def test_provenance_tags(self):
        tags = {c.provenance for c in ideality_constraints(3).equations}
        assert tags == {"novelty", "trivial-system-2", "inclusion(epsilon)"}

    def test_inconsistent_system(self):
        system = ConstraintSystem(
            [Constraint(alpha - 1, "a"), Constraint(alpha - 2, "b")],
            (alpha,),
        )
        with pytest.raises(DerivationError):
            system.solve()

    def test_undeclared_unknown(self):
        with pytest.raises(DomainError):
            ConstraintSystem([Constraint(alpha + beta, "a")], (alpha,))

    def test_constraint_rendering(self):
        assert str(Constraint(alpha - 1, "novelty")) == "alpha = 1  [novelty]"


class TestNumericVerification:
    @pytest.mark.parametrize("profile, dims", [
        (REAL_QUANTUM, (2, 2, 2, 2)),
        (COMPLEX_QUANTUM, (2, 3, 2, 3)),
        (TheoryProfile(3, 1), (2, 2, 3, 2)),
    ])
    def test_inclusion_examples(self, profile, dims):
        assert verify_inclusion_numeric(profile, SystemDims(dims)) == 0

    def test_four_rebits_total(self):
        assert kl_multi(SystemDims((2, 2, 2, 2)), REAL_QUANTUM).k == 136

    def test_sweep(self):
        for r, s in [(1, 1), (2, 1), (2, 2), (3, 1), (3, 2), (3, 3)]:
            profile = TheoryProfile(r, s)
            for dims in product((1, 2, 3), repeat=4):
                assert verify_inclusion_numeric(profile, SystemDims(dims)) == 0

    @pytest.mark.parametrize("level, profile, dims", [
        (1, COMPLEX_QUANTUM, (3, 4)),
        (2, REAL_QUANTUM, (2, 3, 2)),
        (2, TheoryProfile(3, 2), (3, 1, 2)),
    ])
    def test_lower_levels(self, level, profile, dims):
        assert verify_ideality_numeric(level, profile, SystemDims(dims)) == 0

    def test_level1_fails_for_real_theory(self):
        """K_AB = K_A K_B is violated whenever L is nonzero."""
        assert verify_ideality_numeric(1, REAL_QUANTUM, SystemDims((2, 2))) == 1

    def test_component_count(self):
        with pytest.raises(DomainError):
            verify_inclusion_numeric(REAL_QUANTUM, SystemDims((2, 2, 2)))
