"""Tests for operator bases, labels and certificates."""

import numpy as np
import pytest

from src.bases import (
    BasisKind,
    BasisLabel,
    HermitianOp,
    OperatorBasis,
    Reality,
    SiteLabel,
    bilocal_projector_basis,
    build_basis,
    certify,
    complex_projector_basis,
    expand_in_basis,
    linear_independence_rank,
    local_product_basis,
    local_real_product_basis,
    real_product_basis,
    sigma_basis,
    tensor,
)
from src.bases.hermitian import unvectorize, vectorize
from src.bases.real_products import (
    bilocal_projector,
    resolve_pairing,
    site_matrix,
    validate_pairing,
)
from src.dimension_calculus import SystemDims
from src.errors import DomainError


X = np.array([[0, 1], [1, 0]], dtype=complex)
Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
I2 = np.eye(2)
P1 = np.diag([1.0, 0.0]).astype(complex)

X12 = SiteLabel("x", v=2, u=1)
Y12 = SiteLabel("y", v=2, u=1)
D1 = SiteLabel("diag", 1)


class TestLabels:
    def test_site_label_strings(self):
        assert str(D1) == "P1"
        assert str(X12) == "x12"
        assert str(SiteLabel("y", v=3, u=2)) == "y23"

    @pytest.mark.parametrize("kind, v, u", [("x", 1, 2), ("y", 2, None), ("diag", 0, None), ("z", 1, None)])
    def test_site_label_rejects(self, kind, v, u):
        with pytest.raises(DomainError):
            SiteLabel(kind, v=v, u=u)

    def test_blocks_default_to_singletons(self):
        label = BasisLabel((Y12, D1, Y12))
        assert label.blocks == ((0,), (1,), (2,))
        assert label.y_sites == (0, 2)
        assert label.locality_degree == 1
        assert label.with_blocks([(0, 2), (1,)]).locality_degree == 2

    def test_blocks_must_partition(self):
        with pytest.raises(DomainError):
            BasisLabel((Y12, Y12), blocks=((0,),))


class TestHermitianOp:
    def test_rejects_non_hermitian(self):
        with pytest.raises(DomainError):
            HermitianOp(np.array([[0, 1], [0, 0]]))

    def test_rejects_wrong_flag(self):
        with pytest.raises(DomainError):
            HermitianOp(Y, reality=Reality.REAL_SYMMETRIC)

    def test_classifies(self):
        assert HermitianOp(X).reality is Reality.REAL_SYMMETRIC
        assert HermitianOp(Y).reality is Reality.IMAGINARY_ANTISYMMETRIC
        assert HermitianOp(X + Y).reality is Reality.GENERAL_HERMITIAN

    def test_matrix_is_read_only(self):
        op = HermitianOp(X)
        with pytest.raises(ValueError):
            op.matrix[0, 0] = 1

    def test_vectorization_layout(self):
        m = np.array([[1, 2 - 1j], [2 + 1j, 3]])
        v = vectorize(m)
        assert list(v) == [1, 2, 2, 3, 0, -1, 1, 0]
        assert np.allclose(unvectorize(v, 2), m)


class TestTensor:
    def test_yy_is_real(self):
        op = tensor([HermitianOp(Y), HermitianOp(Y)])
        assert op.reality is Reality.REAL_SYMMETRIC
        assert np.allclose(op.matrix, np.kron(Y, Y))

    def test_yx_is_imaginary(self):
        assert tensor([HermitianOp(Y), HermitianOp(X)]).reality is Reality.IMAGINARY_ANTISYMMETRIC

    def test_p1p1(self):
        op = tensor([HermitianOp(P1), HermitianOp(P1)])
        expected = np.zeros((4, 4))
        expected[0, 0] = 1
        assert np.allclose(op.matrix, expected)

    def test_empty(self):
        with pytest.raises(DomainError):
            tensor([])


class TestComplexProjectors:
    @pytest.mark.parametrize("n", [1, 2, 3, 4, 5])
    def test_count_and_rank(self, n):
        basis = complex_projector_basis(n)
        assert len(basis) == n * n
        rank, min_relative = linear_independence_rank(basis.ops)
        assert rank == n * n
        assert min_relative > 1e-6

    def test_projectors_are_idempotent(self):
        for op in complex_projector_basis(4):
            assert op.idempotence_error() <= 1e-12

    def test_n1(self):
        (op,) = complex_projector_basis(1).ops
        assert np.allclose(op.matrix, [[1]])

    def test_n0(self):
        with pytest.raises(DomainError):
            complex_projector_basis(0)

    def test_local_product(self):
        basis = local_product_basis(SystemDims((2, 2)))
        assert len(basis) == 16
        assert basis.kind is BasisKind.COMPLEX_PRODUCT
        assert linear_independence_rank(basis.ops)[0] == 16


class TestSigma:
    def test_qubit(self):
        basis = sigma_basis(2)
        assert [str(op.label) for op in basis] == ["P1", "P2", "x12", "y12"]
        assert np.allclose(basis[2].matrix, X)
        assert np.allclose(basis[3].matrix, Y)

    @pytest.mark.parametrize("n, real, imaginary", [(2, 3, 1), (4, 10, 6)])
    def test_reality_counts(self, n, real, imaginary):
        flags = [op.reality for op in sigma_basis(n)]
        assert flags.count(Reality.REAL_SYMMETRIC) == real
        assert flags.count(Reality.IMAGINARY_ANTISYMMETRIC) == imaginary

    def test_site_matrix_range(self):
        with pytest.raises(DomainError):
            site_matrix(SiteLabel("diag", 3), 2)


class TestRealProducts:
    @pytest.mark.parametrize("dims, count", [((2,), 3), ((2, 2), 10), ((2, 2, 2), 36), ((2, 3), 21), ((3, 4), 78)])
    def test_count_and_rank(self, dims, count):
        basis = real_product_basis(SystemDims(dims))
        assert len(basis) == count
        assert linear_independence_rank(basis.ops)[0] == count
        assert all(op.reality is Reality.REAL_SYMMETRIC for op in basis)

    def test_single_site_elements(self):
        labels = [str(op.label) for op in real_product_basis(SystemDims((2,)))]
        assert labels == ["P1", "P2", "x12"]

    def test_local_real_products_miss_one(self):
        basis = local_real_product_basis(SystemDims((2, 2)))
        assert len(basis) == 9
        assert all(op.label.y_count == 0 for op in basis)

    def test_duplicate_adds_no_rank(self):
        ops = list(real_product_basis(SystemDims((2, 2))).ops)
        assert linear_independence_rank(ops + [ops[3]])[0] == 10

    def test_rank_of_empty(self):
        with pytest.raises(DomainError):
            linear_independence_rank([])

    def test_triangularity(self):
        """Each bilocal projector is its real product plus terms with fewer sigma factors."""
        dims = SystemDims((2, 2))
        products = real_product_basis(dims)
        projectors = bilocal_projector_basis(dims)
        for index, projector in enumerate(projectors):
            coefficients = expand_in_basis(projector.matrix, products)
            label = products[index].label
            own = label.sigma_count
            # x factors and y pairs each carry a factor 1/2
            assert coefficients[index] == pytest.approx(0.5 ** (own - label.y_count // 2))
            for other, c in enumerate(coefficients):
                if other != index and abs(c) > 1e-12:
                    assert products[other].label.sigma_count < own


class TestBilocalProjectors:
    def test_x_replacement(self):
        op = bilocal_projector(BasisLabel((X12,)), (2,))
        assert np.allclose(op.matrix, (I2 + X) / 2)
        assert op.idempotence_error() <= 1e-12

    def test_yy_replacement(self):
        op = bilocal_projector(BasisLabel((Y12, Y12)), (2, 2))
        assert np.allclose(op.matrix, (np.kron(I2, I2) + np.kron(Y, Y)) / 2)
        assert np.allclose(sorted(np.linalg.eigvalsh(op.matrix)), [0, 0, 1, 1])
        assert op.label.blocks == ((0, 1),)

    @pytest.mark.parametrize("dims", [(2, 2), (2, 2, 2), (2, 3)])
    def test_certificate(self, dims):
        cert = certify(bilocal_projector_basis(SystemDims(dims)))
        assert cert.passed
        assert cert.rank == cert.target_dimension == cert.count
        assert cert.max_idempotence_error <= 1e-12
        assert cert.max_locality_degree == 2

    def test_preferred_pairing(self):
        dims = SystemDims((2, 2, 2, 2))
        label = BasisLabel((Y12, Y12, Y12, Y12))
        default = bilocal_projector(label, dims.dims)
        crossed = bilocal_projector(label, dims.dims, [(0, 2), (1, 3)])
        assert default.label.blocks == ((0, 1), (2, 3))
        assert crossed.label.blocks == ((0, 2), (1, 3))
        assert not np.allclose(default.matrix, crossed.matrix)

    def test_resolve_pairing_partial(self):
        assert resolve_pairing((0, 1, 3, 4), [(1, 4), (2, 3)]) == [(1, 4), (0, 3)]

    @pytest.mark.parametrize("pairing", [[(0, 0)], [(0, 1), (1, 2)], [(0, 5)], [(0, 1, 2)]])
    def test_invalid_pairing(self, pairing):
        with pytest.raises(DomainError):
            validate_pairing(pairing, 4)

    def test_odd_y_count(self):
        with pytest.raises(DomainError):
            bilocal_projector(BasisLabel((Y12, X12)), (2, 2))


class TestCertificates:
    def test_real_local_is_incomplete(self):
        cert = certify(local_real_product_basis(SystemDims((2, 2))))
        assert cert.independent
        assert not cert.complete
        assert cert.max_idempotence_error is None

    def test_as_dict_uses_exact_strings(self):
        data = certify(real_product_basis(SystemDims((2, 2)))).as_dict()
        assert data["count"] == "10"
        assert data["rank"] == "10"
        assert data["passed"] is True

    @pytest.mark.parametrize("kind, dims, count", [
        ("complex", (3,), 9),
        ("complex", (2, 2), 16),
        ("sigma", (3,), 9),
        ("real", (2, 2), 10),
        ("real-local", (2, 2), 9),
        ("bilocal-projector", (2, 2), 10),
    ])
    def test_build_basis(self, kind, dims, count):
        assert len(build_basis(kind, SystemDims(dims))) == count

    def test_build_basis_unknown(self):
        with pytest.raises(DomainError):
            build_basis("pauli", SystemDims((2,)))

    def test_mixed_dimensions_rejected(self):
        with pytest.raises(DomainError):
            OperatorBasis((HermitianOp(X), HermitianOp(np.eye(3))), BasisKind.SIGMA)


class TestCompleteness:
    @staticmethod
    def _rebuilt(matrix, basis):
        coefficients = expand_in_basis(matrix, basis)
        return np.tensordot(coefficients, basis.matrices(), axes=1)

    @pytest.mark.parametrize("n", [1, 2, 3, 4, 5])
    def test_complex_projectors_span_hermitian(self, n):
        rng = np.random.default_rng(n)
        a = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
        matrix = (a + a.conj().T) / 2
        assert np.allclose(self._rebuilt(matrix, complex_projector_basis(n)), matrix, atol=1e-10)

    @pytest.mark.parametrize("dims", [(2,), (3,), (2, 2), (2, 3), (3, 3), (2, 5), (2, 2, 2), (2, 2, 3), (3, 4), (2, 6)])
    @pytest.mark.parametrize("build", [real_product_basis, bilocal_projector_basis])
    def test_real_bases_span_symmetric(self, dims, build):
        system = SystemDims(dims)
        rng = np.random.default_rng(system.total)
        a = rng.normal(size=(system.total, system.total))
        matrix = (a + a.T) / 2
        assert np.allclose(self._rebuilt(matrix, build(system)), matrix, atol=1e-10)

    @pytest.mark.parametrize("pairing", [None, [(0, 1), (2, 3)], [(0, 2), (1, 3)], [(0, 3), (1, 2)], [(1, 2)]])
    def test_four_rebit_rank_under_pairings(self, pairing):
        basis = bilocal_projector_basis(SystemDims((2, 2, 2, 2)), pairing)
        rank, _ = linear_independence_rank(basis.ops)
        assert len(basis) == rank == 136
