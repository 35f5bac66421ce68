# Operator bases module
from .hermitian import (
    BasisKind,
    BasisLabel,
    HermitianOp,
    OperatorBasis,
    Reality,
    SiteLabel,
    expand_in_basis,
    linear_independence_rank,
    tensor,
)
from .complex_projectors import complex_projector_basis, local_product_basis
from .real_products import (
    bilocal_projector_basis,
    local_real_product_basis,
    real_product_basis,
    sigma_basis,
)
from .certificate import BasisCertificate, build_basis, certify

__all__ = [
    "BasisCertificate",
    "BasisKind",
    "BasisLabel",
    "HermitianOp",
    "OperatorBasis",
    "Reality",
    "SiteLabel",
    "bilocal_projector_basis",
    "build_basis",
    "certify",
    "complex_projector_basis",
    "expand_in_basis",
    "linear_independence_rank",
    "local_product_basis",
    "local_real_product_basis",
    "real_product_basis",
    "sigma_basis",
    "tensor",
]
