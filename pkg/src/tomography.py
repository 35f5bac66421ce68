"""States, measurement frames, and reconstruction.

A state is held both as a density matrix and as the list of probabilities
(or expectation values) a frame of effects assigns to it. Reconstruction
solves the linear system p_i = Tr(F_i rho) over the target matrix space
(complex Hermitian or real symmetric) and rejects frames that do not span it.
"""

from dataclasses import dataclass
from enum import Enum
from itertools import product
from typing import Optional, Sequence

import numpy as np
from scipy import linalg

from .bases import (
    BasisLabel,
    HermitianOp,
    OperatorBasis,
    Reality,
    SiteLabel,
    bilocal_projector_basis,
    complex_projector_basis,
    linear_independence_rank,
    local_product_basis,
    local_real_product_basis,
    real_product_basis,
    sigma_basis,
)
from .bases.certificate import PROJECTOR_KINDS
from .bases.hermitian import RANK_TOLERANCE, embed
from .bases.real_products import site_matrix, y_pair_projector
from .dimension_calculus import (
    REAL_QUANTUM,
    RedundancyAudit,
    SystemDims,
    bilocal_redundancy_audit,
)
from .errors import DomainError, IncompleteFrameError, InconsistentDataError, InvalidStateError


PSD_TOLERANCE = 1e-12
CONSISTENCY_TOLERANCE = 1e-8


class FieldKind(str, Enum):
    COMPLEX = "complex"
    REAL = "real"


@dataclass(frozen=True)
class DensityMatrix:
    """An (unnormalized) density matrix: PSD with trace in (0, 1]."""
    op: HermitianOp
    field_kind: FieldKind = FieldKind.COMPLEX
    psd_tolerance: float = PSD_TOLERANCE

    def __post_init__(self):
        eigenvalues = np.linalg.eigvalsh(self.op.matrix)
        if eigenvalues[0] < -self.psd_tolerance:
            raise InvalidStateError(f"state is not positive semidefinite (min eigenvalue {eigenvalues[0]:.3e})")
        trace = self.trace
        if not 0 < trace <= 1 + self.psd_tolerance:
            raise InvalidStateError(f"state trace must lie in (0, 1], got {trace:.6g}")
        if self.field_kind is FieldKind.REAL and self.op.reality is not Reality.REAL_SYMMETRIC:
            raise InvalidStateError("a real-field state must be real symmetric")

    @classmethod
    def from_matrix(
        cls,
        matrix: np.ndarray,
        field_kind: FieldKind = FieldKind.COMPLEX,
        psd_tolerance: float = PSD_TOLERANCE,
    ) -> "DensityMatrix":
        return cls(HermitianOp(matrix), FieldKind(field_kind), psd_tolerance)

    @property
    def matrix(self) -> np.ndarray:
        return self.op.matrix

    @property
    def dim(self) -> int:
        return self.op.dim

    @property
    def trace(self) -> float:
        return float(np.trace(self.op.matrix).real)

    def distance(self, other: "DensityMatrix") -> float:
        """Frobenius distance."""
        return float(np.linalg.norm(self.matrix - other.matrix))


@dataclass(frozen=True)
class MeasurementFrame:
    """Fiducial effects of a system: an operator basis plus per-effect locality."""
    basis: OperatorBasis

    @property
    def frame_id(self) -> str:
        return f"{self.basis.kind.value}:{','.join(str(n) for n in self.basis.dims)}"

    @property
    def locality_degrees(self) -> tuple[int, ...]:
        return tuple(
            label.locality_degree if label is not None else len(self.basis.dims)
            for label in self.basis.labels
        )

    @property
    def projective(self) -> bool:
        return self.basis.kind in PROJECTOR_KINDS

    @property
    def dim(self) -> int:
        return self.basis.dim

    def __len__(self) -> int:
        return len(self.basis)


@dataclass(frozen=True)
class GptStateVector:
    """Probabilities (or expectations) of a state on the effects of a frame."""
    probs: np.ndarray
    frame_id: str

    def __post_init__(self):
        probs = np.array(self.probs, dtype=np.float64)
        probs.setflags(write=False)
        object.__setattr__(self, "probs", probs)

    def __len__(self) -> int:
        return len(self.probs)


FRAME_KINDS = ("complex", "bilocal-projector", "real-local", "real")


def build_frame(
    dims: SystemDims,
    frame_kind: str,
    pairing: Optional[Sequence[Sequence[int]]] = None,
) -> MeasurementFrame:
    """Frame by CLI name: complex projectors (products of them on several sites),
    bilocal projectors, 1-component real products, or real sigma products."""
    if frame_kind == "complex":
        if len(dims) == 1:
            return MeasurementFrame(complex_projector_basis(dims.dims[0]))
        return MeasurementFrame(local_product_basis(dims))
    if frame_kind == "bilocal-projector":
        return MeasurementFrame(bilocal_projector_basis(dims, pairing))
    if frame_kind == "real-local":
        return MeasurementFrame(local_real_product_basis(dims))
    if frame_kind == "real":
        return MeasurementFrame(real_product_basis(dims))
    raise DomainError(f"unknown frame kind '{frame_kind}' (choose from {', '.join(FRAME_KINDS)})")


def target_space(dim: int, field_kind: FieldKind) -> np.ndarray:
    """Basis matrices of the complex Hermitian or real symmetric dim x dim matrices."""
    ops = sigma_basis(dim)
    if FieldKind(field_kind) is FieldKind.REAL:
        return np.stack([op.matrix for op in ops if op.reality is Reality.REAL_SYMMETRIC])
    return ops.matrices()


def expectations(
    rho: DensityMatrix,
    frame: MeasurementFrame,
    tolerance: float = 1e-12,
) -> GptStateVector:
    """Tr(F_i rho) for every effect of the frame.

    Args:
        rho: State to measure; its dimension must match the frame.
        frame: Effects in basis order.
        tolerance: Allowed imaginary residue and slack on [0, 1].

    Returns:
        GptStateVector tagged with the frame id.

    Raises:
        DomainError: On a dimension mismatch or a non-real expectation.
        InvalidStateError: If a projector probability leaves [0, 1].
    """
    if rho.dim != frame.dim:
        raise DomainError(f"state dimension {rho.dim} does not match frame dimension {frame.dim}")
    values = np.einsum("iab,ba->i", frame.basis.matrices(), rho.matrix)
    residue = float(np.max(np.abs(values.imag)))
    if residue > tolerance:
        raise DomainError(f"expectations have imaginary residue {residue:.3e}")
    probs = values.real
    if frame.projective and (probs.min() < -tolerance or probs.max() > 1 + tolerance):
        raise InvalidStateError("projector probabilities left [0, 1]")
    return GptStateVector(probs, frame.frame_id)


def reconstruct(
    p: GptStateVector,
    frame: MeasurementFrame,
    field_kind: FieldKind = FieldKind.COMPLEX,
    rank_threshold: float = RANK_TOLERANCE,
    consistency_tolerance: float = CONSISTENCY_TOLERANCE,
    psd_tolerance: float = PSD_TOLERANCE,
) -> DensityMatrix:
    """The unique state in the target space reproducing the statistics.

    The target space is the complex Hermitian or real symmetric matrices of
    the frame's dimension. The design matrix Tr(F_i T_j) must have full
    column rank; the statistics are then solved by least squares.

    Args:
        p: Statistics in frame order.
        frame: Frame that produced `p`.
        field_kind: Field of the state being recovered.
        rank_threshold: Relative singular value below which a direction
            counts as unseen.
        consistency_tolerance: Largest accepted least-squares residual.
        psd_tolerance: Slack on negative eigenvalues of the result.

    Returns:
        The reconstructed DensityMatrix.

    Raises:
        IncompleteFrameError: If the frame does not span the target space.
        InconsistentDataError: If no state reproduces `p`.
        InvalidStateError: If the solution is not a valid state.
    """
    field_kind = FieldKind(field_kind)
    if len(p) != len(frame):
        raise DomainError(f"{len(p)} statistics for a frame of {len(frame)} effects")
    targets = target_space(frame.dim, field_kind)
    design = np.einsum("iab,jba->ij", frame.basis.matrices(), targets).real

    singular = linalg.svdvals(design)
    rank = int(np.count_nonzero(singular > rank_threshold * singular[0])) if singular[0] > 0 else 0
    if rank < len(targets):
        raise IncompleteFrameError(rank, len(targets))

    coefficients, *_ = linalg.lstsq(design, p.probs)
    residual = float(np.linalg.norm(design @ coefficients - p.probs))
    if residual > consistency_tolerance:
        raise InconsistentDataError(residual, consistency_tolerance)

    matrix = np.einsum("j,jab->ab", coefficients, targets)
    return DensityMatrix(HermitianOp(matrix), field_kind, psd_tolerance)


def qubit_gpt_to_density(p: Sequence[float]) -> DensityMatrix:
    """Density matrix of a qubit from (p_z+, p_z-, p_x+, p_y+).

    The diagonal is (p_z+, p_z-) and the upper off-diagonal entry is
    a = p_x+ - i p_y+ - (1 - i)(p_z+ + p_z-) / 2.
    """
    if len(p) != 4:
        raise DomainError(f"a qubit fiducial vector has 4 entries, got {len(p)}")
    z_plus, z_minus, x_plus, y_plus = (float(v) for v in p)
    a = x_plus - 1j * y_plus - (1 - 1j) / 2 * (z_plus + z_minus)
    matrix = np.array([[z_plus, a], [np.conj(a), z_minus]], dtype=np.complex128)
    return DensityMatrix.from_matrix(matrix)


def density_to_qubit_gpt(rho: DensityMatrix) -> np.ndarray:
    """Inverse of qubit_gpt_to_density: probabilities on the z+, z-, x+, y+ filters."""
    if rho.dim != 2:
        raise DomainError(f"expected a qubit state, got dimension {rho.dim}")
    return expectations(rho, MeasurementFrame(complex_projector_basis(2))).probs.copy()


def random_state(
    dim: int,
    field_kind: FieldKind,
    rng: np.random.Generator,
) -> DensityMatrix:
    """rho = G G^dagger / Tr with standard normal G (real G for the real field)."""
    field_kind = FieldKind(field_kind)
    g = rng.standard_normal((dim, dim))
    if field_kind is FieldKind.COMPLEX:
        g = g + 1j * rng.standard_normal((dim, dim))
    matrix = g @ g.conj().T
    matrix = (matrix + matrix.conj().T) / 2
    return DensityMatrix.from_matrix(matrix / np.trace(matrix).real, field_kind)


@dataclass
class RoundTripSummary:
    """Per-trial Frobenius errors of reconstruct(expectations(rho))."""
    dims: tuple[int, ...]
    field_kind: FieldKind
    frame_id: str
    errors: list[float]
    tolerance: float

    @property
    def max_error(self) -> float:
        return max(self.errors, default=0.0)

    @property
    def mean_error(self) -> float:
        return float(np.mean(self.errors)) if self.errors else 0.0

    @property
    def passed(self) -> bool:
        return self.max_error <= self.tolerance


def round_trip_trials(
    dims: SystemDims,
    field_kind: FieldKind,
    frame_kind: str,
    trials: int,
    seed: int = 0,
    tolerance: float = 1e-10,
    rank_threshold: float = RANK_TOLERANCE,
) -> RoundTripSummary:
    """Reconstruct `trials` random states through a frame and record the errors.

    Args:
        dims: System whose random states are drawn.
        field_kind: Field of the drawn states.
        frame_kind: Frame name accepted by build_frame.
        trials: Number of states, at least 1.
        seed: Seed for numpy's default_rng; equal seeds give equal errors.
        tolerance: Largest Frobenius error that still passes.

    Returns:
        RoundTripSummary with one error per trial.
    """
    if trials < 1:
        raise DomainError(f"need at least one trial, got {trials}")
    field_kind = FieldKind(field_kind)
    frame = build_frame(dims, frame_kind)
    rng = np.random.default_rng(seed)
    errors = []
    for _ in range(trials):
        rho = random_state(dims.total, field_kind, rng)
        recovered = reconstruct(expectations(rho, frame), frame, field_kind, rank_threshold)
        errors.append(rho.distance(recovered))
    return RoundTripSummary(dims.dims, field_kind, frame.frame_id, errors, tolerance)


@dataclass
class WitnessReport:
    """Two real states that every 1-component product observable confuses."""
    state_plus: DensityMatrix
    state_minus: DensityMatrix
    global_distance: float
    max_local_stat_gap: float
    local_observable_count: int
    discriminating_observable: BasisLabel
    observable_gap: float
    tolerance: float = 1e-12

    @property
    def is_valid(self) -> bool:
        return (
            self.global_distance > 0.1
            and self.max_local_stat_gap <= self.tolerance
            and self.observable_gap > 0.1
        )


Y12 = SiteLabel("y", v=2, u=1)


def local_tomography_witness(dims: SystemDims, tolerance: float = 1e-12) -> WitnessReport:
    """rho+- = (I (x) I +- Y (x) Y) / (N_A N_B), with Y = sigma_y on levels 1, 2.

    Every product A (x) B of real single-site observables has the same
    expectation on both states, while the 2-component observable Y (x) Y
    separates them.
    """
    if len(dims) != 2:
        raise DomainError(f"the witness is a two-site construction, got {len(dims)} sites")
    if min(dims) < 2:
        raise DomainError(f"both sites need N >= 2, got {dims.dims}")
    n_a, n_b = dims.dims
    yy = embed({0: site_matrix(Y12, n_a), 1: site_matrix(Y12, n_b)}, dims.dims)
    identity = np.eye(dims.total)
    plus = DensityMatrix.from_matrix((identity + yy) / dims.total, FieldKind.REAL)
    minus = DensityMatrix.from_matrix((identity - yy) / dims.total, FieldKind.REAL)
    difference = plus.matrix - minus.matrix

    local_a = [op for op in sigma_basis(n_a) if op.reality is Reality.REAL_SYMMETRIC]
    local_b = [op for op in sigma_basis(n_b) if op.reality is Reality.REAL_SYMMETRIC]
    gaps = [
        abs(np.trace(np.kron(a.matrix, b.matrix) @ difference))
        for a, b in product(local_a, local_b)
    ]

    label = BasisLabel((Y12, Y12), blocks=((0, 1),))
    return WitnessReport(
        state_plus=plus,
        state_minus=minus,
        global_distance=plus.distance(minus),
        max_local_stat_gap=float(max(gaps)),
        local_observable_count=len(gaps),
        discriminating_observable=label,
        observable_gap=float(np.trace(yy @ difference).real),
        tolerance=tolerance,
    )


FOUR_REBITS = SystemDims((2, 2, 2, 2))
REBIT_PAIRINGS = {
    "AB|CD": ((0, 1), (2, 3)),
    "AC|BD": ((0, 2), (1, 3)),
    "AD|BC": ((0, 3), (1, 2)),
}


@dataclass
class FourRebitReport:
    """The sigma_y^4 coefficient as seen by the three pair-pair measurements."""
    coefficients: dict[str, float]
    direct_coefficient: float
    bilocal_rank: int
    audit: RedundancyAudit
    tolerance: float = 1e-12

    @property
    def spread(self) -> float:
        values = list(self.coefficients.values()) + [self.direct_coefficient]
        return max(values) - min(values)

    @property
    def passed(self) -> bool:
        return (
            self.spread <= self.tolerance
            and self.bilocal_rank == self.audit.true_k
            and self.audit.surplus == 2
        )


def _pairing_coefficient(rho: DensityMatrix, pairing: tuple[tuple[int, int], ...]) -> float:
    """sigma_y^4 coefficient extracted from pair-projector probabilities.

    With Pi = (I + Y Y) / 2 on each pair, Tr(Pi rho) = (t + <YY>) / 2 and
    Tr(Pi_1 Pi_2 rho) = (t + <YY>_1 + <YY>_2 + <Y^4>) / 4.
    """
    dims = FOUR_REBITS.dims
    first, second = (y_pair_projector(i, Y12, j, Y12, dims) for i, j in pairing)
    t = rho.trace
    q_first = np.trace(first @ rho.matrix).real
    q_second = np.trace(second @ rho.matrix).real
    q_both = np.trace(first @ second @ rho.matrix).real
    y4 = 4 * q_both - t - (2 * q_first - t) - (2 * q_second - t)
    return float(y4 / FOUR_REBITS.total)


def four_rebit_coincidence(
    state: Optional[DensityMatrix] = None,
    seed: int = 0,
    tolerance: float = 1e-12,
    rank_threshold: float = RANK_TOLERANCE,
) -> FourRebitReport:
    """Show that the three pair-pair measurements recover one and the same parameter.

    The coefficient of sigma_y^(x)4 in the Pauli expansion is read off from the
    AB|CD, AC|BD and AD|BC projector statistics; the bilocal frame itself has
    rank 136 while the naive count is 138.
    """
    if state is None:
        state = random_state(FOUR_REBITS.total, FieldKind.REAL, np.random.default_rng(seed))
    if state.dim != FOUR_REBITS.total:
        raise DomainError(f"expected a four-rebit state of dimension 16, got {state.dim}")

    coefficients = {name: _pairing_coefficient(state, pairing) for name, pairing in REBIT_PAIRINGS.items()}
    y = site_matrix(Y12, 2)
    y4 = embed({site: y for site in range(4)}, FOUR_REBITS.dims)
    direct = float(np.trace(y4 @ state.matrix).real / FOUR_REBITS.total)

    rank, _ = linear_independence_rank(bilocal_projector_basis(FOUR_REBITS).ops, rank_threshold)
    return FourRebitReport(
        coefficients=coefficients,
        direct_coefficient=direct,
        bilocal_rank=rank,
        audit=bilocal_redundancy_audit(FOUR_REBITS, REAL_QUANTUM),
        tolerance=tolerance,
    )
