"""Save and load density matrices and operator bases as JSON."""

import json
from pathlib import Path

import numpy as np

from .bases import OperatorBasis
from .errors import InvalidStateError
from .tomography import PSD_TOLERANCE, DensityMatrix, FieldKind


def _encode_matrix(matrix: np.ndarray) -> list[list[list[float]]]:
    """Row-major entries as [re, im] pairs."""
    return [[[float(z.real), float(z.imag)] for z in row] for row in matrix]


def _decode_matrix(entries, dim: int) -> np.ndarray:
    try:
        matrix = np.array(
            [[complex(re, im) for re, im in row] for row in entries],
            dtype=np.complex128,
        )
    except (TypeError, ValueError) as e:
        raise InvalidStateError(f"entries must be rows of [re, im] pairs: {e}") from e
    if matrix.shape != (dim, dim):
        raise InvalidStateError(f"expected a {dim}x{dim} matrix, got shape {matrix.shape}")
    return matrix


def state_to_dict(rho: DensityMatrix) -> dict:
    return {
        "dim": str(rho.dim),
        "field": rho.field_kind.value,
        "entries": _encode_matrix(rho.matrix),
    }


def state_from_dict(data: dict, psd_tolerance: float = PSD_TOLERANCE) -> DensityMatrix:
    """Rebuild a density matrix, re-running every state check."""
    try:
        dim = int(data["dim"])
        field_kind = FieldKind(data["field"])
        entries = data["entries"]
    except (KeyError, TypeError, ValueError) as e:
        raise InvalidStateError(f"malformed state document: {e}") from e
    return DensityMatrix.from_matrix(_decode_matrix(entries, dim), field_kind, psd_tolerance)


def save_state(rho: DensityMatrix, path: str | Path) -> None:
    """Write a state to a JSON file.

    Args:
        rho: State to save.
        path: Destination file; parent directories are created.
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as f:
        json.dump(state_to_dict(rho), f, indent=2)


def load_state(path: str | Path, psd_tolerance: float = PSD_TOLERANCE) -> DensityMatrix:
    """Read a state written by save_state.

    Args:
        path: JSON file to read.
        psd_tolerance: Slack allowed on negative eigenvalues.

    Returns:
        The validated DensityMatrix.
    """
    try:
        with open(path) as f:
            data = json.load(f)
    except json.JSONDecodeError as e:
        raise InvalidStateError(f"{path} is not valid JSON: {e}") from e
    return state_from_dict(data, psd_tolerance)


def basis_to_dict(basis: OperatorBasis) -> dict:
    return {
        "kind": basis.kind.value,
        "dims": ",".join(str(n) for n in basis.dims),
        "count": str(len(basis)),
        "operators": [
            {
                "label": str(op.label) if op.label is not None else None,
                "dim": str(op.dim),
                "reality": op.reality.value,
                "entries": _encode_matrix(op.matrix),
            }
            for op in basis
        ],
    }


def dump_basis(basis: OperatorBasis, path: str | Path) -> int:
    """Write every operator of a basis to JSON; returns the operator count."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as f:
        json.dump(basis_to_dict(basis), f, indent=2)
    return len(basis)
