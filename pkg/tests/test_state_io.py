"""Tests for JSON persistence of states and bases."""

import json

import numpy as np
import pytest

from src.bases import bilocal_projector_basis
from src.dimension_calculus import SystemDims
from src.errors import InvalidStateError
from src.state_io import dump_basis, load_state, save_state
from src.tomography import FieldKind, random_state


def test_state_file_round_trip(tmp_path):
    rho = random_state(4, FieldKind.COMPLEX, np.random.default_rng(9))
    path = tmp_path / "states" / "rho.json"
    save_state(rho, path)
    loaded = load_state(path)
    assert loaded.field_kind is FieldKind.COMPLEX
    assert np.array_equal(loaded.matrix, rho.matrix)


def test_state_layout(tmp_path):
    rho = random_state(2, FieldKind.REAL, np.random.default_rng(0))
    path = tmp_path / "rho.json"
    save_state(rho, path)
    data = json.loads(path.read_text())
    assert data["dim"] == "2"
    assert data["field"] == "real"
    assert data["entries"][0][1] == [rho.matrix[0, 1].real, 0.0]


@pytest.mark.parametrize("document", [
    {"dim": "2", "field": "real"},
    {"dim": "2", "field": "quaternion", "entries": []},
    {"dim": "2", "field": "real", "entries": [[[1, 0]]]},
    {"dim": "1", "field": "real", "entries": [[[2, 0]]]},
    {"dim": "1", "field": "real", "entries": [["a"]]},
])
def test_load_rejects(tmp_path, document):
    path = tmp_path / "bad.json"
    path.write_text(json.dumps(document))
    with pytest.raises(InvalidStateError):
        load_state(path)


def test_load_rejects_invalid_json(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text("{not json")
    with pytest.raises(InvalidStateError):
        load_state(path)


def test_dump_basis(tmp_path):
    basis = bilocal_projector_basis(SystemDims((2, 2)))
    path = tmp_path / "basis.json"
    assert dump_basis(basis, path) == 10
    data = json.loads(path.read_text())
    assert data["kind"] == "bilocal-projector"
    assert data["dims"] == "2,2"
    assert len(data["operators"]) == 10
    first = data["operators"][0]
    assert first["dim"] == "4"
    assert first["reality"] == "real-symmetric"
    assert len(first["entries"]) == 4
    assert all(len(pair) == 2 for row in first["entries"] for pair in row)
