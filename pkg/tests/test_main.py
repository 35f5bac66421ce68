"""Tests for the command-line interface."""

import io
import json

import pytest

from src.config import RANK_TOLERANCE_ENV
from src.main import parse_k_table, parse_pairing, run
from src.errors import DomainError, MalformedTableError


@pytest.fixture(autouse=True)
def clean_env(monkeypatch):
    monkeypatch.delenv(RANK_TOLERANCE_ENV, raising=False)


def invoke(capsys, *argv):
    status = run(list(argv))
    captured = capsys.readouterr()
    return status, captured.out, captured.err


def invoke_json(capsys, *argv):
    status, out, _ = invoke(capsys, *argv)
    return status, json.loads(out)


class TestCount:
    def test_three_rebits(self, capsys):
        status, data = invoke_json(capsys, "count", "--dims", "2,2,2", "--r", "2", "--s", "1")
        assert status == 0
        assert (data["k"], data["l"]) == ("36", "28")
        assert "audit" not in data

    def test_audit(self, capsys):
        status, data = invoke_json(capsys, "count", "--dims", "2,2,2,2", "--audit")
        assert data["audit"]["naive"] == "138"
        assert data["audit"]["true"] == "136"
        assert data["audit"]["per_class"] == {"1+1+1+1": "81", "2+1+1": "54", "2+2": "3"}

    def test_progress_goes_to_stderr(self, capsys):
        status, out, err = invoke(capsys, "count", "--dims", "2")
        assert "[1/3] Loading configuration..." in err
        assert out.lstrip().startswith("{")

    def test_text_format(self, capsys):
        status, out, _ = invoke(capsys, "count", "--dims", "2,2", "--format", "text")
        assert status == 0
        lines = out.splitlines()
        assert any(line.split() == ["k", "10"] for line in lines)

    def test_domain_error_exit(self, capsys):
        status, out, err = invoke(capsys, "count", "--dims", "2,2", "--r", "1", "--s", "2")
        assert status == 1
        assert out == ""
        assert err.strip().splitlines()[-1].startswith("ERROR:")

    def test_unknown_flag(self, capsys):
        with pytest.raises(SystemExit) as excinfo:
            run(["count", "--dims", "2", "--bogus"])
        assert excinfo.value.code == 2

    def test_deterministic(self, capsys):
        _, first, _ = invoke(capsys, "count", "--dims", "3,2", "--audit")
        _, second, _ = invoke(capsys, "count", "--dims", "3,2", "--audit")
        assert first == second


class TestFit:
    def test_stdin(self, capsys, monkeypatch):
        monkeypatch.setattr("sys.stdin", io.StringIO("1 1\n2 3\n3 6\n4 10\n"))
        status, data = invoke_json(capsys, "fit")
        assert (data["r"], data["s"]) == ("2", "1")

    def test_file_rejected(self, capsys, tmp_path):
        path = tmp_path / "table.txt"
        path.write_text("# perturbed\n1 1\n2 3\n3 7\n")
        status, data = invoke_json(capsys, "fit", str(path))
        assert status == 0
        assert data["fit"] is None
        assert data["reason"]

    def test_parse_table(self):
        assert parse_k_table("1 1\n\n2   4 # comment\n") == [(1, 1), (2, 4)]

    @pytest.mark.parametrize("text", ["", "1 1 1\n", "1 x\n"])
    def test_parse_table_rejects(self, text):
        with pytest.raises(MalformedTableError):
            parse_k_table(text)


class TestBasis:
    def test_check(self, capsys):
        status, data = invoke_json(capsys, "basis", "--dims", "2,2", "--kind", "bilocal-projector", "--check")
        assert status == 0
        assert data["count"] == "10"
        assert data["certificate"]["rank"] == "10"
        assert data["certificate"]["passed"] is True

    def test_dump(self, capsys, tmp_path):
        path = tmp_path / "basis.json"
        status, _ = invoke_json(capsys, "basis", "--dims", "2", "--kind", "complex", "--dump", str(path))
        assert status == 0
        assert len(json.loads(path.read_text())["operators"]) == 4

    def test_pairing(self, capsys):
        status, data = invoke_json(capsys, "basis", "--dims", "2,2,2,2", "--kind", "bilocal-projector", "--pairing", "0:2,1:3")
        assert status == 0
        assert data["count"] == "136"

    def test_parse_pairing(self):
        assert parse_pairing("0:2,1:3") == [(0, 2), (1, 3)]
        assert parse_pairing(None) is None
        with pytest.raises(DomainError):
            parse_pairing("0-2")


class TestTomo:
    def test_trials(self, capsys):
        status, data = invoke_json(capsys, "tomo", "--dims", "2,2", "--trials", "5", "--seed", "4")
        assert status == 0
        assert data["trials"] == "5"
        assert len(data["errors"]) == 5
        assert data["summary"]["passed"] is True

    def test_seeded_output_is_stable(self, capsys):
        _, first, _ = invoke(capsys, "tomo", "--dims", "2,2", "--trials", "3", "--seed", "9")
        _, second, _ = invoke(capsys, "tomo", "--dims", "2,2", "--trials", "3", "--seed", "9")
        assert first == second

    def test_saved_state(self, capsys, tmp_path):
        status, witness = invoke_json(capsys, "witness", "--dims", "2,2")
        state_path = tmp_path / "plus.json"
        state_path.write_text(json.dumps(witness["state_plus"]))
        out_path = tmp_path / "recovered.json"
        status, data = invoke_json(
            capsys, "tomo", "--dims", "2,2", "--state", str(state_path), "--save-state", str(out_path),
        )
        assert status == 0
        assert data["passed"] is True
        assert json.loads(out_path.read_text())["dim"] == "4"

    def test_incomplete_frame(self, capsys):
        status, out, err = invoke(capsys, "tomo", "--dims", "2,2", "--frame", "real-local", "--trials", "1")
        assert status == 1
        assert "deficit 1" in err

    def test_seed_range(self, capsys):
        status, _, err = invoke(capsys, "tomo", "--dims", "2", "--seed", "-1")
        assert status == 1
        assert "seed" in err


class TestWitness:
    def test_default(self, capsys):
        status, data = invoke_json(capsys, "witness")
        assert status == 0
        assert data["valid"] is True
        assert data["observable_gap"] == pytest.approx(2.0)
        assert data["discriminating_observable"] == "y12⊗y12"


class TestIdeality:
    def test_level3(self, capsys):
        status, data = invoke_json(capsys, "ideality", "--level", "3")
        assert data["coefficients"] == {"3+1": "1", "2+2": "1/3", "2+1+1": "-4/3", "1+1+1+1": "4"}
        assert data["epsilon"] == "1/2"

    def test_verify(self, capsys):
        status, data = invoke_json(
            capsys, "ideality", "--level", "3", "--verify-dims", "2,2,2,2", "--r", "2", "--s", "1",
        )
        assert status == 0
        assert data["residual"] == "0"

    def test_constraints(self, capsys):
        status, data = invoke_json(capsys, "ideality", "--level", "2", "--show-constraints")
        assert data["constraints"] == ["alpha = 1  [trivial-system-1]", "2*alpha + beta = 0  [trivial-system-1]"]

    def test_level_choices(self, capsys):
        with pytest.raises(SystemExit):
            run(["ideality", "--level", "4"])
