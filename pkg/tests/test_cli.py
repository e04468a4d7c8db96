import io
import json

import pytest

from irvaudit.cli import EXIT_DATA, EXIT_FULL_COUNT, EXIT_OK, EXIT_USAGE, main
from irvaudit.weights import SCHEME_GRAMMAR

DECISIVE = "candidates: A,B\nballots:\nA : 90\nB : 10\n"
TIE = "candidates: A,B\nballots:\nA : 5\nB : 5\n"
THREE = "# tiny\ncandidates: A,B,C\nreported_winner: A\nballots:\nA,B : 4\nB,A : 3\nC,B : 2\n"


@pytest.fixture
def contest_file(tmp_path):
    def write(text, name="contest.txt"):
        path = tmp_path / name
        path.write_text(text)
        return str(path)

    return write


class TestTabulate:
    def test_prints_record(self, contest_file, capsys):
        assert main(["tabulate", "--in", contest_file(THREE)]) == EXIT_OK
        out = capsys.readouterr().out
        assert "C -> A -> B" in out
        assert "winner: B" in out
        assert "Huge" in out

    def test_data_error_exit(self, contest_file, capsys):
        path = contest_file("candidates: A,B\nballots:\nA,A : 1\n")
        assert main(["tabulate", "--in", path]) == EXIT_DATA
        assert "error" in capsys.readouterr().err

    def test_missing_input(self, capsys):
        assert main(["tabulate"]) == EXIT_DATA


class TestUsageErrors:
    def test_unknown_subcommand(self, capsys):
        assert main(["frobnicate"]) == EXIT_USAGE

    def test_bad_flag(self, capsys):
        assert main(["tabulate", "--nope"]) == EXIT_USAGE

    def test_help_exits_zero_and_shows_grammar(self, capsys):
        for sub in ["tabulate", "audit", "simulate", "grid", "report", "serve"]:
            assert main([sub, "--help"]) == 0
            assert SCHEME_GRAMMAR in capsys.readouterr().out


class TestAudit:
    def test_file_driven_certifies(self, contest_file, capsys):
        code = main(["audit", "--in", contest_file(DECISIVE), "--seed", "4", "--every", "10"])
        assert code == EXIT_OK
        assert "certified" in capsys.readouterr().out

    def test_file_driven_full_count(self, contest_file, capsys):
        code = main(["audit", "--in", contest_file(TIE), "--seed", "4"])
        assert code == EXIT_FULL_COUNT

    def test_stdin_entry_with_undo_and_status(self, contest_file, capsys, monkeypatch):
        lines = "A\n\nundo\nA\nB,A\n-\n"
        monkeypatch.setattr("sys.stdin", io.StringIO(lines))
        code = main(["audit", "--in", contest_file(DECISIVE), "--stdin"])
        assert code == EXIT_OK
        out = capsys.readouterr().out
        assert "undone; 0 ballots stand" in out
        assert out.count("[0/100]") >= 1   # blank line printed a fresh status

    def test_stdin_rejects_unknown_name(self, contest_file, capsys, monkeypatch):
        monkeypatch.setattr("sys.stdin", io.StringIO("Z\nA\n"))
        assert main(["audit", "--in", contest_file(DECISIVE), "--stdin"]) == EXIT_OK
        assert "unknown candidate" in capsys.readouterr().err


class TestSimulateGridReport:
    def test_simulate_deterministic_bytes(self, contest_file, tmp_path, capsys):
        src = contest_file(DECISIVE)
        out1, out2 = str(tmp_path / "r1.csv"), str(tmp_path / "r2.csv")
        args = ["simulate", "--in", src, "--scheme", "largest", "--eta0", "0.52", "--d", "50",
                "--reps", "4", "--risk", "0.05", "--seed", "42"]
        assert main(args + ["--out", out1]) == EXIT_OK
        assert main(args + ["--out", out2]) == EXIT_OK
        assert open(out1, "rb").read() == open(out2, "rb").read()

    def test_simulate_wrong_winner(self, contest_file, tmp_path):
        out = str(tmp_path / "ww.csv")
        code = main(["simulate", "--in", contest_file(DECISIVE), "--reps", "2",
                     "--seed", "1", "--wrong-winner", "--out", out])
        assert code == EXIT_OK
        assert "full_count" in open(out).read()

    def test_grid_preset_and_report_pipeline(self, contest_file, tmp_path, capsys):
        records = str(tmp_path / "grid.csv")
        code = main(["grid", "--in", contest_file(DECISIVE), "--preset", "paper-grid",
                     "--reps", "1", "--seed", "5", "--out", records])
        assert code == EXIT_OK
        assert len(open(records).read().splitlines()) == 1 + 24

        agg = str(tmp_path / "agg.csv")
        assert main(["report", "--records", records, "--group-by", "cell", "--out", agg]) == EXIT_OK
        assert len(open(agg).read().splitlines()) == 1 + 24

        red = str(tmp_path / "red.csv")
        code = main(["report", "--records", records, "--baseline", "largest:0.52:50",
                     "--candidate", "largest:0.51:100", "--out", red])
        assert code == EXIT_OK
        assert "reduction_n" in open(red).read()

    def test_structured_output(self, contest_file, tmp_path):
        out = str(tmp_path / "r.json")
        main(["simulate", "--in", contest_file(DECISIVE), "--reps", "2", "--seed", "1",
              "--out", out, "--report-format", "structured"])
        assert isinstance(json.loads(open(out).read()), list)

    def test_fixture_source(self, tmp_path):
        out = str(tmp_path / "fx.csv")
        code = main(["simulate", "--fixture", "Huge", "--reps", "1", "--seed", "2", "--out", out])
        assert code == EXIT_OK
