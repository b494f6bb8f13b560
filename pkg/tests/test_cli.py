"""
End-to-end tests for the relinfo command line
Run with: python -m pytest tests/test_cli.py -v
"""
import json
import pytest
import sys
import os

# Add parent directory to path
sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from formatters.output import ESTIMATE_COLUMNS
from relinfo_cli import main

STUDIES = "id,n,n0,x0\nA,1000,800,440\nB,300,200,130\n"
TRAP = ("id,n,n0,x0,unit_cost,setup_cost,max_resolvable\n"
        "A,100,80,48,1,0,2\n"
        "B,100,80,48,0.5,6,8\n")


def error_payload(stderr):
    """The JSON error document; log lines may precede it"""
    lines = [line for line in stderr.splitlines() if line.startswith("{")]
    return json.loads(lines[-1])["error"]


@pytest.fixture
def write_table(tmp_path):
    def write(text, name="studies.csv"):
        path = tmp_path / name
        path.write_text(text, encoding="utf-8")
        return str(path)
    return write


class TestEstimate:

    def test_json_report(self, write_table, capsys):
        assert main(["estimate", write_table(STUDIES), "-q"]) == 0
        payload = json.loads(capsys.readouterr().out)
        row = payload["variables"][0]
        assert payload["log_base"] == "e"
        assert row["plugin_ri1"] == pytest.approx(0.8, abs=1e-12)
        assert row["equivalent_additional_individuals"] == pytest.approx(250, abs=1e-9)
        assert row["lod_ob"] == pytest.approx(4.0067, abs=1e-4)
        assert row["stable"] is True

    def test_log_base_ten(self, write_table, capsys):
        assert main(["estimate", write_table(STUDIES), "--log-base", "10", "-q"]) == 0
        row = json.loads(capsys.readouterr().out)["variables"][0]
        assert row["lod_ob"] == pytest.approx(4.0067 / 2.302585, abs=1e-4)
        assert row["plugin_ri1"] == pytest.approx(0.8, abs=1e-12)

    def test_partial_resolution(self, write_table, capsys):
        assert main(["estimate", write_table("id,n,n0,x0\nA,100,80,44\n"), "--n1", "10", "-q"]) == 0
        row = json.loads(capsys.readouterr().out)["variables"][0]
        assert row["expected_inverse_ri"] == pytest.approx(1.125, abs=1e-12)

    def test_complete_row(self, write_table, capsys):
        assert main(["estimate", write_table("id,n,n0,x0\nA,800,800,440\n"), "-q"]) == 0
        row = json.loads(capsys.readouterr().out)["variables"][0]
        assert row["plugin_ri1"] == 1.0
        assert row["sd_inverse_ri"] == 0.0
        assert row["equivalent_additional_individuals"] == 0.0

    def test_unstable_row_is_flagged(self, write_table, capsys):
        table = write_table(STUDIES + "C,100,80,40\n")
        assert main(["estimate", table, "-q"]) == 0
        rows = json.loads(capsys.readouterr().out)["variables"]
        assert rows[2]["stable"] is False
        assert rows[2]["error"]

    def test_hard_error_exit_code(self, write_table, capsys):
        assert main(["estimate", write_table(STUDIES), "--n1", "150", "-q"]) == 1
        error = error_payload(capsys.readouterr().err)
        assert error["rows"][0]["id"] == "B"

    def test_csv_format(self, write_table, capsys):
        assert main(["estimate", write_table(STUDIES), "--format", "csv", "-q"]) == 0
        lines = capsys.readouterr().out.splitlines()
        assert lines[0] == ",".join(ESTIMATE_COLUMNS)
        assert len(lines) == 3

    def test_output_file(self, write_table, tmp_path, capsys):
        out = tmp_path / "report.json"
        assert main(["estimate", write_table(STUDIES), "-o", str(out), "-q"]) == 0
        assert capsys.readouterr().out == ""
        assert json.loads(out.read_text(encoding="utf-8"))["schema"] == "relinfo/1"

    def test_parse_error(self, write_table, capsys):
        assert main(["estimate", write_table("id,n,n0,x0\nA,100,80,90\n"), "-q"]) == 1
        error = error_payload(capsys.readouterr().err)
        assert error["type"] == "TableParseError"
        assert error["rows"][0]["row"] == 2


class TestDesign:

    def test_exact(self, write_table, capsys):
        assert main(["design", write_table(TRAP), "--budget", "10", "-q"]) == 0
        payload = json.loads(capsys.readouterr().out)
        assert payload["allocations"] == {"A": 0, "B": 8}
        assert payload["optimal"] is True
        assert payload["objective"] == pytest.approx(1.05, abs=1e-12)
        assert payload["overall_ri1"] == pytest.approx(1 / 1.05, abs=1e-12)

    def test_greedy(self, write_table, capsys):
        assert main(["design", write_table(TRAP), "--budget", "10", "--mode", "greedy", "-q"]) == 0
        payload = json.loads(capsys.readouterr().out)
        assert payload["allocations"] == {"A": 2, "B": 4}
        assert payload["optimal"] is False

    def test_oracle_agrees(self, write_table, capsys):
        table = write_table(TRAP)
        assert main(["design", table, "--budget", "10", "-q"]) == 0
        exact = json.loads(capsys.readouterr().out)
        assert main(["design", table, "--budget", "10", "--oracle", "-q"]) == 0
        oracle = json.loads(capsys.readouterr().out)
        assert oracle["objective"] == pytest.approx(exact["objective"], abs=1e-12)

    def test_negative_budget(self, write_table, capsys):
        assert main(["design", write_table(TRAP), "--budget", "-1", "-q"]) == 1
        assert error_payload(capsys.readouterr().err)["type"] == "DomainError"


class TestCompare:

    def test_break_even(self, write_table, capsys):
        table = write_table("id,n,n0,x0\nA,1000,800,440\n")
        assert main(["compare", table, "--n-new", "250", "-q"]) == 0
        row = json.loads(capsys.readouterr().out)["comparisons"][0]
        assert row["larger"] == "equal"
        assert row["break_even_n_new"] == pytest.approx(250, abs=1e-9)


class TestSimulate:

    @staticmethod
    def run(out_dir, workers):
        argv = ["simulate", "--n", "1000", "--n0", "800", "--true-p", "0.6", "--reps", "20000",
                "--seed", "42", "--bins", "20", "--workers", str(workers),
                "--out-dir", str(out_dir), "-q"]
        return main(argv)

    def test_outputs_written(self, tmp_path, capsys):
        assert self.run(tmp_path, 1) == 0
        payload = json.loads(capsys.readouterr().out)
        assert payload["config"]["seed"] == 42
        assert payload["correlation"] > 0.5
        assert payload["ratio_stats"]["count"] + payload["ratio_stats"]["excluded"] == 20000
        contour = (tmp_path / "contour.csv").read_text(encoding="utf-8").splitlines()
        assert contour[0] == "x_bin_center,y_bin_center,count,density"
        assert len(contour) == 1 + 20 * 20
        lines = (tmp_path / "reference_lines.csv").read_text(encoding="utf-8").splitlines()
        assert [line.split(",")[0] for line in lines[1:]] == ["1.0", "1.25"]

    def test_byte_identical_across_workers(self, tmp_path, capsys):
        one, four = tmp_path / "one", tmp_path / "four"
        assert self.run(one, 1) == 0
        assert self.run(four, 4) == 0
        for name in ("contour.csv", "reference_lines.csv", "ratio_stats.json"):
            assert (one / name).read_bytes() == (four / name).read_bytes()

    def test_complete_data_on_diagonal(self, tmp_path, capsys):
        argv = ["simulate", "--n", "200", "--n0", "200", "--true-p", "0.6", "--reps", "3000",
                "--seed", "1", "--bins", "10", "--out-dir", str(tmp_path), "-q"]
        assert main(argv) == 0
        rows = (tmp_path / "contour.csv").read_text(encoding="utf-8").splitlines()[1:]
        for index, row in enumerate(rows):
            i, j = divmod(index, 10)
            if i != j:
                assert row.split(",")[2] == "0"

    def test_seed_required(self, tmp_path, capsys):
        with pytest.raises(SystemExit) as info:
            main(["simulate", "--out-dir", str(tmp_path)])
        assert info.value.code == 2
        error = json.loads(capsys.readouterr().err)["error"]
        assert error["type"] == "UsageError"
        assert "--seed" in error["message"]


class TestUsageErrors:

    @pytest.mark.parametrize("argv", [
        ["simulate", "--reps", "10", "--seed", "1", "--true-p", "abc"],
        ["design", "studies.csv"],
        ["estimate", "studies.csv", "--log-base", "2"],
        ["estimate", "studies.csv", "--n1", "-4"],
        ["bogus"],
        [],
    ])
    def test_json_on_stderr(self, argv, capsys):
        with pytest.raises(SystemExit) as info:
            main(argv)
        assert info.value.code == 2
        payload = json.loads(capsys.readouterr().err)
        assert payload["schema"] == "relinfo/1"
        assert payload["error"]["type"] == "UsageError"
        assert payload["error"]["usage"].startswith("usage: relinfo")


class TestCurves:

    def test_csv(self, tmp_path, capsys):
        out = tmp_path / "sd.csv"
        argv = ["curves", "--n", "100", "--p0", "0.5", "--true-p", "0.55", "0.7", "-o", str(out), "-q"]
        assert main(argv) == 0
        lines = out.read_text(encoding="utf-8").splitlines()
        assert lines[0] == "x0,sd,density_p0.55,density_p0.7"
        assert len(lines) == 1 + 81
        assert lines[1].split(",")[1] == ""
        assert lines[41].split(",")[1] == ""
        assert float(lines[45].split(",")[1]) > 0


if __name__ == "__main__":
    pytest.main([__file__, "-v"])
