"""End-to-end command-line checks: formats, determinism, exit codes."""

import json
import math
import re

import pytest

from serveorder import (
    GameProbs,
    ServeParams,
    SplitMix64,
    match_distribution,
    match_expectations,
    over_line_prob,
    simulate_match,
)
from serveorder.cli import main
from conftest import record_from_outcome
from test_pipeline import SACKMANN_HEADER, _csv_row, fixture_records, write_csv


def run_cli(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


class TestPoint:
    def test_symmetric_point_zero_server_effect(self, capsys):
        code, out, _ = run_cli(capsys, "point", "--pa", "0.6", "--pb", "0.6")
        assert code == 0
        # totals and over-line differences vanish for equal players
        totals = re.search(r"match totals: .* diff=(\S+)", out)
        assert abs(float(totals.group(1))) < 1e-12
        for line in re.findall(r"^(\d+\.5),([^,\s]+),([^,\s]+),([^,\s]+)$", out, re.M):
            assert abs(float(line[3])) < 1e-12

    def test_headline_point_over_shift(self, capsys):
        code, out, _ = run_cli(capsys, "point", "--pa", "0.7", "--pb", "0.6")
        assert code == 0
        row = re.search(r"^19\.5,([^,\s]+),([^,\s]+),([^,\s]+)$", out, re.M)
        assert 0.08 <= abs(float(row.group(3))) <= 0.10

    def test_round_trip_matches_engine(self, capsys):
        code, out, _ = run_cli(capsys, "point", "--pa", "0.68", "--pb", "0.59")
        assert code == 0
        g = GameProbs.from_params(ServeParams(0.68, 0.59))
        exp = match_expectations(g)
        printed = {m.group(1): float(m.group(2))
                   for m in re.finditer(r"(T_A|T_B|H_A|H_B)=(\S+)", out)}
        assert math.isclose(printed["T_A"], exp.t_match_a, rel_tol=1e-11)
        assert math.isclose(printed["T_B"], exp.t_match_b, rel_tol=1e-11)
        assert math.isclose(printed["H_A"], exp.h_match_a, rel_tol=1e-11)
        assert math.isclose(printed["H_B"], exp.h_match_b, rel_tol=1e-11)
        dist_a = match_distribution(g, "A")
        for m in re.finditer(r"^(\d+\.5),([^,\s]+),", out, re.M):
            line = float(m.group(1))
            assert math.isclose(float(m.group(2)), over_line_prob(dist_a, line),
                                rel_tol=1e-11)

    def test_usage_error_exit_code(self, capsys):
        code, _, err = run_cli(capsys, "point", "--pa", "0.6")
        assert code == 1

    def test_validation_error_exit_code(self, capsys):
        code, _, err = run_cli(capsys, "point", "--pa", "1.5", "--pb", "0.6")
        assert code == 3
        assert "serveorder" in err


class TestScanCommand:
    def test_csv_deterministic_with_metadata(self, tmp_path, capsys):
        out1 = tmp_path / "scan1.csv"
        out2 = tmp_path / "scan2.csv"
        for out in (out1, out2):
            code, stdout, _ = run_cli(
                capsys, "scan", "--quantity", "totals-diff",
                "--grid-min", "0.55", "--grid-max", "0.65", "--step", "0.01",
                "--out", str(out))
            assert code == 0
            assert "totals-diff" in stdout
        data1 = out1.read_bytes()
        assert data1 == out2.read_bytes()
        text = data1.decode()
        assert text.startswith("# version=")
        assert "quantity=totals-diff" in text.splitlines()[0]
        assert "\r" not in text
        header_line = [l for l in text.splitlines() if not l.startswith("#")][0]
        assert header_line == "p_a,p_b,t_match_a,t_match_b,diff"

    def test_diagonal_rows_zero(self, tmp_path, capsys):
        out = tmp_path / "scan.csv"
        code, _, _ = run_cli(capsys, "scan", "--quantity", "totals-diff",
                             "--grid-min", "0.55", "--grid-max", "0.6",
                             "--step", "0.05", "--out", str(out))
        assert code == 0
        for line in out.read_text().splitlines():
            if line.startswith("#") or line.startswith("p_a"):
                continue
            pa, pb, _, _, diff = line.split(",")
            if pa == pb:
                assert abs(float(diff)) < 1e-12

    def test_jsonl_format(self, tmp_path, capsys):
        out = tmp_path / "scan.jsonl"
        code, _, _ = run_cli(capsys, "scan", "--quantity", "margin-diff",
                             "--grid-min", "0.55", "--grid-max", "0.6",
                             "--step", "0.05", "--format", "jsonl",
                             "--out", str(out))
        assert code == 0
        rows = [json.loads(line) for line in out.read_text().splitlines()]
        assert all(set(r) == {"p_a", "p_b", "h_match_a", "h_match_b", "diff"}
                   for r in rows)

    def test_overline_summary_block(self, tmp_path, capsys):
        out = tmp_path / "over.csv"
        code, stdout, _ = run_cli(
            capsys, "scan", "--quantity", "overline-diff",
            "--grid-min", "0.6", "--grid-max", "0.7", "--step", "0.05",
            "--lines", "19.5,21.5", "--out", str(out))
        assert code == 0
        text = out.read_text()
        assert "# summary over-19.5" in text
        assert "# summary over-21.5" in text
        assert "summary over-19.5" in stdout

    def test_io_error_exit_code(self, tmp_path, capsys):
        code, _, err = run_cli(capsys, "scan", "--quantity", "totals-diff",
                               "--grid-min", "0.55", "--grid-max", "0.6",
                               "--step", "0.05",
                               "--out", str(tmp_path / "missing" / "x.csv"))
        assert code == 2
        assert "i/o error" in err


class TestSimulateCommand:
    def test_fixed_seed_byte_identical(self, tmp_path, capsys):
        outputs = []
        files = []
        for name in ("a.json", "b.json"):
            path = tmp_path / name
            code, stdout, _ = run_cli(
                capsys, "simulate", "--pa", "0.65", "--pb", "0.6",
                "--n", "20000", "--seed", "9", "--partitions", "2",
                "--out", str(path))
            assert code == 0
            outputs.append(stdout)
            files.append(path.read_bytes())
        assert outputs[0] == outputs[1]
        assert files[0] == files[1]

    def test_comparison_within_four_sigma(self, tmp_path, capsys):
        code, stdout, _ = run_cli(
            capsys, "simulate", "--pa", "0.7", "--pb", "0.6",
            "--n", "50000", "--seed", "4")
        assert code == 0
        worst = float(re.search(r"max \|z\| = (\S+)", stdout).group(1))
        assert worst <= 4.0

    def test_degenerate_single_outcome(self, capsys):
        code, stdout, _ = run_cli(capsys, "simulate", "--pa", "1.0",
                                  "--pb", "0.0", "--n", "500", "--seed", "1")
        assert code == 0
        assert "degenerate parameters" in stdout
        freqs = re.findall(r"freq=(\S+)", stdout)
        assert freqs == ["1"]
        assert "winner=A total=12 margin=12" in stdout

    def test_tally_json_counts(self, tmp_path, capsys):
        path = tmp_path / "tally.json"
        code, _, _ = run_cli(capsys, "simulate", "--pa", "0.66", "--pb", "0.6",
                             "--n", "2000", "--seed", "3", "--out", str(path))
        assert code == 0
        payload = json.loads(path.read_text())
        assert payload["meta"]["rng"] == "splitmix64"
        assert sum(r["count"] for r in payload["key_counts"]) == 2000
        assert sum(r["count"] for r in payload["set1_counts"]) == 2000


@pytest.fixture
def fixture_csv(tmp_path):
    """The six hand-worked matches plus rejects, in Sackmann column layout."""
    rows = []
    for record in fixture_records():
        w, l = record.winner_serve, record.loser_serve
        rows.append({
            "tourney_id": "F", "match_num": record.match_id,
            "tourney_date": "20210301", "score": record.score, "best_of": 3,
            "w_svpt": w.serve_points, "w_1stIn": w.first_in,
            "w_1stWon": w.first_won, "w_2ndWon": w.second_won,
            "w_bpSaved": w.bp_saved, "w_bpFaced": w.bp_faced,
            "l_svpt": l.serve_points, "l_1stIn": l.first_in,
            "l_1stWon": l.first_won, "l_2ndWon": l.second_won,
            "l_bpSaved": l.bp_saved, "l_bpFaced": l.bp_faced,
        })
    rows.append(_csv_row("r1", "6-3 2-1 RET"))
    rows.append(_csv_row("r2", "6-4 4-6 [10-5]"))
    path = tmp_path / "atp_matches_2021.csv"
    write_csv(path, rows)
    return path


class TestPipelineCommands:
    def test_ingest_reports_and_audit(self, tmp_path, fixture_csv, capsys):
        records = tmp_path / "records.jsonl"
        audit = tmp_path / "audit.csv"
        code, stdout, _ = run_cli(
            capsys, "ingest", "--input", str(fixture_csv),
            "--out", str(records), "--audit", str(audit))
        assert code == 0
        assert "read 8 rows: accepted 6, rejected 2" in stdout
        lines = [json.loads(l) for l in records.read_text().splitlines()]
        assert len(lines) == 6
        verdicts = [l["verdict"] for l in lines]
        assert verdicts == ["W", "L", None, None, "W", None]
        assert lines[0]["sg_w_observed"] == 10
        audit_lines = audit.read_text().splitlines()
        assert audit_lines[1] == "reason,count"
        counts = dict(l.split(",") for l in audit_lines[2:])
        assert counts["retired"] == "1"
        assert counts["super_tiebreak"] == "1"
        assert counts["accepted"] == "6"
        assert counts["total"] == "8"

    def test_infer_table_structure(self, tmp_path, fixture_csv, capsys):
        out = tmp_path / "table1.csv"
        code, stdout, _ = run_cli(capsys, "infer", "--input", str(fixture_csv),
                                  "--out", str(out))
        assert code == 0
        lines = [l for l in out.read_text().splitlines() if not l.startswith("#")]
        assert lines[0] == "tour,total_matches,determined,indeterminate,determined_pct"
        assert lines[1] == "ATP,6,3,3,50"

    def test_residuals_table_structure(self, tmp_path, fixture_csv, capsys):
        out = tmp_path / "table2.csv"
        code, _, _ = run_cli(capsys, "residuals", "--input", str(fixture_csv),
                             "--out", str(out))
        assert code == 0
        lines = [l for l in out.read_text().splitlines() if not l.startswith("#")]
        assert lines[0] == "tour,first_server,n,mean,std,se,median,q25,q75"
        assert lines[1].startswith("ATP,L,1,")
        assert lines[2].startswith("ATP,W,2,")
        assert lines[3].startswith("ATP,ALL,3,")
        # single-observation group reports std/se as absent
        assert lines[1].split(",")[4] == ""

    def test_logit_table_structure(self, tmp_path, capsys):
        # synthetic sample big enough to fit: simulated matches, random server
        rng = SplitMix64(77)
        rows = []
        params = ServeParams(0.65, 0.60)
        for i in range(150):
            out = simulate_match(params, "A" if i % 2 else "B", rng)
            record = record_from_outcome(out, match_id=str(i))
            w, l = record.winner_serve, record.loser_serve
            rows.append({
                "tourney_id": "S", "match_num": i, "tourney_date": "20200101",
                "score": record.score, "best_of": 3,
                "w_svpt": w.serve_points, "w_1stIn": w.first_in,
                "w_1stWon": w.first_won, "w_2ndWon": w.second_won,
                "w_bpSaved": w.bp_saved, "w_bpFaced": w.bp_faced,
                "l_svpt": l.serve_points, "l_1stIn": l.first_in,
                "l_1stWon": l.first_won, "l_2ndWon": l.second_won,
                "l_bpSaved": l.bp_saved, "l_bpFaced": l.bp_faced,
            })
        path = tmp_path / "atp_sim.csv"
        write_csv(path, rows)
        out = tmp_path / "table3.csv"
        code, stdout, _ = run_cli(capsys, "logit", "--input", str(path),
                                  "--out", str(out))
        assert code == 0
        lines = [l for l in out.read_text().splitlines() if not l.startswith("#")]
        assert lines[0] == ("tour,beta1,se,odds_ratio,ci_low,ci_high,"
                            "p_value,n,converged,beta0,se0")
        fields = lines[1].split(",")
        assert fields[0] == "ATP"
        assert fields[8] == "true"

    def test_empty_input_success(self, tmp_path, capsys):
        path = tmp_path / "atp_empty.csv"
        write_csv(path, [])
        for command, out_name in (("infer", "t1.csv"), ("residuals", "t2.csv"),
                                  ("logit", "t3.csv")):
            out = tmp_path / out_name
            code, _, _ = run_cli(capsys, command, "--input", str(path),
                                 "--out", str(out))
            assert code == 0
            lines = [l for l in out.read_text().splitlines()
                     if not l.startswith("#")]
            assert len(lines) == 1  # header only

    def test_unreadable_input_io_exit(self, tmp_path, capsys):
        code, _, err = run_cli(capsys, "ingest", "--input",
                               str(tmp_path / "absent_atp.csv"))
        assert code == 2

    def test_unmapped_column_validation_exit(self, tmp_path, capsys):
        path = tmp_path / "atp_bad.csv"
        header = [c for c in SACKMANN_HEADER if c != "score"]
        row = {k: v for k, v in _csv_row("1", "6-3 6-4").items() if k != "score"}
        write_csv(path, [row], header=header)
        code, _, err = run_cli(capsys, "infer", "--input", str(path),
                               "--out", str(tmp_path / "t.csv"))
        assert code == 3

    def test_indeterminate_average_policy(self, tmp_path, fixture_csv, capsys):
        records = tmp_path / "records.jsonl"
        code, _, _ = run_cli(capsys, "ingest", "--input", str(fixture_csv),
                             "--indeterminate", "average", "--out", str(records))
        assert code == 0
        lines = [json.loads(l) for l in records.read_text().splitlines()]
        assert all(l["residual"] is not None for l in lines)
