import json

import pytest

from awqae.cli import main
from awqae.records import TABLE_HEADER, RunRecord, csv_to_rows


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_estimate_half(capsys):
    code, out, _ = run(capsys, "estimate", "--p", "0.5", "--allocation", "2,2", "--mode", "exact",
                       "--format", "json")
    assert code == 0
    rec = RunRecord.from_json(out)
    assert rec.outputs["a_tilde"] == pytest.approx(0.7071067811865476, abs=1e-15)
    assert rec.inputs["allocation"] == [2, 2]


def test_estimate_precise_phase(capsys):
    code, out, _ = run(capsys, "estimate", "--phi", "411/1024", "--mode", "exact", "--format", "json")
    assert code == 0
    assert json.loads(out)["outputs"]["a_tilde"] == pytest.approx(0.9523750127197659, abs=1e-12)


def test_estimate_bad_p(capsys):
    code, _, err = run(capsys, "estimate", "--p", "1.5")
    assert code == 1 and "error" in err


def test_estimate_needs_problem(capsys):
    assert run(capsys, "estimate")[0] == 1


def test_estimate_sampled_default_and_delta(capsys):
    code, out, _ = run(capsys, "estimate", "--phi", "5/16", "--allocation", "2,2",
                       "--delta-phi", "1/16", "--format", "json")
    doc = json.loads(out)
    assert code == 0 and doc["inputs"]["config"]["mode"] == "sampled"
    assert doc["outputs"]["confidence_check"]["passed"]


def test_run_record_round_trip(capsys, tmp_path):
    path = tmp_path / "rec.json"
    run(capsys, "estimate", "--p", "0.3", "--format", "json", "--out", str(path))
    rec = RunRecord.from_json(path.read_text())
    assert RunRecord.from_json(rec.to_json()) == rec
    assert len(rec.timing["block_ms"]) == 3


def test_compare_row_four(capsys):
    code, out, _ = run(capsys, "compare", "--a", "0.9524", "--mode", "exact", "--format", "json")
    assert code == 0 and json.loads(out)["error_pct"] == 0.0


def test_compare_rejects_budget_mismatch(capsys):
    code, _, err = run(capsys, "compare", "--p", "0.3", "--m", "8")
    assert code == 1 and "bit budgets differ" in err


def test_table_csv(capsys):
    code, out, _ = run(capsys, "table", "--format", "csv")
    assert code == 0
    lines = out.strip().splitlines()
    assert lines[0] == ",".join(TABLE_HEADER)
    rows = csv_to_rows(out, {"trial": int, "true_amplitude": float, "awqae_estimate": float,
                             "fullqae_estimate": float, "error_pct": float})
    assert len(rows) == 10 and all(r["error_pct"] == 0.0 for r in rows)


def test_table_random(capsys):
    code, out, _ = run(capsys, "table", "--trials", "5", "--seed", "7", "--format", "json")
    doc = json.loads(out)
    assert code == 0 and len(doc["rows"]) == 5
    assert set(TABLE_HEADER) <= set(doc["rows"][0])


@pytest.mark.parametrize("ntarget,nmarked,expected", [(4, 3, 3), (3, 2, 2), (3, 0, 0)])
def test_count(capsys, ntarget, nmarked, expected):
    code, out, _ = run(capsys, "count", "--ntarget", str(ntarget), "--nmarked", str(nmarked),
                       "--mode", "exact", "--format", "json")
    assert code == 0 and json.loads(out)["M_hat"] == expected


def test_count_explicit_marked(capsys):
    code, out, _ = run(capsys, "count", "--ntarget", "4", "--marked", "1,7,12", "--mode", "exact",
                       "--format", "json")
    assert code == 0 and json.loads(out)["M_hat"] == 3


def test_cost(capsys):
    code, out, _ = run(capsys, "cost", "--allocation", "3,3,4", "--format", "json")
    doc = json.loads(out)
    assert code == 0
    assert doc["total_counting_applications"] == 1023
    assert doc["total_resolution_applications"] == 9
    assert [b["max_power"] for b in doc["blocks"]] == [4, 32, 512]
    code, out, _ = run(capsys, "cost", "--allocation", "10", "--format", "json")
    assert json.loads(out)["total_counting_applications"] == 1023


def test_cost_rejects_one_bit_block(capsys):
    assert run(capsys, "cost", "--allocation", "1,9")[0] == 1


def test_sweep_small(capsys):
    code, out, _ = run(capsys, "sweep", "--allocation", "2,2", "--mode", "exact", "--format", "json")
    doc = json.loads(out)
    assert code == 0 and doc["cases_run"] == 7 and doc["failures"] == []


def test_parallel_flag_same_output(capsys):
    args = ["estimate", "--p", "0.41", "--seed", "9", "--format", "json"]
    a = json.loads(run(capsys, *args, "--parallel", "1")[1])["outputs"]["phi_raw"]
    b = json.loads(run(capsys, *args, "--parallel", "4")[1])["outputs"]["phi_raw"]
    assert a == b


def test_text_output(capsys):
    code, out, _ = run(capsys, "estimate", "--p", "0.5", "--allocation", "2,2", "--mode", "exact")
    assert code == 0 and "a_tilde" in out
