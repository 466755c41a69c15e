import csv
import io
import json

import pytest

from conftest import chain_port
from sutp.cli import main
from sutp.domain import HIGH, BigTrain, Instance, UnitTrain
from sutp.generator import tiny_instance
from sutp.io import read_instance, read_solution, write_instance
from sutp.oracle import brute_force_optimal


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


def test_analyze_reference_port(capsys):
    code, out, _ = run(capsys, "analyze")
    assert code == 0
    assert "max_flow 13" in out
    assert "naive_upper_bound 141.26" in out
    assert "paths 89" in out


def test_enumerate_paths_for_c70(capsys):
    code, out, _ = run(capsys, "enumerate-paths", "--train-type", "C70")
    assert code == 0
    rows = [r for r in csv.reader(io.StringIO(out)) if r and not r[0].startswith("#")]
    assert len(rows) == 1 + 10
    assert "# total 10" in out


def test_generate_grid_subset(tmp_path, capsys):
    code, _, _ = run(capsys, "generate", "--out-dir", tmp_path, "--sizes", "5,10", "--seeds", "2")
    assert code == 0
    files = sorted(p.name for p in tmp_path.glob("sutp_*.json"))
    assert files == ["sutp_05_00.json", "sutp_05_01.json", "sutp_10_00.json", "sutp_10_01.json"]
    manifest = json.loads((tmp_path / "manifest.json").read_text())
    assert [m["bigTrains"] for m in manifest] == [5, 5, 10, 10]
    assert json.loads((tmp_path / "sutp_05_00.json").read_text())["port"] == "reference"


def test_generate_full_grid_writes_420_files(tmp_path, capsys):
    code, out, _ = run(capsys, "generate", "--out-dir", tmp_path)
    assert code == 0
    assert len(list(tmp_path.glob("sutp_*.json"))) == 420


@pytest.fixture
def tiny_file(tmp_path):
    inst = tiny_instance(12)
    path = tmp_path / "tiny.json"
    write_instance(inst, path)
    return inst, path


def test_solve_tiny_matches_oracle(tiny_file, tmp_path, capsys):
    inst, path = tiny_file
    out_path = tmp_path / "sol.json"
    code, out, _ = run(capsys, "solve", path, "--no-lns", "--out", out_path, "--time-limit", 30)
    assert code == 0
    assert "status optimal" in out
    best, _ = brute_force_optimal(inst)
    assert read_solution(out_path).makespan == best


def test_solve_export_validate_round_trip(tiny_file, tmp_path, capsys):
    inst, path = tiny_file
    sol = tmp_path / "sol.json"
    trace = tmp_path / "trace.csv"
    gantt = tmp_path / "gantt.csv"
    assert run(capsys, "solve", path, "--out", sol, "--trace", trace, "--time-limit", 10)[0] == 0
    code, out, _ = run(capsys, "validate", path, sol)
    assert code == 0 and out.startswith("ok")
    assert run(capsys, "export-gantt", path, sol, "--out", gantt)[0] == 0
    rows = list(csv.DictReader(gantt.open()))
    assert len(rows) == len(inst.units)
    for r in rows:
        arrival, release, start, end = (int(r[k]) for k in ("arrival", "release", "start", "end"))
        assert arrival <= release <= start < end
        assert start - arrival >= 90
    lanes = {r["dumper"] for r in rows}
    assert lanes <= {d.id for d in inst.port.dumpers}
    header = trace.read_text().splitlines()[0]
    assert header == "iter,elapsed_ms,makespan,destroy_window"


def test_validate_reports_violations(tiny_file, tmp_path, capsys):
    _, path = tiny_file
    sol = tmp_path / "sol.json"
    run(capsys, "solve", path, "--no-lns", "--out", sol, "--time-limit", 10)
    doc = json.loads(sol.read_text())
    doc["trains"][0]["end"] += 1
    doc["makespan"] = max(t["end"] for t in doc["trains"])
    sol.write_text(json.dumps(doc))
    code, out, _ = run(capsys, "validate", path, sol)
    assert code == 2
    assert "C11" in out


def test_validate_structural_error(tiny_file, tmp_path, capsys):
    _, path = tiny_file
    sol = tmp_path / "sol.json"
    run(capsys, "solve", path, "--no-lns", "--out", sol, "--time-limit", 10)
    doc = json.loads(sol.read_text())
    doc["trains"][0]["dumper"] = "NOPE"
    sol.write_text(json.dumps(doc))
    code, _, err = run(capsys, "validate", path, sol)
    assert code == 1
    assert "structural" in err


def test_infeasible_instance_exit_code(tmp_path, capsys):
    port = chain_port()
    inst = Instance(port, (BigTrain("B1", 0, (UnitTrain("B1", 0, 5000, "A", "T", HIGH),)),))
    path = tmp_path / "inf.json"
    write_instance(inst, path)
    code, out, _ = run(capsys, "solve", path, "--time-limit", 5)
    assert code == 3
    assert "B1:0" in out


def test_malformed_instance_exit_code(tmp_path, capsys):
    path = tmp_path / "bad.json"
    path.write_text('{"bigTrains": [], "extra": 1}')
    code, _, err = run(capsys, "solve", path)
    assert code == 1
    assert "extra" in err


def test_bad_lns_flag_is_a_usage_error(tiny_file, capsys):
    _, path = tiny_file
    with pytest.raises(SystemExit) as e:
        main(["solve", str(path), "--lns", "25"])
    assert e.value.code == 2


def test_same_flags_same_bytes(tmp_path, capsys, reference_port):
    from sutp.generator import GeneratorConfig, generate_instance
    inst = generate_instance(reference_port, GeneratorConfig(15, 99))
    path = tmp_path / "inst.json"
    write_instance(inst, path, "reference")
    outs = []
    for k in range(2):
        sol = tmp_path / f"sol{k}.json"
        code, _, _ = run(capsys, "solve", path, "--lns", "25,10", "--seed", 5,
                         "--max-iterations", 20, "--time-limit", 120, "--out", sol)
        assert code == 0
        outs.append(sol.read_bytes())
    assert outs[0] == outs[1]


def test_seed_environment_override(tmp_path, capsys, monkeypatch, reference_port):
    from sutp.generator import GeneratorConfig, generate_instance
    inst = generate_instance(reference_port, GeneratorConfig(10, 3))
    path = tmp_path / "inst.json"
    write_instance(inst, path, "reference")
    monkeypatch.setenv("SUTP_SEED", "4")
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    run(capsys, "solve", path, "--seed", 1, "--max-iterations", 10, "--out", a)
    run(capsys, "solve", path, "--seed", 2, "--max-iterations", 10, "--out", b)
    assert a.read_bytes() == b.read_bytes()


def test_bench_directory(tmp_path, capsys):
    d = tmp_path / "grid"
    run(capsys, "generate", "--out-dir", d, "--sizes", "5", "--seeds", "2")
    out_csv = tmp_path / "bench.csv"
    code, _, _ = run(capsys, "bench", d, "--time-limit", 5, "--max-iterations", 5, "--out", out_csv)
    assert code == 0
    rows = list(csv.DictReader(out_csv.open()))
    assert [r["instance"] for r in rows] == ["sutp_05_00.json", "sutp_05_01.json"]
    assert all(r["valid"] == "1" for r in rows)


def test_reference_instance_reads_back(tmp_path, capsys):
    run(capsys, "generate", "--out-dir", tmp_path, "--big-trains", "7", "--count", "1")
    inst = read_instance(tmp_path / "sutp_07_00.json")
    assert len(inst.big_trains) == 7
