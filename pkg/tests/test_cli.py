import csv
import io
import json

import pytest

from entsearch import __version__
from entsearch.cli import main
from entsearch.qsim import bell_state, to_json
from conftest import SAMPLE_FORMULA, SAMPLE_SOLUTIONS


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


@pytest.fixture
def bell_file(tmp_path):
    path = tmp_path / "bell.json"
    path.write_text(json.dumps(to_json(bell_state())))
    return str(path)


def test_solve_all(capsys):
    code, out, _ = run(capsys, "solve", "--expr", SAMPLE_FORMULA, "--route", "analytic", "--all")
    doc = json.loads(out)
    assert code == 0
    assert set(doc["result"]["solutions"]) == SAMPLE_SOLUTIONS
    assert doc["tool"] == "entsearch" and doc["version"] == __version__
    assert doc["seed"] == 0 and doc["config"]["expr"] == SAMPLE_FORMULA
    assert "wall_clock_s" in doc


def test_solve_unsat_cnf(capsys, unsat2_cnf):
    code, out, _ = run(capsys, "solve", "--cnf", str(unsat2_cnf), "--route", "ppt", "--mode", "dxd")
    assert code == 0 and json.loads(out)["result"]["status"] == "none-exist"


def test_solve_tautology(capsys):
    code, out, _ = run(capsys, "solve", "--expr", "x1 | !x1", "--route", "analytic")
    assert code == 0 and json.loads(out)["result"]["status"] == "all-solutions"


def test_solve_writes_files(capsys, tmp_path):
    out_path, csv_path = tmp_path / "o.json", tmp_path / "t.csv"
    code, out, _ = run(capsys, "solve", "--expr", SAMPLE_FORMULA, "--out", str(out_path), "--csv", str(csv_path))
    assert code == 0 and out == ""
    assert json.loads(out_path.read_text())["result"]["status"] == "found"
    assert csv_path.read_text().startswith("depth,lo,hi,verdict,copies,inferred\n")
    assert not [p for p in tmp_path.iterdir() if p.name.startswith(".tmp-")]


def test_exit_codes(capsys, tmp_path):
    assert run(capsys, "solve", "--expr", "(x1 & x2")[0] == 2
    assert run(capsys, "solve", "--expr", "x1 $ x2")[0] == 2
    bad = tmp_path / "bad.cnf"
    bad.write_text("p cnf 2 1\n1 -3 0\n")
    code, _, err = run(capsys, "solve", "--cnf", str(bad))
    assert code == 2 and "line 2" in err
    assert run(capsys, "solve", "--cnf", str(tmp_path / "missing.cnf"))[0] == 1
    seven = " & ".join(f"x{i}" for i in range(1, 8))
    assert run(capsys, "solve", "--expr", seven, "--route", "ppt", "--mode", "dxd")[0] == 3
    six = " & ".join(f"x{i}" for i in range(1, 7))
    code, out, _ = run(capsys, "solve", "--expr", six, "--budget", "2")
    assert code == 4 and json.loads(out)["result"]["status"] == "budget-exhausted"


def test_unsupported_route_for_dims(capsys, tmp_path):
    from entsearch.qsim import DensityOp, to_json as dump
    import numpy as np
    path = tmp_path / "r.json"
    path.write_text(json.dumps(dump(DensityOp(np.eye(6) / 6, (2, 3)))))
    assert run(capsys, "detect", "--state", str(path), "--route", "spa")[0] == 3
    code, out, _ = run(capsys, "detect", "--state", str(path), "--route", "ppt")
    assert code == 0 and json.loads(out)["result"]["verdict"]["verdict"] == "separable"


def test_detect_bell(capsys, bell_file):
    code, out, _ = run(capsys, "detect", "--state", bell_file, "--route", "ppt")
    v = json.loads(out)["result"]["verdict"]
    assert code == 0 and v["verdict"] == "entangled" and abs(v["statistic"] + 0.5) < 1e-12


def test_detect_bell_estimated(capsys, bell_file):
    code, out, _ = run(capsys, "detect", "--state", bell_file, "--route", "spa-est",
                       "--copies", str(1 << 14), "--seed", "7")
    doc = json.loads(out)
    assert code == 0 and doc["result"]["verdict"]["verdict"] == "entangled" and doc["seed"] == 7


def test_detect_formula_range(capsys):
    code, out, _ = run(capsys, "detect", "--expr", SAMPLE_FORMULA, "--range", "0", "0", "--route", "analytic")
    assert code == 0 and json.loads(out)["result"]["verdict"]["verdict"] == "separable"
    code, out, _ = run(capsys, "detect", "--expr", SAMPLE_FORMULA, "--route", "purity")
    assert json.loads(out)["result"]["verdict"]["verdict"] == "entangled"


def test_copies(capsys):
    code, out, _ = run(capsys, "copies", "--L", "1024", "--c", "0.5")
    assert code == 0 and json.loads(out)["result"]["copies_required"]["N"] == 710
    code, out, _ = run(capsys, "copies", "--check-ratio")
    rows = json.loads(out)["result"]["ratio_table"]
    assert all(abs(r["rel_error"]) < 0.02 for r in rows)


def test_copies_default_grid(capsys, tmp_path):
    path = tmp_path / "grid.csv"
    code, _, _ = run(capsys, "copies", "--csv", str(path))
    rows = list(csv.DictReader(io.StringIO(path.read_text())))
    assert code == 0 and len(rows) == 4096


def test_grid_stdout(capsys):
    code, out, _ = run(capsys, "grid", "--points", "4")
    assert code == 0 and out.splitlines()[0] == "L,N,delta,log10_deltaN,deltaN,bound"
    assert len(out.splitlines()) == 17


def test_bench(capsys):
    code, out, _ = run(capsys, "bench", "--n-min", "2", "--n-max", "5")
    rows = json.loads(out)["result"]["rows"]
    assert code == 0
    for r in rows:
        if r["infer_complement"]:
            assert r["detector_calls"] == r["n"] + 1
        else:
            assert r["detector_calls"] <= 2 * r["n"] + 1


@pytest.mark.parametrize("argv", [
    ["solve", "--expr", SAMPLE_FORMULA, "--all"],
    ["solve", "--expr", SAMPLE_FORMULA, "--route", "spa-est", "--mode", "dxd", "--copies", "512", "--seed", "5"],
    ["detect", "--expr", SAMPLE_FORMULA, "--route", "ppt"],
    ["copies", "--L", "4096", "--check-ratio"],
    ["grid", "--points", "5"],
    ["bench", "--n-max", "4", "--route", "ppt"],
])
def test_canonical_byte_identical(capsys, tmp_path, argv):
    outputs = []
    path = tmp_path / "out"
    for _ in range(2):
        flag = ["--csv" if argv[0] == "grid" else "--out", str(path)]
        run(capsys, *argv, *flag, "--canonical")
        outputs.append(path.read_bytes())
    assert outputs[0] == outputs[1]
    if argv[0] != "grid":
        assert b"wall_clock_s" not in outputs[0]
