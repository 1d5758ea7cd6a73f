import csv
import io as _io
import json
import subprocess
import sys

import pytest

from mixcover import io
from mixcover.checks import check_solution, verify_infeasibility
from mixcover.cli import main
from mixcover.report import InfeasibilityCertificate


def _write(path, doc):
    path.write_text(json.dumps(doc))
    return str(path)


ONE = {"type": "mpc", "n": 1, "packing": [{"rhs": 1, "entries": [[0, 1]]}],
       "covering": [{"rhs": 1, "entries": [[0, 1]]}]}


def test_solve_one_by_one_with_check(tmp_path):
    inp = _write(tmp_path / "one.json", ONE)
    out = tmp_path / "sol.json"
    assert main(["solve-mpc", "--input", inp, "--eps", "0.1", "--algo", "sequential", "--check",
                 "--out", str(out)]) == 0
    sol = json.loads(out.read_text())
    assert sol["status"] == "solved"
    assert check_solution(io.load_instance(inp), sol["x"], ratio_bound=0.5).passed
    assert main(["verify", "--input", inp, "--solution", str(out)]) == 0


def test_infeasible_exits_two_with_verifying_certificate(tmp_path):
    inp = str(tmp_path / "bad.json")
    assert main(["gen", "--kind", "mpc-planted-infeasible", "--n", "20", "--m", "10", "--seed", "3",
                 "--out", inp]) == 0
    out = tmp_path / "sol.json"
    assert main(["solve-mpc", "--input", inp, "--check", "--out", str(out)]) == 2
    cert = InfeasibilityCertificate.from_json(json.loads(out.read_text())["certificate"])
    from mixcover.instances import normalize
    assert verify_infeasibility(normalize(io.load_instance(inp)), cert)


def test_gen_same_seed_same_bytes(tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    for p in (a, b):
        assert main(["gen", "--kind", "mpc-planted-feasible", "--seed", "7", "--out", str(p)]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_gen_planted_sidecar_passes_at_ratio_one(tmp_path):
    p = tmp_path / "p.json"
    assert main(["gen", "--kind", "mpc-planted-feasible", "--n", "50", "--m", "50", "--out", str(p)]) == 0
    xs = json.loads((tmp_path / "p.json.xstar.json").read_text())["x"]
    assert check_solution(io.load_instance(p), xs, ratio_bound=0.0).passed


def test_gen_fl_every_client_has_a_pair(tmp_path):
    p = tmp_path / "fl.json"
    assert main(["gen", "--kind", "fl-random", "--n", "4", "--m", "6", "--pairs", "20", "--out", str(p)]) == 0
    inst = io.load_instance(p)
    assert inst.nnz == 20 and sorted(set(inst.client.tolist())) == list(range(6))


def test_fl_parallel_files_identical_across_threads(tmp_path):
    p = tmp_path / "fl.json"
    main(["gen", "--kind", "fl-random", "--n", "12", "--m", "80", "--seed", "5", "--out", str(p)])
    outs = []
    for t in ("1", "8"):
        o = tmp_path / f"s{t}.json"
        assert main(["solve-fl", "--input", str(p), "--algo", "parallel", "--threads", t, "--check",
                     "--out", str(o)]) == 0
        outs.append(o.read_bytes())
    assert outs[0] == outs[1]


@pytest.mark.parametrize("algo", ["sequential", "reference"])
def test_solve_fl_and_cover(tmp_path, algo):
    fl = tmp_path / "fl.json"
    main(["gen", "--kind", "fl-random", "--n", "3", "--m", "5", "--out", str(fl)])
    assert main(["solve-fl", "--input", str(fl), "--algo", algo, "--check", "--out", str(tmp_path / "s.json")]) == 0
    cv = tmp_path / "cv.json"
    main(["gen", "--kind", "cover-random", "--n", "30", "--m", "15", "--out", str(cv)])
    rep = tmp_path / "r.json"
    assert main(["solve-cover", "--input", str(cv), "--algo", algo, "--check", "--report", str(rep),
                 "--out", str(tmp_path / "c.json")]) == 0
    r = json.loads(rep.read_text())
    assert r["check"]["passed"] and r["ratio"] <= 1.5


def test_usage_and_data_errors(tmp_path, capsys):
    assert main([]) == 64
    assert main(["solve-mpc", "--input", "x.json", "--eps", "0.5"]) == 64
    cv = tmp_path / "cv.json"
    main(["gen", "--kind", "cover-random", "--out", str(cv)])
    assert main(["solve-cover", "--input", str(cv), "--algo", "parallel"]) == 64
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert main(["solve-mpc", "--input", str(bad)]) == 65
    assert main(["solve-mpc", "--input", str(tmp_path / "missing.json")]) == 65
    wrong = _write(tmp_path / "w.json", {"type": "mpc", "n": 1, "packing": [], "covering": [{"rhs": 1, "entries": [[3, 1]]}]})
    assert main(["solve-mpc", "--input", wrong]) == 65
    capsys.readouterr()


def test_verify_rejects_bad_solution(tmp_path):
    inp = _write(tmp_path / "one.json", ONE)
    sol = _write(tmp_path / "sol.json", {"status": "solved", "x": [0.5]})
    assert main(["verify", "--input", inp, "--solution", sol]) == 1


def test_bench_single_row_csv(tmp_path):
    out = tmp_path / "b.csv"
    assert main(["bench", "--sizes", "4096", "--out", str(out)]) == 0
    rows = list(csv.DictReader(_io.StringIO(out.read_text())))
    assert len(rows) == 1 and rows[0]["algo"] == "sequential"


def test_module_entry_point(tmp_path):
    inp = _write(tmp_path / "one.json", ONE)
    res = subprocess.run([sys.executable, "-m", "mixcover", "solve-mpc", "--input", inp], capture_output=True, text=True)
    assert res.returncode == 0
    assert json.loads(res.stdout)["status"] == "solved"
