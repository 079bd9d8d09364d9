import csv
import json
import subprocess
import sys

import pytest
from conftest import FIXTURES, tiny1_expected

from cembenders.benders.report import read_trace
from cembenders.cli import EXIT_INPUT, EXIT_MAX_ITER, EXIT_OK, main
from cembenders.instance import THERMAL
from cembenders.lpcore import read_mps, relative_gap

TINY = ["--generate", "tiny", "--seed", "7"]


def objective(out):
    with open(out / "solution.csv") as fh:
        rows = list(csv.reader(fh))
    assert rows[1][0] == "objective"
    return float(rows[1][1])


def test_interior_run_and_monolithic_cross_check(tmp_path, capsys):
    a, b = tmp_path / "int", tmp_path / "mono"
    assert main(["solve", *TINY, "--algo", "benders-int", "--alpha", "0.5",
                 "--out", str(a)]) == EXIT_OK
    assert float(read_trace(a / "trace.csv")[-1]["gap"]) <= 1e-3
    assert main(["solve", *TINY, "--algo", "monolithic", "--out", str(b)]) == EXIT_OK
    assert relative_gap(objective(a), objective(b)) <= 1e-3
    manifest = json.loads((a / "manifest.json").read_text())
    assert manifest["algo"] == "benders-int"
    assert manifest["source"]["seed"] == 7
    assert manifest["config"]["alpha"] == 0.5
    assert "converged" in capsys.readouterr().out


def test_alpha_out_of_range_is_an_input_error(tmp_path, capsys):
    code = main(["solve", *TINY, "--algo", "benders-l2", "--alpha", "1.5",
                 "--out", str(tmp_path)])
    assert code == EXIT_INPUT
    assert "(0, 1)" in capsys.readouterr().err


def test_iteration_cap_still_writes_artifacts(tmp_path):
    assert main(["solve", *TINY, "--algo", "benders", "--max-iter", "2",
                 "--out", str(tmp_path)]) == EXIT_MAX_ITER
    assert len(read_trace(tmp_path / "trace.csv")) == 2
    assert (tmp_path / "solution.csv").exists() and (tmp_path / "manifest.json").exists()


@pytest.mark.parametrize("argv", [
    ["solve", "--algo", "benders"],
    ["solve", *TINY, "--algo", "simplex"],
    ["solve", "--instance", "/nonexistent/dir"],
    ["solve", "--generate", "no-such-preset"],
])
def test_bad_input_exits_one(argv, tmp_path):
    # argparse rejects some flags by raising SystemExit; the rest come back as a code.
    try:
        code = main([*argv, "--out", str(tmp_path)])
    except SystemExit as ex:
        code = ex.code
    assert code == EXIT_INPUT


def test_instance_directory_input(tmp_path):
    assert main(["solve", "--instance", str(FIXTURES / "tiny1"), "--algo", "monolithic",
                 "--out", str(tmp_path)]) == EXIT_OK
    assert objective(tmp_path) == pytest.approx(tiny1_expected()["monolithic_objective"],
                                                rel=1e-9)


def test_compare_all_kinds(tmp_path):
    assert main(["compare", *TINY, "--out", str(tmp_path)]) == EXIT_OK
    with open(tmp_path / "compare.csv") as fh:
        rows = list(csv.DictReader(fh))
    assert [r["algo"] for r in rows] == ["benders", "benders-l2", "benders-int", "benders-tr"]
    for r in rows:
        assert float(r["final_gap"]) <= 1e-3
        assert r["iters_to_1pct"] != ""
        k = int(r["iters_to_1pct"])
        trace = read_trace(tmp_path / r["algo"] / "trace.csv")
        assert float(trace[k]["gap"]) <= 0.01
        assert all(float(t["gap"]) > 0.01 for t in trace[:k])


def test_compare_with_empty_list(tmp_path):
    assert main(["compare", *TINY, "--algos", " , ", "--out", str(tmp_path)]) == EXIT_INPUT


def test_manifest_rerun_reproduces_trace(tmp_path):
    first = tmp_path / "first"
    assert main(["solve", *TINY, "--algo", "benders-tr", "--out", str(first)]) == EXIT_OK
    argv = json.loads((first / "manifest.json").read_text())["argv"]
    i = argv.index("--out")
    argv[i + 1] = str(tmp_path / "again")
    assert main(argv) == EXIT_OK
    assert (first / "trace.csv").read_bytes() == (tmp_path / "again" / "trace.csv").read_bytes()
    again = tmp_path / "again" / "solution.csv"
    assert (first / "solution.csv").read_bytes() == again.read_bytes()


def test_export_problem_files(tmp_path):
    assert main(["solve", *TINY, "--algo", "benders", "--export-mps",
                 "--out", str(tmp_path)]) == EXIT_OK
    mono = read_mps(tmp_path / "monolithic.mps")
    assert mono.num_cols > 0
    subs = sorted(p.name for p in tmp_path.glob("sub_w*.mps"))
    assert subs == ["sub_w1.mps", "sub_w2.mps"]


def test_two_stage_from_spec_file(tmp_path):
    spec = tmp_path / "spec.json"
    spec.write_text(json.dumps({"discrete": [THERMAL]}))
    out = tmp_path / "out"
    code = main(["solve", "--generate", str(spec), "--seed", "3", "--algo", "two-stage",
                 "--out", str(out)])
    assert code == EXIT_OK
    stages = {r["stage"] for r in read_trace(out / "trace.csv")}
    assert "2" in stages


def test_module_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "cembenders", "solve", *TINY, "--algo",
                           "benders", "--out", str(tmp_path)], capture_output=True, text=True)
    assert proc.returncode == EXIT_OK, proc.stderr


@pytest.mark.slow
def test_compare_on_seed11(tmp_path):
    code = main(["compare", "--generate", "small", "--seed", "11", "--max-iter", "400",
                 "--out", str(tmp_path)])
    with open(tmp_path / "compare.csv") as fh:
        rows = list(csv.DictReader(fh))
    assert len(rows) == 4
    for r in rows:
        if float(r["final_gap"]) <= 1e-3:
            assert r["iters_to_1pct"] != ""
    assert code == EXIT_OK
