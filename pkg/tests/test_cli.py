import json
import subprocess
import sys

import numpy as np
import pytest

from stochpack import cli, verify
from stochpack.costs import CostModel, partition_cost
from stochpack.model import Partition, dump_instance, load_instance
from stochpack.solver import KSolution
from stochpack.verify import random_instance


@pytest.fixture
def inst_file(tmp_path):
    def make(k, n=6, seed=0):
        path = tmp_path / f"inst_{k}_{n}.json"
        dump_instance(random_instance(np.random.default_rng(seed), n, k), path)
        return path
    return make


def run(capsys, *argv):
    code = cli.main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


@pytest.mark.parametrize("model", ["SPMED", "SPMWOP", "SPMOP"])
def test_solve_two_bins(inst_file, capsys, model):
    path = inst_file(2)
    code, out, _ = run(capsys, "solve", path, "--model", model)
    assert code == 0
    sol = json.loads(out)
    assert set(sol) == {"cut_points", "assignment", "cost", "model", "certificate"}
    assert len(sol["cut_points"]) == 1 and sol["model"] == model
    inst = load_instance(path)
    recomputed = partition_cost(inst, Partition(tuple(sol["assignment"])), CostModel(model))
    assert abs(recomputed - sol["cost"]) <= 1e-12
    if sol["certificate"] is not None:
        assert sol["certificate"]["gap"] <= sol["certificate"]["conservative_bound"]


def test_solve_four_bins(inst_file, capsys, tmp_path):
    out_path = tmp_path / "sol.json"
    code, out, _ = run(capsys, "solve", inst_file(4, n=9), "--out", out_path)
    assert code == 0 and out == ""
    sol = json.loads(out_path.read_text())
    assert len(sol["cut_points"]) == 3 and sol["certificate"] is None


def test_solve_errors(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text('{"capacities": [10, 10], "services": [{"mu": 30, "var": 1}]}')
    assert run(capsys, "solve", bad)[0] == 3
    bad.write_text("{not json")
    assert run(capsys, "solve", bad)[0] == 2
    bad.write_text('{"capacities": [10], "services": [{"mu": 1, "var": 1, "x": 2}]}')
    assert run(capsys, "solve", bad)[0] == 2
    assert run(capsys, "solve", tmp_path / "missing.json")[0] == 2
    with pytest.raises(SystemExit) as e:
        cli.main(["solve", str(bad), "--model", "nope"])
    assert e.value.code == 2


def test_verify_default_passes(capsys):
    code, out, _ = run(capsys, "verify", "--trials", "5")
    assert code == 0
    lines = out.splitlines()
    assert len(lines) == len(verify.SUITES)
    assert all(line.startswith("PASS ") for line in lines)


def test_verify_zero_trials(capsys):
    assert run(capsys, "verify", "--trials", "0") == (0, "", "")


def test_verify_detects_injected_bug(capsys, monkeypatch):
    real = verify.solve_k_bins_dp

    def broken(instance, model):
        sol = real(instance, model)
        return KSolution(sol.cut_points, sol.partition, sol.cost * 1.01 + 1e-6)

    monkeypatch.setattr(verify, "solve_k_bins_dp", broken)
    code, out, _ = run(capsys, "verify", "--trials", "3")
    assert code == 1
    assert any(line.startswith("FAIL dp") for line in out.splitlines())


def test_simulate(tmp_path, capsys):
    args = ["simulate", "--n", "12", "--reps", "2", "--timeslots", "40", "--grid", "1.1,1.2"]
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert run(capsys, *args, "--out", a)[0] == 0
    assert run(capsys, *args, "--out", b, "--jobs", "2")[0] == 0
    assert a.read_bytes() == b.read_bytes()
    lines = a.read_text().splitlines()
    assert len(lines) == 1 + 3 * 2 * 2


def test_simulate_single_rep_and_models(capsys):
    code, out, _ = run(capsys, "simulate", "--n", "8", "--k", "3", "--reps", "1",
                       "--timeslots", "20", "--grid", "1.1", "--models", "SPMOP")
    assert code == 0
    rows = out.splitlines()[1:]
    assert len(rows) == 2 and all(r.endswith(",1") and ",SPMOP," in r for r in rows)


@pytest.mark.parametrize("grid", ["0.9", "abc", ""])
def test_simulate_bad_grid(grid):
    with pytest.raises(SystemExit) as e:
        cli.main(["simulate", "--grid", grid])
    assert e.value.code == 2


def test_simulate_bad_sizes(capsys):
    assert run(capsys, "simulate", "--n", "3")[0] == 2


def test_grid(capsys):
    code, out, _ = run(capsys, "grid", "--c1", 100, "--c2", 100, "--mu", 160, "--var", 6400,
                       "--resolution", 2)
    assert code == 0
    assert sum(line.endswith(",grid") for line in out.splitlines()) == 4
    assert out.splitlines()[0] == "a,b,cost,tag"


def test_grid_errors(capsys):
    base = ["grid", "--c1", 10, "--c2", 10, "--mu", 160, "--var", 6400]
    assert run(capsys, *base)[0] == 3
    ok = ["grid", "--c1", 100, "--c2", 100, "--mu", 160]
    assert run(capsys, *ok, "--var", 0)[0] == 2
    assert run(capsys, *ok, "--var", 6400, "--resolution", 1)[0] == 2


def test_module_entry_point():
    r = subprocess.run([sys.executable, "-m", "stochpack", "verify", "--trials", "0"],
                       capture_output=True, text=True)
    assert r.returncode == 0
