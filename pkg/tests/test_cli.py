import csv
import json
import subprocess
import sys

import pytest

from schemas import validate
from nlgames.cli import main
from nlgames.games import Graph, coloring_game, format_graph
from nlgames.io import load_strategy


@pytest.fixture(scope="module")
def chsh_run(tmp_path_factory):
    out = tmp_path_factory.mktemp("chsh")
    assert main(["solve", "chsh", "--trials", "1", "--seed", "7", "--out", str(out)]) == 0
    return out


@pytest.fixture
def g14_file(tmp_path, g14_strategy):
    from nlgames.io import save_strategy

    path = tmp_path / "g14.json"
    save_strategy(*g14_strategy, path)
    return path


def test_solve_writes_three_files(chsh_run):
    summary = json.loads((chsh_run / "summary.json").read_text())
    validate(summary, "summary")
    assert summary["inequality_value"] == pytest.approx(2.8284, abs=1e-3)
    with open(chsh_run / "trajectories.csv", newline="") as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["trial", "iteration", "energy"]
    energies = [float(r[2]) for r in rows[1:]]
    assert all(b <= a + 1e-9 for a, b in zip(energies, energies[1:]))
    strategy, game = load_strategy(chsh_run / "strategy.json")
    assert game.kind == "chsh"


def test_solve_is_deterministic(chsh_run, tmp_path):
    assert main(["solve", "chsh", "--trials", "1", "--seed", "7", "--out", str(tmp_path)]) == 0
    assert (tmp_path / "strategy.json").read_text() == (chsh_run / "strategy.json").read_text()


def test_solve_coloring_from_graph_file(tmp_path):
    graph = tmp_path / "k3.txt"
    graph.write_text(format_graph(Graph.from_edges(3, [(0, 1), (1, 2), (0, 2)])))
    out = tmp_path / "run"
    code = main(["solve", "coloring", "--graph", str(graph), "--colors", "3", "--layer", "u3",
                 "--refine", "--out", str(out)])
    assert code == 0
    summary = json.loads((out / "summary.json").read_text())
    assert summary["value"] == pytest.approx(1.0, abs=1e-9)


def test_solve_rejects_bad_input(tmp_path, capsys):
    assert main(["solve", "coloring", "--graph", str(tmp_path / "none.txt"), "--colors", "3",
                 "--out", str(tmp_path / "o")]) == 2
    assert main(["solve", "coloring", "--out", str(tmp_path / "o")]) == 2
    assert main(["solve", "chsh", "--eps-theta", "-1", "--out", str(tmp_path / "o")]) == 2
    assert not (tmp_path / "o").exists()
    assert "error:" in capsys.readouterr().err


def test_eval_exact_writes_json_and_csv(g14_file, tmp_path):
    assert main(["eval", str(g14_file), "--out", str(tmp_path / "rep")]) == 0
    report = json.loads((tmp_path / "rep.json").read_text())
    validate(report, "report")
    assert report["overall_value"] == pytest.approx(1.0, abs=1e-9)
    assert len(report["questions"]) == 88
    with open(tmp_path / "rep.csv", newline="") as fh:
        assert len(list(csv.reader(fh))) == 89


def test_eval_modes(g14_file, capsys):
    assert main(["eval", str(g14_file), "--mode", "shots", "--shots", "1024", "--seed", "1"]) == 0
    report = json.loads(capsys.readouterr().out)
    assert report["shots_per_question"] == 1024
    assert main(["eval", str(g14_file), "--mode", "noisy", "--p-err", "0.05", "--trajectories", "20",
                 "--format", "csv"]) == 0
    assert capsys.readouterr().out.startswith("question,category,win_rate,stderr")


def test_eval_missing_file_leaves_no_output(tmp_path):
    assert main(["eval", str(tmp_path / "absent.json"), "--out", str(tmp_path / "rep")]) == 2
    assert list(tmp_path.iterdir()) == []


def test_sweep_noise_csv(g14_file, tmp_path):
    out = tmp_path / "sweep.csv"
    assert main(["sweep-noise", str(g14_file), "--p-err", "0,0.05", "--trajectories", "50", "--out", str(out)]) == 0
    with open(out, newline="") as fh:
        rows = list(csv.DictReader(fh))
    assert list(rows[0])[:4] == ["p_err", "vertex_rate", "edge_rate", "mean_rate"]
    assert float(rows[0]["vertex_rate"]) == pytest.approx(1.0)
    assert float(rows[1]["vertex_rate"]) < float(rows[1]["edge_rate"])
    assert main(["sweep-noise", str(g14_file), "--p-err", "0,0.05", "--trajectories", "50",
                 "--format", "json", "--out", str(tmp_path / "s.json")]) == 0
    validate(json.loads((tmp_path / "s.json").read_text()), "sweep")
    assert main(["sweep-noise", str(g14_file), "--p-err", "2"]) == 2


def test_export_circuit(chsh_run, tmp_path, capsys):
    assert main(["export-circuit", str(chsh_run / "strategy.json"), "--question", "0-0"]) == 0
    text = capsys.readouterr().out
    assert text.startswith("OPENQASM 2.0;")
    assert text.count("ry(") == 2
    assert main(["export-circuit", str(chsh_run / "strategy.json"), "--question", "0-5",
                 "--out", str(tmp_path / "c.qasm")]) == 2
    assert not (tmp_path / "c.qasm").exists()


def test_classical(capsys, tmp_path):
    assert main(["classical", "chsh", "--format", "json"]) == 0
    result = json.loads(capsys.readouterr().out)
    validate(result, "classical")
    assert result["value"] == 0.75 and result["inequality"] == 2.0
    assert main(["classical", "coloring", "--graph", "g14", "--colors", "4", "--format", "json"]) == 0
    result = json.loads(capsys.readouterr().out)
    assert result["edge_threshold_fraction"] == "36/37"
    k3 = tmp_path / "k3.txt"
    k3.write_text("3 3\n0 1\n1 2\n0 2\n")
    assert main(["classical", "coloring", "--graph", str(k3), "--colors", "3", "--format", "json"]) == 0
    assert json.loads(capsys.readouterr().out)["edge_threshold"] == 1.0
    assert main(["classical", "nps", "-N", "3"]) == 0
    assert "inequality: 0.0" in capsys.readouterr().out


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "nlgames", "--version"], capture_output=True, text=True)
    assert proc.returncode == 0 and "0.1.0" in proc.stdout
