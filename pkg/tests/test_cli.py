import csv
import json
import subprocess
import sys

import pytest

import golden
from expertmix.cli import main
from expertmix.scenarios import Stream
from expertmix.streamio import write_stream
from oracle import HAND_TRACE


@pytest.fixture
def hand_file(tmp_path):
    path = tmp_path / "hand.txt"
    write_stream(path, Stream([p for p, _ in HAND_TRACE], [o for _, o in HAND_TRACE]))
    return path


def run_cli(*args):
    return main([str(a) for a in args])


class TestRun:
    def test_hand_trace(self, tmp_path, hand_file):
        log, rep = tmp_path / "log.jsonl", tmp_path / "rep.json"
        assert run_cli("run", "--input", hand_file, "--algo", "paper", "--out", log, "--report", rep) == 0
        report = json.loads(rep.read_text())
        assert report["regret"] == pytest.approx(golden.REGRET, abs=1e-9)
        assert report["all_ok"] is True
        assert len(log.read_text().splitlines()) == 3

    def test_report_to_stdout(self, hand_file, capsys):
        assert run_cli("run", "--input", hand_file) == 0
        assert json.loads(capsys.readouterr().out)["algo"] == "paper"

    def test_uniform_marks_not_applicable(self, tmp_path, hand_file):
        rep = tmp_path / "rep.json"
        assert run_cli("run", "--input", hand_file, "--algo", "uniform", "--report", rep) == 0
        report = json.loads(rep.read_text())
        assert report["bound_dagger"] is None and report["regret_dagger_ok"] is None
        assert report["mixloss_cum_bound_ok"] is None and report["dagger_dominated_ok"] is None

    @pytest.mark.parametrize("algo", ["ftl", "fixed-ew:2.5"])
    def test_other_baselines(self, tmp_path, hand_file, algo):
        assert run_cli("run", "--input", hand_file, "--algo", algo, "--report", tmp_path / "r.json") == 0

    def test_scenario_source(self, tmp_path):
        rep = tmp_path / "r.json"
        code = run_cli("run", "--scenario", "family=scale_burst,N=4,T=100,D=2,seed=7", "--report", rep)
        assert code == 0 and json.loads(rep.read_text())["rounds"] == 100

    def test_deterministic_logs(self, tmp_path):
        sc = "family=drifting_leader,N=5,T=200,D=3,seed=11,k=10"
        a, b = tmp_path / "a.jsonl", tmp_path / "b.jsonl"
        assert run_cli("run", "--scenario", sc, "--out", a, "--report", tmp_path / "x") == 0
        assert run_cli("run", "--scenario", sc, "--out", b, "--report", tmp_path / "y") == 0
        assert a.read_bytes() == b.read_bytes()

    @pytest.mark.parametrize(
        "args",
        [
            [],
            ["run"],
            ["run", "--algo", "paper"],
            ["run", "--input", "x", "--scenario", "family=noisy_regression,N=1,T=1,D=1"],
            ["run", "--scenario", "family=noisy_regression,N=1,T=1,D=1", "--algo", "hedge"],
            ["run", "--scenario", "family=noisy_regression,N=1,T=1,D=1", "--algo", "fixed-ew:abc"],
            ["run", "--scenario", "family=noisy_regression,N=1,T=1,D=1", "--algo", "fixed-ew:-1"],
            ["run", "--scenario", "family=noisy_regression,N=1,T=0,D=1"],
            ["run", "--scenario", "N=1"],
            ["run", "--input", "/nonexistent/stream.txt"],
            ["bogus"],
        ],
    )
    def test_usage_errors_exit_1(self, args, capsys):
        assert run_cli(*args) == 1
        assert capsys.readouterr().err

    def test_parse_error_exit_1(self, tmp_path):
        bad = tmp_path / "bad.txt"
        bad.write_text("stream 1 2 1 1\np 0\np 1\np 2\no 1\n")
        assert run_cli("run", "--input", bad) == 1


class TestCompare:
    def test_n1_regret_zero(self, tmp_path):
        out = tmp_path / "c.csv"
        assert run_cli("compare", "--scenario", "family=scale_burst,N=1,T=30,D=2,seed=1", "--algos", "paper,uniform", "--out", out) == 0
        rows = list(csv.DictReader(out.open()))
        assert len(rows) == 60
        assert all(float(r["regret"]) == 0.0 for r in rows)
        assert list(rows[0]) == ["t", "algo", "cumulative_player_loss", "cumulative_best_expert_loss", "regret"]

    def test_fixed_bound_from_paper_run(self, tmp_path):
        sc = "family=scale_burst,N=4,T=50,D=2,seed=7,p=0.1"
        rep = tmp_path / "r.json"
        run_cli("run", "--scenario", sc, "--report", rep)
        B = json.loads(rep.read_text())["final_scale_dagger"]
        out = tmp_path / "c.csv"
        assert run_cli("compare", "--scenario", sc, "--algos", f"paper,fixed-ew:{B!r}", "--out", out) == 0
        rows = list(csv.DictReader(out.open()))
        assert len(rows) == 2 * 50
        assert {r["algo"] for r in rows} == {"paper", f"fixed-ew:{B!r}"}

    def test_deterministic(self, tmp_path):
        sc = "family=scale_burst,N=6,T=120,D=3,seed=7"
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        assert run_cli("compare", "--scenario", sc, "--algos", "paper,ftl", "--out", a) == 0
        assert run_cli("compare", "--scenario", sc, "--algos", "paper,ftl", "--out", b) == 0
        assert a.read_bytes() == b.read_bytes()

    def test_final_row_matches_report(self, tmp_path):
        sc = "family=noisy_regression,N=3,T=40,D=1,seed=3"
        out, rep = tmp_path / "c.csv", tmp_path / "r.json"
        run_cli("compare", "--scenario", sc, "--algos", "paper,uniform", "--out", out)
        run_cli("run", "--scenario", sc, "--report", rep)
        last_paper = [r for r in csv.DictReader(out.open()) if r["algo"] == "paper"][-1]
        assert float(last_paper["regret"]) == json.loads(rep.read_text())["regret"]

    def test_needs_two_algos(self, tmp_path):
        assert run_cli("compare", "--scenario", "family=scale_burst,N=2,T=3,D=1", "--algos", "paper", "--out", tmp_path / "c") == 1


class TestVerify:
    def _log(self, tmp_path, hand_file):
        log = tmp_path / "log.jsonl"
        assert run_cli("run", "--input", hand_file, "--out", log, "--report", tmp_path / "r.json") == 0
        return log

    def test_passing_log(self, tmp_path, hand_file):
        assert run_cli("verify", "--log", self._log(tmp_path, hand_file)) == 0

    def test_corrupted_h(self, tmp_path, hand_file, capsys):
        log = self._log(tmp_path, hand_file)
        lines = log.read_text().splitlines()
        rec = json.loads(lines[1])
        rec["h"] += 1e6
        lines[1] = json.dumps(rec)
        log.write_text("\n".join(lines) + "\n")
        assert run_cli("verify", "--log", log) == 2
        report = json.loads(capsys.readouterr().out)
        assert report["failed_rounds"] == [2]

    def test_tampered_report(self, tmp_path, hand_file):
        log = self._log(tmp_path, hand_file)
        lines = log.read_text().splitlines()
        rep = json.loads(lines[-1])
        rep["regret"] = 0.0
        lines[-1] = json.dumps(rep)
        log.write_text("\n".join(lines) + "\n")
        assert run_cli("verify", "--log", log) == 2

    def test_truncated(self, tmp_path, hand_file):
        log = self._log(tmp_path, hand_file)
        data = log.read_bytes()
        log.write_bytes(data[: len(data) // 2])
        assert run_cli("verify", "--log", log) == 1

    def test_baseline_log(self, tmp_path, hand_file):
        log = tmp_path / "u.jsonl"
        run_cli("run", "--input", hand_file, "--algo", "uniform", "--out", log, "--report", tmp_path / "r")
        assert run_cli("verify", "--log", log) == 0


def test_generate_then_run(tmp_path):
    path = tmp_path / "s.txt"
    assert run_cli("generate", "--scenario", "family=density_grid,N=3,T=10,D=5,seed=2", "--out", path) == 0
    assert len(path.read_text().splitlines()) == 1 + 10 * 4
    assert run_cli("run", "--input", path, "--report", tmp_path / "r.json") == 0


def test_module_entry_point(tmp_path, hand_file):
    proc = subprocess.run(
        [sys.executable, "-m", "expertmix", "run", "--input", str(hand_file)], capture_output=True, text=True
    )
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["all_ok"] is True
    proc = subprocess.run([sys.executable, "-m", "expertmix", "run"], capture_output=True, text=True)
    assert proc.returncode == 1
