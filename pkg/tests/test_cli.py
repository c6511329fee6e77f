import json
import subprocess
import sys

import pytest

from quadarena.cli import main


def run_cli(args, capsys):
    code = main(args)
    out = capsys.readouterr()
    return code, out.out, out.err


def test_list_tasks(capsys):
    code, out, _ = run_cli(["list-tasks"], capsys)
    assert code == 0
    assert "narrow_gate" in out and "football_2v2" in out
    assert out.count("\n") == 12


def test_run_zero_policy_times_out(capsys):
    code, out, _ = run_cli(["run", "--task", "narrow_gate", "--policy", "zero",
                            "--envs", "2", "--seed", "0"], capsys)
    assert code == 0
    assert "success rate: 0.000" in out
    assert '"timeout": 2' in out


def test_run_scripted_success(capsys):
    code, out, _ = run_cli(["run", "--task", "narrow_gate",
                            "--policy", "scripted:narrow_gate_solver",
                            "--envs", "4", "--seed", "1"], capsys)
    assert code == 0
    assert "success rate: 1.000" in out


def test_run_bad_task_exits_nonzero(capsys):
    code, _, err = run_cli(["run", "--task", "bogus"], capsys)
    assert code == 2
    assert "narrow_gate" in err and "sumo" in err


def test_run_bad_override(capsys):
    code, _, err = run_cli(["run", "--task", "sumo",
                            "--override", "robot.masss=3"], capsys)
    assert code == 2
    assert "unknown config key" in err


def test_record_and_replay_cli(tmp_path, capsys):
    rec = tmp_path / "t.jsonl"
    code, _, _ = run_cli(["run", "--task", "sumo", "--policy", "random",
                          "--envs", "2", "--steps", "50",
                          "--record", str(rec)], capsys)
    assert code == 0 and rec.exists()
    code, out, _ = run_cli(["replay", str(rec)], capsys)
    assert code == 0
    assert "verdict: OK" in out
    # tampering flips the verdict and the exit code
    lines = rec.read_text().splitlines()
    doc = json.loads(lines[-1])
    doc["rew"][0] += 1.0
    lines[-1] = json.dumps(doc, separators=(",", ":"))
    rec.write_text("\n".join(lines) + "\n")
    code, out, _ = run_cli(["replay", str(rec)], capsys)
    assert code == 1
    assert "MISMATCH" in out


def test_replay_missing_file(capsys):
    code, _, err = run_cli(["replay", "/nonexistent/file.jsonl"], capsys)
    assert code == 2


def test_validate_config_round_trip(tmp_path, capsys):
    eff = tmp_path / "eff.cfg"
    code, out, _ = run_cli(["validate-config", "--override", "robot.mass=14",
                            "--dump-config", str(eff)], capsys)
    assert code == 0 and "config OK (1 override)" in out
    code, out, _ = run_cli(["validate-config", "--config", str(eff)], capsys)
    assert code == 0


def test_bench_single_env_count(capsys):
    code, out, _ = run_cli(["bench", "--tasks", "narrow_gate", "--envs", "1",
                            "--steps", "20", "--trials", "2"], capsys)
    assert code == 0
    assert "agent-steps/s" in out
    lines = [l for l in out.splitlines() if l.strip().startswith("1")]
    assert lines, out      # a valid row for env count 1


def test_bench_json_report(tmp_path, capsys):
    rep = tmp_path / "bench.json"
    code, out, _ = run_cli(["bench", "--tasks", "narrow_gate", "--envs", "2,4",
                            "--steps", "15", "--trials", "2",
                            "--json", str(rep)], capsys)
    assert code == 0
    doc = json.loads(rep.read_text())
    assert {r["n_envs"] for r in doc["rows"]} == {2, 4}
    for r in doc["rows"]:
        assert "agent_steps_per_sec_mean" in r
        assert "agent_steps_per_sec_std" in r


def test_console_entry_point():
    proc = subprocess.run([sys.executable, "-m", "quadarena.cli",
                           "list-tasks"], capture_output=True, text=True)
    assert proc.returncode == 0
    assert "narrow_gate" in proc.stdout
