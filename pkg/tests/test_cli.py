"""End-to-end command-line behavior, exit codes, and determinism."""

import json

import pytest

from vtsynth.cli import main
from vtsynth.artifact import load_artifact
from vtsynth.vts import refines

from helpers import model_path


def run_cli(capsys, *argv):
    code = main([str(a) for a in argv])
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def test_synth_email_preset(tmp_path, capsys):
    out = tmp_path / "email.monitor.json"
    code, stdout, _ = run_cli(
        capsys, "synth", model_path("email.json"), "--preset", "config-monitor", "-o", out
    )
    assert code == 0
    assert "determinize" in stdout and "wrote" in stdout
    artifact = load_artifact(out)
    assert artifact.monitor.num_states == 9
    assert artifact.provenance["pipeline"][0] == "track"


def test_synth_coffee_diagnoser_four_states(tmp_path, capsys):
    out = tmp_path / "coffee.monitor.json"
    code, _, _ = run_cli(
        capsys, "synth", model_path("coffee.json"), "--preset", "diagnoser", "-o", out
    )
    assert code == 0
    assert load_artifact(out).monitor.num_states == 4


def test_predictive_diagnoser_refines_diagnoser(tmp_path, capsys):
    plain = tmp_path / "plain.json"
    predictive = tmp_path / "predictive.json"
    assert run_cli(
        capsys, "synth", model_path("coffee.json"), "--preset", "diagnoser", "-o", plain
    )[0] == 0
    assert run_cli(
        capsys, "synth", model_path("coffee.json"), "--preset", "predictive-diagnoser",
        "-o", predictive,
    )[0] == 0
    a = load_artifact(plain)
    b = load_artifact(predictive)
    assert refines(
        b.monitor.as_vts(b.domain), a.monitor.as_vts(a.domain), depth=6
    )


def test_run_trace_with_counts(tmp_path, capsys):
    out = tmp_path / "email.monitor.json"
    run_cli(capsys, "synth", model_path("email.json"), "--preset", "config-monitor", "-o", out)
    trace = tmp_path / "trace.txt"
    trace.write_text("sign\nenc\nsend\n")
    code, stdout, _ = run_cli(capsys, "run", out, trace, "--count")
    assert code == 0
    assert "{{e,s},{s}}" in stdout
    assert "66.7%" in stdout
    assert stdout.strip().endswith("final: {{e,s}}")


def test_run_structured_output(tmp_path, capsys):
    out = tmp_path / "email.monitor.json"
    run_cli(capsys, "synth", model_path("email.json"), "--preset", "config-monitor", "-o", out)
    trace = tmp_path / "trace.txt"
    trace.write_text("sign\n")
    code, stdout, _ = run_cli(capsys, "run", out, trace, "--format", "structured")
    assert code == 0
    lines = [json.loads(line) for line in stdout.splitlines()]
    assert lines[0]["step"] == 0 and lines[0]["action"] is None
    assert lines[1]["verdict"] == "{{e,s},{s}}"


def test_run_query_flag(tmp_path, capsys):
    out = tmp_path / "events.monitor.json"
    run_cli(
        capsys, "synth", model_path("coffee_events.json"), "--preset", "diagnoser", "-o", out
    )
    trace = tmp_path / "trace.txt"
    trace.write_text("request\nburn\n")
    code, stdout, _ = run_cli(
        capsys, "run", out, trace, "--query", "necessary: shorted"
    )
    assert code == 0
    final_step = stdout.splitlines()[-2]
    assert "necessary(shorted) = true" in final_step


def test_eval_sizes_email(capsys):
    code, stdout, _ = run_cli(
        capsys, "eval", model_path("email.json"), "--mode", "sizes"
    )
    assert code == 0
    assert "3/5" in stdout and "|Conf|" in stdout


def test_eval_specificity_structured(capsys):
    code, stdout, _ = run_cli(
        capsys, "eval", model_path("email.json"), "--mode", "specificity",
        "--runs", "60", "--steps", "30", "--seed", "3", "--format", "structured",
    )
    assert code == 0
    payload = json.loads(stdout)
    assert payload["mean_ruled_out_percent"] == pytest.approx(66.67, abs=0.1)


def test_eval_sweep_with_csv_and_plot(tmp_path, capsys):
    csv_path = tmp_path / "sweep.csv"
    png_path = tmp_path / "sweep.png"
    code, stdout, _ = run_cli(
        capsys, "eval", model_path("email.json"), "--mode", "sweep", "--k", "1,all",
        "--runs", "30", "--steps", "20", "--seed", "3",
        "--csv", csv_path, "--plot", png_path,
    )
    assert code == 0
    assert csv_path.exists() and png_path.exists()
    header, *rows = csv_path.read_text().strip().splitlines()
    assert header == "k,observable,mean_ruled_out_percent,stderr"
    assert len(rows) == 4  # three 1-subsets plus the full alphabet
    assert png_path.read_bytes()[:8] == b"\x89PNG\r\n\x1a\n"


def test_inspect_model_and_artifact(tmp_path, capsys):
    code, stdout, _ = run_cli(capsys, "inspect", model_path("coffee.json"))
    assert code == 0
    assert "model" in stdout and "observable" in stdout
    out = tmp_path / "coffee.monitor.json"
    run_cli(capsys, "synth", model_path("coffee.json"), "--preset", "diagnoser", "-o", out)
    dot = tmp_path / "graph.dot"
    code, stdout, _ = run_cli(capsys, "inspect", out, "--export-graph", dot)
    assert code == 0
    assert dot.read_text().startswith("digraph")


def test_exit_codes(tmp_path, capsys):
    missing_guard = tmp_path / "bad.json"
    missing_guard.write_text(json.dumps({
        "domain": "config",
        "features": ["x"],
        "validity": "x",
        "states": [{"name": "a", "initial": True}],
        "actions": ["go"],
        "transitions": [{"source": "a", "action": "go", "target": "a", "guard": "x & !x"}],
    }))
    code, _, err = run_cli(
        capsys, "synth", missing_guard, "--preset", "config-monitor", "-o", tmp_path / "x.json"
    )
    assert code == 3 and "empty guard" in err

    code, _, err = run_cli(
        capsys, "synth", model_path("email.json"), "--pipeline", "track,minimize",
        "-o", tmp_path / "y.json",
    )
    assert code == 4 and "determinize" in err

    out = tmp_path / "email.monitor.json"
    run_cli(capsys, "synth", model_path("email.json"), "--preset", "config-monitor", "-o", out)
    trace = tmp_path / "bad_trace.txt"
    trace.write_text("sign\nnot an action\n")
    code, _, err = run_cli(capsys, "run", out, trace)
    assert code == 5 and "line 2" in err


def test_seeded_commands_are_byte_identical(tmp_path, capsys):
    args = [
        "eval", model_path("email.json"), "--mode", "specificity",
        "--runs", "50", "--steps", "10", "--seed", "11",
    ]
    _, first, _ = run_cli(capsys, *args)
    _, second, _ = run_cli(capsys, *args)
    assert first == second

    out_a = tmp_path / "a.json"
    out_b = tmp_path / "b.json"
    run_cli(capsys, "synth", model_path("coffee.json"), "--preset", "diagnoser", "-o", out_a)
    run_cli(capsys, "synth", model_path("coffee.json"), "--preset", "diagnoser", "-o", out_b)
    assert out_a.read_bytes() == out_b.read_bytes()


def test_workers_do_not_change_csv(tmp_path, capsys):
    csv_one = tmp_path / "one.csv"
    csv_four = tmp_path / "four.csv"
    base = [
        "eval", model_path("email.json"), "--mode", "specificity",
        "--runs", "64", "--steps", "8", "--seed", "21",
    ]
    run_cli(capsys, *base, "--workers", "1", "--csv", csv_one)
    run_cli(capsys, *base, "--workers", "4", "--csv", csv_four)
    assert csv_one.read_bytes() == csv_four.read_bytes()


def test_obs_override(tmp_path, capsys):
    out = tmp_path / "partial.json"
    code, stdout, _ = run_cli(
        capsys, "synth", model_path("email.json"), "--preset", "config-monitor",
        "-o", out, "--obs", "sign,send",
    )
    assert code == 0
    artifact = load_artifact(out)
    assert set(artifact.monitor.actions) == {"sign", "send"}


def test_symbolic_backend_end_to_end(tmp_path, capsys):
    out = tmp_path / "symbolic.json"
    code, _, _ = run_cli(
        capsys, "synth", model_path("email.json"), "--preset", "config-monitor",
        "-o", out, "--backend", "symbolic",
    )
    assert code == 0
    artifact = load_artifact(out)
    assert artifact.domain.describe()["backend"] == "symbolic"
    trace = tmp_path / "trace.txt"
    trace.write_text("sign\nenc\n")
    code, stdout, _ = run_cli(capsys, "run", out, trace, "--count")
    assert code == 0
    assert stdout.strip().endswith("final: {{e,s}}")
