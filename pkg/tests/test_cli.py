import json

import pytest

from searchparty.cli import main


@pytest.fixture()
def paths(data_dir):
    return (str(data_dir / "apartment.scenario"),
            str(data_dir / "canonical.input"))


def test_run_found_exit_zero(paths, capsys):
    scenario, script = paths
    assert main(["run", scenario, "--input", script]) == 0
    out = capsys.readouterr().out
    assert "outcome:  found after 38 ticks" in out
    assert "leader:   ugv" in out
    assert "found:    under-sofa (by ugv)" in out


def test_run_writes_artifacts_with_out_flag(paths, tmp_path, capsys):
    scenario, script = paths
    out_dir = tmp_path / "artifacts"
    assert main(["run", scenario, "--input", script,
                 "--out", str(out_dir)]) == 0
    assert (out_dir / "transcript.log").exists()
    report = json.loads((out_dir / "report.json").read_text())
    assert report["outcome"] == "found"
    assert f"artifacts: {out_dir}" in capsys.readouterr().out


def test_run_seed_flag_changes_leader(paths, capsys):
    scenario, script = paths
    assert main(["run", scenario, "--input", script, "--seed", "1"]) == 0
    assert "leader:   drone" in capsys.readouterr().out


def test_seed_env_var_used_when_flag_absent(paths, capsys, monkeypatch):
    scenario, script = paths
    monkeypatch.setenv("SEARCHPARTY_SEED", "1")
    assert main(["run", scenario, "--input", script]) == 0
    assert "(seed 1)" in capsys.readouterr().out


def test_flag_beats_env_seed(paths, capsys, monkeypatch):
    scenario, script = paths
    monkeypatch.setenv("SEARCHPARTY_SEED", "1")
    assert main(["run", scenario, "--input", script, "--seed", "7"]) == 0
    assert "(seed 7)" in capsys.readouterr().out


def test_bad_env_seed_is_usage_error(paths, capsys, monkeypatch):
    scenario, script = paths
    monkeypatch.setenv("SEARCHPARTY_SEED", "lucky")
    assert main(["run", scenario, "--input", script]) == 2
    assert "SEARCHPARTY_SEED" in capsys.readouterr().err


def test_out_env_var_used_when_flag_absent(paths, tmp_path, monkeypatch):
    scenario, script = paths
    out_dir = tmp_path / "env-out"
    monkeypatch.setenv("SEARCHPARTY_OUT", str(out_dir))
    assert main(["run", scenario, "--input", script]) == 0
    assert (out_dir / "report.json").exists()


def test_exhausted_run_exit_code(data_dir, capsys):
    code = main(["run", str(data_dir / "apartment-nokeys.scenario"),
                 "--input", str(data_dir / "canonical.input")])
    assert code == 10
    assert "outcome:  exhausted" in capsys.readouterr().out


def test_missing_scenario_is_usage_error(capsys):
    assert main(["run", "/nonexistent.scenario",
                 "--input", "/nonexistent.input"]) == 2
    assert "error:" in capsys.readouterr().err


def test_bad_input_script_is_usage_error(paths, tmp_path, capsys):
    scenario, _ = paths
    bad = tmp_path / "bad.input"
    bad.write_text("@tick 0 | team | too early\n")
    assert main(["run", scenario, "--input", str(bad)]) == 2
    assert "start at 1" in capsys.readouterr().err


def test_replay_identical(paths, tmp_path, capsys):
    scenario, script = paths
    out_dir = tmp_path / "rec"
    main(["run", scenario, "--input", script, "--out", str(out_dir)])
    capsys.readouterr()
    assert main(["replay", scenario,
                 str(out_dir / "transcript.log")]) == 0
    assert "replay: identical (120 lines" in capsys.readouterr().out


def test_replay_detects_divergence(paths, tmp_path, capsys):
    scenario, script = paths
    out_dir = tmp_path / "rec"
    main(["run", scenario, "--input", script, "--out", str(out_dir)])
    capsys.readouterr()
    transcript = out_dir / "transcript.log"
    lines = transcript.read_text().splitlines()
    # swap a robot chat line's sender; the line still decodes but replay
    # regenerates the original sender
    idx, line = next(
        (i, l) for i, l in enumerate(lines)
        if "|chat|ugv|" in l)
    lines[idx] = line.replace("|chat|ugv|", "|chat|drone|", 1)
    transcript.write_text("\n".join(lines) + "\n")
    assert main(["replay", scenario, str(transcript)]) == 1
    assert f"diverged at line {idx}" in capsys.readouterr().out


def test_replay_missing_transcript(paths, capsys):
    scenario, _ = paths
    assert main(["replay", scenario, "/nonexistent.log"]) == 2
    assert "no such transcript" in capsys.readouterr().err


def test_validate_ok(paths, capsys):
    scenario, script = paths
    assert main(["validate", scenario, "--input", script]) == 0
    out = capsys.readouterr().out
    assert "scenario apartment: 4 zones, 2 robots, 2 objects" in out
    assert "lexicon: 16 entries" in out
    assert "input script: " in out
    assert out.rstrip().endswith("ok")


def test_validate_rejects_broken_scenario(tmp_path, capsys):
    bad = tmp_path / "broken.scenario"
    bad.write_text("[meta]\nname = broken\n")
    assert main(["validate", str(bad)]) == 2
    assert "missing" in capsys.readouterr().err


def test_usage_error_on_unknown_command():
    with pytest.raises(SystemExit) as info:
        main(["frobnicate"])
    assert info.value.code == 2
