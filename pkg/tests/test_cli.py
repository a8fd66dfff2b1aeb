import json

import pytest

from disasteller.cli import main


def _json_stdout(capsys):
    out = capsys.readouterr().out.strip()
    return json.loads(out)


@pytest.fixture(autouse=True)
def no_api_key(monkeypatch):
    monkeypatch.delenv("DISASTELLER_API_KEY", raising=False)


def _run_golden(demo_tree, out_dir, run_id="cli-golden"):
    return main([
        "run",
        "--scenario", str(demo_tree["manifest"]),
        "--config", str(demo_tree["config_path"]),
        "--out", str(out_dir),
        "--backend", "scripted",
        "--script", str(demo_tree["script"]),
        "--run-id", run_id,
    ])


def test_run_scripted_golden_path(demo_tree, tmp_path, capsys):
    code = _run_golden(demo_tree, tmp_path)
    summary = _json_stdout(capsys)
    assert code == 0
    assert summary["command"] == "run"
    assert summary["run_id"] == "cli-golden"
    assert all(summary["reports"].values())
    assert len(summary["reports"]) == 6
    assert summary["total_wall_time_s"] > 0
    assert set(summary["stage_timings"]) == {"expert", "alerts", "emergency", "assignment"}
    assert summary["alert_map"] == "alert_map.png"


def test_run_missing_image_exits_2(demo_tree, tmp_path, capsys):
    import shutil
    broken = tmp_path / "broken"
    shutil.copytree(demo_tree["manifest"].parent, broken)
    (broken / "sites" / "s1.png").unlink()
    code = main([
        "run", "--scenario", str(broken / "scenario.json"),
        "--config", str(demo_tree["config_path"]),
        "--out", str(tmp_path / "runs"), "--backend", "scripted",
        "--script", str(demo_tree["script"]),
    ])
    assert code == 2


def test_live_without_key_exits_5_before_any_request(demo_tree, tmp_path):
    code = main([
        "run", "--scenario", str(demo_tree["manifest"]),
        "--config", str(demo_tree["config_path"]),
        "--out", str(tmp_path), "--backend", "live",
    ])
    assert code == 5


def test_scripted_without_script_exits_2(demo_tree, tmp_path):
    code = main([
        "run", "--scenario", str(demo_tree["manifest"]),
        "--config", str(demo_tree["config_path"]),
        "--out", str(tmp_path), "--backend", "scripted",
    ])
    assert code == 2


def test_validate_config_ok(demo_tree, capsys):
    code = main(["validate-config", "--config", str(demo_tree["config_path"])])
    summary = _json_stdout(capsys)
    assert code == 0
    assert summary["valid"] is True
    assert summary["config"]["retrieval"]["chunk_size"] == 300
    assert summary["config"]["orchestration"]["parallel_alerts_emergency"] is True


def test_validate_config_overlap_error_names_field(demo_tree, tmp_path, capsys, caplog):
    config = json.loads(demo_tree["config_path"].read_text())
    config["retrieval"] = {"chunk_size": 100, "overlap": 100}
    path = tmp_path / "bad.json"
    path.write_text(json.dumps(config))
    code = main(["validate-config", "--config", str(path)])
    assert code == 2
    assert "overlap" in caplog.text


def test_index_command(demo_tree, tmp_path, capsys):
    code = main([
        "index", "--guideline", str(demo_tree["manifest"].parent / "guideline.txt"),
        "--out", str(tmp_path / "idx"),
    ])
    summary = _json_stdout(capsys)
    assert code == 0
    assert summary["chunks"] >= 2
    assert (tmp_path / "idx" / "chunks.json").is_file()
    assert (tmp_path / "idx" / "stats.json").is_file()


def test_index_empty_guideline_exits_2(tmp_path):
    empty = tmp_path / "empty.txt"
    empty.write_text("  \n")
    assert main(["index", "--guideline", str(empty), "--out", str(tmp_path / "i")]) == 2


def test_evaluate_with_human_scores(demo_tree, tmp_path, capsys):
    assert _run_golden(demo_tree, tmp_path, run_id="to-eval") == 0
    capsys.readouterr()
    run_dir = tmp_path / "to-eval"
    code = main([
        "evaluate", "--run-dir", str(run_dir),
        "--config", str(demo_tree["config_path"]),
        "--backend", "scripted", "--script", str(demo_tree["evaluator_script"]),
        "--human-scores", str(demo_tree["human_csv"]),
        "--out", str(tmp_path / "eval-out"),
    ])
    summary = _json_stdout(capsys)
    assert code == 0
    assert summary["machine_scores"] == 8
    assert summary["human_scores"] == 40
    assert summary["comparison_rows"] == 8
    comparison = json.loads((tmp_path / "eval-out" / "comparison.json").read_text())
    assert len(comparison) == 8
    assert all(row["difference"] is not None for row in comparison)
    assert (tmp_path / "eval-out" / "scores.json").is_file()
    assert (tmp_path / "eval-out" / "aggregates.json").is_file()
    assert (tmp_path / "eval-out" / "plot_data.csv").is_file()
    # evaluation never writes into the run directory
    assert sorted(p.name for p in run_dir.iterdir()) == [
        "alert_map.png", "blackboard.json", "manifest.json", "reports",
        "timings.json", "tool_log.json", "transcript.json"]


def test_evaluate_human_only(demo_tree, tmp_path, capsys):
    assert _run_golden(demo_tree, tmp_path, run_id="human-only") == 0
    capsys.readouterr()
    code = main([
        "evaluate", "--run-dir", str(tmp_path / "human-only"),
        "--config", str(demo_tree["config_path"]),
        "--backend", "none",
        "--human-scores", str(demo_tree["human_csv"]),
        "--out", str(tmp_path / "h-eval"),
    ])
    summary = _json_stdout(capsys)
    assert code == 0
    assert summary["machine_scores"] == 0
    assert summary["human_scores"] == 40
    assert summary["comparison_rows"] == 0


def test_replay_identical(demo_tree, tmp_path, capsys):
    assert _run_golden(demo_tree, tmp_path, run_id="replayable") == 0
    capsys.readouterr()
    code = main([
        "replay", "--run-dir", str(tmp_path / "replayable"),
        "--out", str(tmp_path / "replays"),
    ])
    summary = _json_stdout(capsys)
    assert code == 0
    assert summary["verdict"] == "identical"
    assert summary["mismatches"] == []
    assert len(summary["compared"]) == 7  # 6 reports + alert map


def test_replay_detects_tampering(demo_tree, tmp_path, capsys):
    assert _run_golden(demo_tree, tmp_path, run_id="tampered") == 0
    capsys.readouterr()
    report = tmp_path / "tampered" / "reports" / "AlertNews.md"
    report.write_text(report.read_text() + "\nedited after the fact\n")
    code = main([
        "replay", "--run-dir", str(tmp_path / "tampered"),
        "--out", str(tmp_path / "replays2"),
    ])
    summary = _json_stdout(capsys)
    assert code == 3
    assert summary["verdict"] == "mismatch"
    assert "reports/AlertNews.md" in summary["mismatches"]


def test_replay_requires_transcript(demo_tree, tmp_path):
    assert _run_golden(demo_tree, tmp_path, run_id="no-transcript") == 0
    (tmp_path / "no-transcript" / "transcript.json").unlink()
    code = main(["replay", "--run-dir", str(tmp_path / "no-transcript"),
                 "--out", str(tmp_path / "r")])
    assert code == 4


def test_aggregates_reproducible_from_persisted_scores(demo_tree, tmp_path, capsys):
    from disasteller.evaluation.scores import aggregate, load_scores
    assert _run_golden(demo_tree, tmp_path, run_id="repro") == 0
    capsys.readouterr()
    assert main([
        "evaluate", "--run-dir", str(tmp_path / "repro"),
        "--config", str(demo_tree["config_path"]),
        "--backend", "scripted", "--script", str(demo_tree["evaluator_script"]),
        "--human-scores", str(demo_tree["human_csv"]),
        "--out", str(tmp_path / "repro-eval"),
    ]) == 0
    capsys.readouterr()
    scores = load_scores(tmp_path / "repro-eval" / "scores.json")
    recomputed = [s.as_dict() for s in aggregate(scores)]
    persisted = json.loads((tmp_path / "repro-eval" / "aggregates.json").read_text())
    assert recomputed == persisted
