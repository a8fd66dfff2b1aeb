import hashlib
import json

import pytest

from disasteller.core.blackboard import BlackboardEntry
from disasteller.core.records import RunRecord, StageTiming, ToolCallRecord
from disasteller.reporting.persist import load_run_record, persist_run
from disasteller.reporting.templates import ReportKind, template_for
from disasteller.reporting.validation import make_report


def _record(valid=True):
    reports = {}
    for kind in ReportKind:
        template = template_for(kind)
        if valid:
            text = "\n".join(f"## {h}\nbody with 5 crews and $1 million\n"
                             for h in template.headers)
        else:
            text = "not a report"
        reports[kind.value] = make_report(text, template)
    return RunRecord(
        run_id="r1",
        scenario_id="wajima-demo",
        scenario_path="/tmp/scenario.json",
        stage_timings={"expert": StageTiming("expert", 1.0, 2.0, 1.0)},
        tool_calls=[ToolCallRecord(0, "expert", "file_search", {"query": "x"},
                                   True, [], None, 0.01, "2024-01-01T00:00:00+00:00")],
        blackboard=[BlackboardEntry(key="expert.summary", producer="expert",
                                    kind="text", content="hello", sequence=0)],
        reports=reports,
        alert_map_name="alert_map.png",
        artifacts={"alert_map.png": b"\x89PNG fake"},
        transcript=[{"stage": "expert", "index": 0,
                     "response": {"text": "t", "tool_calls": [],
                                  "finish_reason": "stop", "usage": {}},
                     "request_digest": None}],
        gateway_calls=1,
        total_wall_time_s=1.5,
        config_snapshot={"gateway": {"model_id": "gpt-4o"}},
    )


def test_layout_contract(tmp_path):
    manifest_path = persist_run(_record(), tmp_path)
    run_dir = manifest_path.parent
    report_files = sorted(p.name for p in (run_dir / "reports").iterdir())
    assert len(report_files) == 12  # 6 markdown + 6 sidecars
    for name in ("manifest.json", "alert_map.png", "blackboard.json",
                 "tool_log.json", "timings.json", "transcript.json"):
        assert (run_dir / name).is_file()


def test_manifest_digests_verify(tmp_path):
    manifest_path = persist_run(_record(), tmp_path)
    run_dir = manifest_path.parent
    manifest = json.loads(manifest_path.read_text())
    assert manifest["run_id"] == "r1"
    assert len(manifest["artifacts"]) == 12 + 5  # reports + map/bb/log/timings/transcript
    for rel, digest in manifest["artifacts"].items():
        data = (run_dir / rel).read_bytes()
        assert hashlib.sha256(data).hexdigest() == digest


def test_never_overwrites_existing_run(tmp_path):
    persist_run(_record(), tmp_path)
    with pytest.raises(FileExistsError):
        persist_run(_record(), tmp_path)


def test_invalid_reports_persisted_with_failed_status(tmp_path):
    manifest_path = persist_run(_record(valid=False), tmp_path)
    run_dir = manifest_path.parent
    manifest = json.loads(manifest_path.read_text())
    assert all(meta["valid"] is False for meta in manifest["reports"].values())
    sidecar = json.loads((run_dir / "reports" / "AlertNews.json").read_text())
    assert sidecar["valid"] is False
    assert sidecar["issues"]


def test_load_run_record_round_trip(tmp_path):
    record = _record()
    manifest_path = persist_run(record, tmp_path)
    loaded = load_run_record(manifest_path.parent)
    assert loaded.run_id == "r1"
    assert set(loaded.reports) == set(record.reports)
    assert loaded.reports["AlertNews"].raw_text == record.reports["AlertNews"].raw_text
    assert loaded.reports["AlertNews"].valid == record.reports["AlertNews"].valid
    assert loaded.blackboard[0].key == "expert.summary"
    assert loaded.artifacts["alert_map.png"] == b"\x89PNG fake"
    assert loaded.transcript == record.transcript
    assert loaded.config_snapshot == record.config_snapshot
