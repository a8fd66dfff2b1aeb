import dataclasses
import json
import shutil

import pytest

from disasteller.core.scenario import ScenarioInvalid
from disasteller.gateway.backends import ScriptedBackend, load_script
from disasteller.orchestrator.pipeline import PipelineGraph, StageFailed, run_pipeline
from disasteller.reporting.templates import ReportKind


def test_default_graph_shape():
    graph = PipelineGraph.default()
    assert graph.topological_order()[0] == "expert"
    assert graph.topological_order()[-1] == "assignment"
    assert graph.predecessors("assignment") == {"expert", "alerts", "emergency"}
    assert graph.predecessors("alerts") == {"expert"}
    assert graph.predecessors("emergency") == {"expert"}


def test_cycle_detected():
    graph = PipelineGraph(stages=("a", "b"), edges=(("a", "b"), ("b", "a")))
    with pytest.raises(ValueError, match="cycle"):
        graph.topological_order()


def test_golden_run_produces_everything(demo_tree, demo_backend, tmp_path):
    record = run_pipeline(demo_tree["manifest"], demo_tree["config"], demo_backend,
                          tmp_path, run_id="golden")
    assert set(record.reports) == {k.value for k in ReportKind}
    assert all(r.valid for r in record.reports.values())
    assert record.alert_map_name == "alert_map.png"
    assert set(record.stage_timings) == {"expert", "alerts", "emergency", "assignment"}
    assert record.gateway_calls == 15
    assert len(record.tool_calls) == 10
    by_tool = {}
    for call in record.tool_calls:
        by_tool[call.tool_id] = by_tool.get(call.tool_id, 0) + 1
    assert by_tool == {"interpret_image": 6, "file_search": 1,
                       "annotate_map": 1, "web_search": 2}
    keys = [e.key for e in record.blackboard]
    assert set(keys) == {
        "expert.assessments", "expert.alert_map", "expert.summary",
        "alerts.news", "emergency.services",
        "assignment.human_allocation", "assignment.public_notice",
        "assignment.reconstruction_plan",
    }
    assert record.total_wall_time_s >= max(t.duration_s for t in record.stage_timings.values())


def test_provenance_completeness(demo_tree, demo_backend, tmp_path):
    record = run_pipeline(demo_tree["manifest"], demo_tree["config"], demo_backend,
                          tmp_path, run_id="prov")
    match_keys = [(e["stage"], e["index"]) for e in record.transcript]
    assert len(match_keys) == len(set(match_keys)) == record.gateway_calls
    assert [t.sequence for t in record.tool_calls] == list(range(len(record.tool_calls)))


def test_invalid_scenario_fails_before_any_gateway_call(demo_tree, tmp_path):
    scenario_dir = tmp_path / "broken"
    shutil.copytree(demo_tree["manifest"].parent, scenario_dir)
    (scenario_dir / "map.png").unlink()
    backend = ScriptedBackend(load_script(demo_tree["script"]))
    before = backend.remaining
    with pytest.raises(ScenarioInvalid):
        run_pipeline(scenario_dir / "scenario.json", demo_tree["config"], backend,
                     tmp_path / "runs")
    assert backend.remaining == before


def test_sequential_mode_produces_identical_reports(demo_tree, tmp_path):
    config = demo_tree["config"]
    sequential = dataclasses.replace(
        config, orchestration=dataclasses.replace(
            config.orchestration, parallel_alerts_emergency=False))
    a = run_pipeline(demo_tree["manifest"], config,
                     ScriptedBackend(load_script(demo_tree["script"])),
                     tmp_path, run_id="par")
    b = run_pipeline(demo_tree["manifest"], sequential,
                     ScriptedBackend(load_script(demo_tree["script"])),
                     tmp_path, run_id="seq")
    for kind in a.reports:
        assert a.reports[kind].raw_text == b.reports[kind].raw_text
    assert a.artifacts["alert_map.png"] == b.artifacts["alert_map.png"]


def test_unresolvable_site_warned_and_left_off_map(demo_tree, tmp_path):
    scenario_dir = tmp_path / "partial-gazetteer"
    shutil.copytree(demo_tree["manifest"].parent, scenario_dir)
    gazetteer = json.loads((scenario_dir / "gazetteer.json").read_text())
    gazetteer = [g for g in gazetteer if g["name"] != "Concrete Bridge"]
    (scenario_dir / "gazetteer.json").write_text(json.dumps(gazetteer))

    backend = ScriptedBackend(load_script(demo_tree["script"]))
    record = run_pipeline(scenario_dir / "scenario.json", demo_tree["config"], backend,
                          tmp_path / "runs", run_id="partial")
    assert any("Concrete Bridge" in w for w in record.warnings)
    annotate = [t for t in record.tool_calls if t.tool_id == "annotate_map"][0]
    assert annotate.result["marker_count"] == 5
    assert annotate.result["skipped"] == ["Concrete Bridge"]
    # excluded from the map, never from the reports
    assert "Concrete Bridge" in record.reports["ExpertSummary"].raw_text
    assert all(r.valid for r in record.reports.values())


def test_stage_failure_is_terminal(demo_tree, tmp_path):
    expert_only = [e for e in load_script(demo_tree["script"]) if e.stage == "expert"]
    backend = ScriptedBackend(expert_only)
    with pytest.raises(StageFailed) as excinfo:
        run_pipeline(demo_tree["manifest"], demo_tree["config"], backend,
                     tmp_path, run_id="fail")
    assert excinfo.value.stage_id in ("alerts", "emergency")
    assert not (tmp_path / "fail").exists()  # failed runs are not persisted


def test_injected_latency_respects_critical_path(demo_tree, tmp_path):
    latency = {"expert": 0.05, "alerts": 0.06, "emergency": 0.04, "assignment": 0.05}
    backend = ScriptedBackend(load_script(demo_tree["script"]))
    record = run_pipeline(demo_tree["manifest"], demo_tree["config"], backend,
                          tmp_path, run_id="lat", stage_latency=latency)
    d = {s: t.duration_s for s, t in record.stage_timings.items()}
    critical = d["expert"] + max(d["alerts"], d["emergency"]) + d["assignment"]
    assert record.total_wall_time_s >= critical
    assert record.total_wall_time_s <= critical * 1.10
    assert d["alerts"] >= 0.06 and d["emergency"] >= 0.04


def test_run_id_collision_rejected(demo_tree, tmp_path):
    run_pipeline(demo_tree["manifest"], demo_tree["config"],
                 ScriptedBackend(load_script(demo_tree["script"])), tmp_path, run_id="dup")
    with pytest.raises(FileExistsError):
        run_pipeline(demo_tree["manifest"], demo_tree["config"],
                     ScriptedBackend(load_script(demo_tree["script"])), tmp_path,
                     run_id="dup")


def test_no_secret_reaches_any_persisted_artifact(demo_tree, tmp_path, monkeypatch):
    secret = "sk-test-abcdef-000111222333"
    monkeypatch.setenv("DISASTELLER_API_KEY", secret)
    backend = ScriptedBackend(load_script(demo_tree["script"]))
    run_pipeline(demo_tree["manifest"], demo_tree["config"], backend,
                 tmp_path, run_id="secret-scan")
    run_dir = tmp_path / "secret-scan"
    for path in run_dir.rglob("*"):
        if path.is_file():
            assert secret.encode() not in path.read_bytes(), path


def test_validate_specs_rejects_bad_wiring(demo_tree):
    import dataclasses
    from disasteller.orchestrator.agents import build_default_agents
    from disasteller.orchestrator.pipeline import PipelineGraph, validate_specs
    from disasteller.toolkit.registry import ToolRegistry

    specs = build_default_agents(demo_tree["config"])
    graph = PipelineGraph.default()
    registry = ToolRegistry()  # nothing registered

    with pytest.raises(ScenarioInvalid, match="unregistered tool"):
        validate_specs(specs, graph, registry)

    # a stage reading a non-predecessor's key is rejected
    bad = {stage: dataclasses.replace(spec, allowed_tools=frozenset())
           for stage, spec in specs.items()}
    bad["alerts"] = dataclasses.replace(bad["alerts"],
                                        input_keys=("assignment.public_notice",))
    with pytest.raises(ScenarioInvalid, match="not a predecessor"):
        validate_specs(bad, graph, ToolRegistry())
