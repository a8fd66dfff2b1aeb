"""The stage graph and its runner: expert -> {alerts || emergency} -> assignment.

The runner validates everything it can before the first gateway call, executes
stages respecting dependencies (the middle pair concurrently when configured),
injects the standard four-tool registry, records full provenance, and persists
the run directory. A stage failure is terminal: downstream stages never run on
partial information.
"""

from __future__ import annotations

import logging
import threading
import time
import uuid
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Mapping

from PIL import Image

from disasteller.config import EngineConfig, validate_config
from disasteller.core.blackboard import Blackboard
from disasteller.core.grades import parse_grade
from disasteller.core.records import RunRecord, StageTiming
from disasteller.core.scenario import DisasterScenario, ScenarioInvalid, load_scenario
from disasteller.errors import DisasTellerError
from disasteller.gateway.backends import RecordingBackend, transcript_payload
from disasteller.orchestrator.agents import AgentSpec, build_default_agents
from disasteller.orchestrator.loop import StageEnv, StageResult, run_agent
from disasteller.reporting.persist import persist_run
from disasteller.reporting.templates import ReportKind, ReportTemplate, template_for
from disasteller.toolkit.gazetteer import Gazetteer, GazetteerError, UnresolvedLocation
from disasteller.toolkit.mapping import MapAnnotation, annotate_map, png_bytes
from disasteller.toolkit.registry import (
    ArgField,
    ToolRegistry,
    ToolResult,
    ToolSpec,
)
from disasteller.toolkit.retrieval import EmptyDocument, GuidelineIndex
from disasteller.toolkit.vision import interpret_image
from disasteller.toolkit.websearch import (
    FixtureSearchProvider,
    LiveSearchProvider,
    web_search,
)

logger = logging.getLogger(__name__)

ALERT_MAP_NAME = "alert_map.png"


class StageFailed(DisasTellerError):
    """Wraps the stage error; downstream stages were not attempted."""

    def __init__(self, stage_id: str, cause: Exception):
        super().__init__(f"stage {stage_id!r} failed: {cause}")
        self.stage_id = stage_id
        self.cause = cause


@dataclass(frozen=True)
class PipelineGraph:
    stages: tuple[str, ...]
    edges: tuple[tuple[str, str], ...]

    @classmethod
    def default(cls) -> "PipelineGraph":
        return cls(
            stages=("expert", "alerts", "emergency", "assignment"),
            edges=(
                ("expert", "alerts"),
                ("expert", "emergency"),
                ("expert", "assignment"),
                ("alerts", "assignment"),
                ("emergency", "assignment"),
            ),
        )

    def predecessors(self, stage: str) -> set[str]:
        return {a for a, b in self.edges if b == stage}

    def transitive_predecessors(self, stage: str) -> set[str]:
        seen: set[str] = set()
        frontier = [stage]
        while frontier:
            current = frontier.pop()
            for pred in self.predecessors(current):
                if pred not in seen:
                    seen.add(pred)
                    frontier.append(pred)
        return seen

    def topological_order(self) -> list[str]:
        order: list[str] = []
        remaining = set(self.stages)
        while remaining:
            ready = sorted(
                s for s in remaining if self.predecessors(s) <= set(order)
            )
            if not ready:
                raise ValueError("pipeline graph has a cycle")
            order.extend(ready)
            remaining -= set(ready)
        return order


def validate_specs(specs: Mapping[str, AgentSpec], graph: PipelineGraph,
                   registry: ToolRegistry) -> None:
    graph.topological_order()  # raises on cycles
    for stage, spec in specs.items():
        preds = graph.transitive_predecessors(stage)
        for key in spec.input_keys:
            producer = key.split(".", 1)[0]
            if producer not in preds:
                raise ScenarioInvalid(
                    f"stage {stage!r} reads {key!r} but {producer!r} is not a predecessor")
        for tool_id in spec.allowed_tools:
            if not registry.known(tool_id):
                raise ScenarioInvalid(
                    f"stage {stage!r} allows unregistered tool {tool_id!r}")


class _ArtifactStore:
    def __init__(self) -> None:
        self._lock = threading.Lock()
        self._data: dict[str, bytes] = {}

    def put(self, name: str, data: bytes) -> None:
        with self._lock:
            self._data[name] = data

    def get(self, name: str) -> bytes:
        with self._lock:
            return self._data[name]

    def snapshot(self) -> dict[str, bytes]:
        with self._lock:
            return dict(self._data)


def build_registry(
    scenario: DisasterScenario,
    gazetteer: Gazetteer,
    index: GuidelineIndex,
    search_provider: Any,
    gateway: Any,
    config: EngineConfig,
    warnings: list[str],
) -> ToolRegistry:
    """The standard four tools, closed over this run's resources."""
    registry = ToolRegistry()

    def handle_interpret(args: dict, stage_id: str) -> ToolResult:
        site = scenario.site_by_id(str(args["site_id"]))
        instruction = args.get("instruction") or (
            f"Describe the visible damage at {site.location_name}."
        )
        text = interpret_image(
            gateway, site.read_bytes(), instruction,
            model_id=config.gateway.model_id, stage=stage_id,
            temperature=config.gateway.temperature,
        )
        return ToolResult(content={"site_id": site.site_id,
                                   "location_name": site.location_name,
                                   "description": text})

    def handle_file_search(args: dict, stage_id: str) -> ToolResult:
        k = args.get("k", config.retrieval.k)
        hits = index.search(str(args["query"]), k)
        return ToolResult(content=[
            {"doc_id": h.chunk.doc_id, "chunk_id": h.chunk.chunk_id,
             "score": h.score, "text": h.chunk.text}
            for h in hits
        ])

    def handle_web_search(args: dict, stage_id: str) -> ToolResult:
        k = args.get("k", config.retrieval.k)
        results = web_search(search_provider, str(args["query"]), k)
        return ToolResult(content=[r.as_dict() for r in results])

    def handle_annotate(args: dict, stage_id: str) -> ToolResult:
        annotations: list[MapAnnotation] = []
        skipped: list[str] = []
        for item in args["annotations"]:
            name = str(item["location_name"])
            grade = parse_grade(str(item["grade"]))
            try:
                x, y = gazetteer.resolve(name)
            except UnresolvedLocation:
                skipped.append(name)
                warnings.append(f"location {name!r} not in gazetteer; left off the map")
                logger.warning("unresolved location %r excluded from alert map", name)
                continue
            annotations.append(MapAnnotation(location_name=name, grade=grade, x=x, y=y))
        with Image.open(scenario.global_map_path) as base:
            rendered = annotate_map(base.convert("RGB"), annotations)
        return ToolResult(
            content={
                "annotated": [a.location_name for a in annotations],
                "skipped": skipped,
                "marker_count": len(annotations),
                "artifact": ALERT_MAP_NAME,
            },
            artifacts={ALERT_MAP_NAME: png_bytes(rendered)},
        )

    registry.register(
        ToolSpec(
            tool_id="interpret_image",
            description="Describe the visible damage in one site's photograph.",
            arguments=(
                ArgField("site_id", "string", "scenario site identifier"),
                ArgField("instruction", "string", "what to look for", required=False),
            ),
        ),
        handle_interpret,
    )
    registry.register(
        ToolSpec(
            tool_id="file_search",
            description="Search the technical guideline for damage-grading criteria.",
            arguments=(
                ArgField("query", "string", "search terms"),
                ArgField("k", "integer", "number of passages", required=False),
            ),
        ),
        handle_file_search,
    )
    registry.register(
        ToolSpec(
            tool_id="web_search",
            description="Search the web for historical disaster records.",
            arguments=(
                ArgField("query", "string", "search terms"),
                ArgField("k", "integer", "number of results", required=False),
            ),
        ),
        handle_web_search,
    )
    registry.register(
        ToolSpec(
            tool_id="annotate_map",
            description="Place damage-grade markers on the region map by location name.",
            arguments=(
                ArgField("annotations", "list-of-annotation",
                         "one {location_name, grade} per assessed site"),
            ),
        ),
        handle_annotate,
    )
    return registry


def _briefing_for(stage: str, scenario: DisasterScenario) -> str:
    if stage == "expert":
        lines = [
            f"Affected region: {scenario.region_name} "
            f"(scenario {scenario.scenario_id}).",
            f"Sites to assess ({len(scenario.sites)}):",
        ]
        lines += [f"- {s.site_id}: {s.location_name}" for s in scenario.sites]
        return "\n".join(lines)
    if stage == "alerts":
        return f"Write the alert news for {scenario.region_name}."
    if stage == "emergency":
        return f"Write the emergency services report for {scenario.region_name}."
    return (f"Write the human allocation command, public notice, and "
            f"reconstruction plan for {scenario.region_name}.")


def _templates_for(spec: AgentSpec, scenario: DisasterScenario) -> list[ReportTemplate]:
    return [
        template_for(kind, site_count=len(scenario.sites))
        if kind is ReportKind.EXPERT_SUMMARY else template_for(kind)
        for kind in spec.report_kinds
    ]


def run_pipeline(
    scenario: DisasterScenario | str | Path,
    config: EngineConfig,
    backend: Any,
    out_dir: str | Path,
    run_id: str | None = None,
    stage_latency: Mapping[str, float] | None = None,
    persist: bool = True,
) -> RunRecord:
    """Execute the full four-stage pipeline and persist its run directory.

    ``backend`` is any gateway (HTTP or scripted); every call it serves is
    recorded so the run can be replayed. ``stage_latency`` injects a sleep at
    the start of each named stage, inside its timed window (test hook).

    Raises ScenarioInvalid before any gateway call for setup problems, and
    StageFailed when a stage errors (downstream stages are not attempted).
    """
    setup_t0 = time.monotonic()
    validate_config(config)
    if not isinstance(scenario, DisasterScenario):
        scenario_path = str(Path(scenario).resolve())
        scenario = load_scenario(scenario)
    else:
        scenario_path = str(scenario.global_map_path.parent.resolve())

    try:
        gazetteer = Gazetteer.from_file(scenario.gazetteer_path)
    except GazetteerError as exc:
        raise ScenarioInvalid(f"gazetteer unusable: {exc}") from exc
    try:
        guideline_text = scenario.guideline_path.read_text(encoding="utf-8")
        index = GuidelineIndex.from_texts(
            [(scenario.guideline_path.stem, guideline_text)],
            chunk_size=config.retrieval.chunk_size,
            overlap=config.retrieval.overlap,
        )
    except (OSError, EmptyDocument) as exc:
        raise ScenarioInvalid(f"guideline unusable: {exc}") from exc

    if config.web_search.mode == "fixture":
        provider = FixtureSearchProvider.from_file(config.web_search.fixture_path)
    else:
        provider = LiveSearchProvider(config.web_search.endpoint)

    recorder = RecordingBackend(backend)
    warnings: list[str] = []
    registry = build_registry(scenario, gazetteer, index, provider, recorder,
                              config, warnings)
    specs = build_default_agents(config)
    graph = PipelineGraph.default()
    validate_specs(specs, graph, registry)

    blackboard = Blackboard()
    artifacts = _ArtifactStore()
    setup_duration = time.monotonic() - setup_t0

    results: dict[str, StageResult] = {}
    timings: dict[str, StageTiming] = {}
    spans: dict[str, tuple[float, float]] = {}
    lock = threading.Lock()

    def exec_stage(stage: str) -> None:
        spec = specs[stage]
        env = StageEnv(
            model_id=config.gateway.model_id,
            briefing=_briefing_for(stage, scenario),
            sites=tuple((s.site_id, s.location_name) for s in scenario.sites),
            artifact_get=artifacts.get,
            artifact_put=artifacts.put,
        )
        start_epoch = time.time()
        m0 = time.monotonic()
        try:
            if stage_latency and stage in stage_latency:
                time.sleep(stage_latency[stage])
            result = run_agent(spec, blackboard, recorder, registry,
                               _templates_for(spec, scenario), env)
        except Exception as exc:
            raise StageFailed(stage, exc) from exc
        finally:
            m1 = time.monotonic()
            with lock:
                spans[stage] = (m0, m1)
                timings[stage] = StageTiming(stage_id=stage, start=start_epoch,
                                             end=time.time(), duration_s=m1 - m0)
        with lock:
            results[stage] = result

    exec_stage("expert")

    if config.orchestration.parallel_alerts_emergency:
        with ThreadPoolExecutor(max_workers=2) as pool:
            futures = {stage: pool.submit(exec_stage, stage)
                       for stage in ("alerts", "emergency")}
            errors: dict[str, Exception] = {}
            for stage in ("alerts", "emergency"):
                try:
                    futures[stage].result()
                except Exception as exc:  # keep deterministic stage order
                    errors[stage] = exc
            for stage in ("alerts", "emergency"):
                if stage in errors:
                    raise errors[stage]
    else:
        exec_stage("alerts")
        exec_stage("emergency")

    exec_stage("assignment")

    first_start = min(m0 for m0, _ in spans.values())
    last_end = max(m1 for _, m1 in spans.values())

    reports = {}
    for stage in graph.topological_order():
        reports.update(results[stage].reports)
    stored = artifacts.snapshot()

    record = RunRecord(
        run_id=run_id or f"run-{uuid.uuid4().hex[:12]}",
        scenario_id=scenario.scenario_id,
        scenario_path=scenario_path,
        stage_timings=timings,
        tool_calls=registry.log.snapshot(),
        blackboard=blackboard.snapshot(),
        reports=reports,
        alert_map_name=ALERT_MAP_NAME if ALERT_MAP_NAME in stored else None,
        artifacts=stored,
        transcript=transcript_payload(recorder.pairs()),
        gateway_calls=recorder.call_count,
        total_wall_time_s=last_end - first_start,
        setup_duration_s=setup_duration,
        config_snapshot=config.normalized(),
        warnings=warnings,
    )
    if persist:
        persist_run(record, out_dir)
    return record
