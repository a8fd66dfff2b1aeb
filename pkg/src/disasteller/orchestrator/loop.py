"""The per-stage tool-use loop: prompt, dispatch, validate, retry, publish.

One stage is one conversation. The model may request tool calls for a bounded
number of iterations; its final text must satisfy the stage's report
templates, with validator issues echoed back for a bounded number of format
retries. Output keys are published to the blackboard atomically, all or none.
"""

from __future__ import annotations

import base64
import json
import logging
import time
from dataclasses import dataclass
from typing import Any, Callable

from disasteller.core.blackboard import Blackboard, BlackboardEntry
from disasteller.core.grades import GradeParseError, parse_grade
from disasteller.core.records import ToolCallRecord
from disasteller.core.scenario import SiteAssessment
from disasteller.errors import DisasTellerError
from disasteller.gateway.types import (
    ImagePart,
    Message,
    ModelRequest,
    TextPart,
)
from disasteller.orchestrator.agents import (
    AgentSpec,
    AssessmentsFrom,
    ReportText,
    ToolArtifact,
    format_instructions,
)
from disasteller.reporting.templates import Issue, ReportTemplate
from disasteller.reporting.validation import (
    Report,
    extract_report_text,
    make_report,
    validate_report,
)
from disasteller.toolkit.registry import ToolRegistry

logger = logging.getLogger(__name__)


class StageError(DisasTellerError):
    pass


class MissingInput(StageError):
    """A declared input key is absent from the blackboard."""


class ToolIterationLimit(StageError):
    pass


class DisallowedTool(StageError):
    """The model requested a tool outside its allow-list; nothing was dispatched."""


class FormatRetriesExhausted(StageError):
    def __init__(self, message: str, issues: list[Issue]):
        super().__init__(message)
        self.issues = issues


class OutputContractUnmet(StageError):
    """The stage finished without the material needed for a declared output key."""


@dataclass
class StageEnv:
    """Run-scoped context a stage needs beyond its spec."""

    model_id: str
    briefing: str = ""
    sites: tuple[tuple[str, str], ...] = ()     # (site_id, location_name)
    artifact_get: Callable[[str], bytes] | None = None
    artifact_put: Callable[[str, bytes], None] | None = None


@dataclass
class StageResult:
    stage_id: str
    written_keys: tuple[str, ...]
    reports: dict[str, Report]
    tool_calls: list[ToolCallRecord]
    attempts: int
    duration_s: float
    final_text: str = ""


def _input_message(spec: AgentSpec, blackboard: Blackboard, env: StageEnv) -> Message:
    parts: list[Any] = []
    text_blocks: list[str] = []
    if env.briefing:
        text_blocks.append(env.briefing)
    for key in spec.input_keys:
        entry = blackboard.get(key)
        if entry.kind == "image-ref":
            text_blocks.append(f"### {key}\n[attached image: {entry.content}]")
            if env.artifact_get is not None:
                data = env.artifact_get(str(entry.content))
                parts.append(ImagePart(media_type="image/png",
                                       base64_data=base64.b64encode(data).decode("ascii")))
        elif entry.kind == "structured":
            text_blocks.append(f"### {key}\n{json.dumps(entry.content, indent=2)}")
        else:
            text_blocks.append(f"### {key}\n{entry.content}")
    parts.insert(0, TextPart("\n\n".join(text_blocks) if text_blocks else "Begin."))
    return Message(role="user", parts=tuple(parts))


def _issue_feedback(issues: list[Issue]) -> str:
    lines = ["Your answer failed format validation. Issues:"]
    for issue in issues:
        lines.append(f"- [{issue.code}] {issue.section}: {issue.message}")
    lines.append("Regenerate the complete answer with every required section, in order.")
    return "\n".join(lines)


def run_agent(
    spec: AgentSpec,
    blackboard: Blackboard,
    gateway: Any,
    registry: ToolRegistry,
    templates: list[ReportTemplate],
    env: StageEnv,
) -> StageResult:
    """Execute one stage to completion and publish its blackboard keys.

    Raises MissingInput, DisallowedTool, ToolIterationLimit,
    FormatRetriesExhausted, or OutputContractUnmet; tool handler errors
    propagate as-is (the registry has already logged them).
    """
    t0 = time.monotonic()
    for key in spec.input_keys:
        if not blackboard.has(key):
            raise MissingInput(f"stage {spec.stage_id!r} requires blackboard key {key!r}")

    system_text = spec.system_prompt.rstrip() + "\n\n" + format_instructions(templates)
    messages: list[Message] = [
        Message.text("system", system_text),
        _input_message(spec, blackboard, env),
    ]
    tool_specs = registry.specs(sorted(spec.allowed_tools))
    artifacts_by_tool: dict[str, str] = {}

    final_text: str | None = None
    issues: list[Issue] = []
    attempts = 0
    for attempt in range(1 + spec.max_format_retries):
        attempts = attempt + 1
        final_text = _tool_loop(spec, gateway, registry, tool_specs, messages,
                                env, artifacts_by_tool)
        issues = []
        for template in templates:
            issues.extend(validate_report(final_text, template))
        if not issues:
            break
        logger.info("stage %s attempt %d failed validation (%d issues)",
                    spec.stage_id, attempts, len(issues))
        if attempt < spec.max_format_retries:
            messages.append(Message.text("assistant", final_text))
            messages.append(Message.text("user", _issue_feedback(issues)))
    else:
        raise FormatRetriesExhausted(
            f"stage {spec.stage_id!r} still invalid after {attempts} attempts", issues)

    reports = _build_reports(templates, final_text)
    entries = _bind_outputs(spec, reports, artifacts_by_tool, env, registry)
    blackboard.put_many(entries)

    stage_tool_calls = [r for r in registry.log.snapshot() if r.stage_id == spec.stage_id]
    return StageResult(
        stage_id=spec.stage_id,
        written_keys=spec.output_keys,
        reports=reports,
        tool_calls=stage_tool_calls,
        attempts=attempts,
        duration_s=time.monotonic() - t0,
        final_text=final_text,
    )


def _tool_loop(
    spec: AgentSpec,
    gateway: Any,
    registry: ToolRegistry,
    tool_specs: list,
    messages: list[Message],
    env: StageEnv,
    artifacts_by_tool: dict[str, str],
) -> str:
    """One format attempt: iterate tool requests until the model answers in text."""
    rounds = 0
    while True:
        request = ModelRequest(
            model_id=env.model_id,
            messages=tuple(messages),
            tool_specs=tool_specs,
            temperature=spec.temperature,
            max_output_tokens=spec.max_output_tokens,
            stage=spec.stage_id,
        )
        response = gateway.complete(request)
        if not response.tool_calls:
            return response.text
        rounds += 1
        if rounds > spec.max_tool_iterations:
            raise ToolIterationLimit(
                f"stage {spec.stage_id!r} exceeded {spec.max_tool_iterations} tool iterations")
        disallowed = [tc.tool_id for tc in response.tool_calls
                      if tc.tool_id not in spec.allowed_tools]
        if disallowed:
            raise DisallowedTool(
                f"stage {spec.stage_id!r} requested disallowed tool {disallowed[0]!r}")
        messages.append(Message(role="assistant",
                                parts=(TextPart(response.text),),
                                tool_calls=response.tool_calls))
        for tc in response.tool_calls:
            result = registry.dispatch(tc.tool_id, tc.arguments, stage_id=spec.stage_id)
            for name, data in result.artifacts.items():
                if env.artifact_put is not None:
                    env.artifact_put(name, data)
                artifacts_by_tool[tc.tool_id] = name
            messages.append(Message(
                role="tool",
                parts=(TextPart(json.dumps(result.content)),),
                tool_call_id=tc.call_id,
            ))


def _build_reports(templates: list[ReportTemplate], final_text: str) -> dict[str, Report]:
    sibling_headers = tuple(h for t in templates for h in t.headers)
    reports: dict[str, Report] = {}
    for template in templates:
        text = extract_report_text(final_text, template, sibling_headers)
        reports[template.kind.value] = make_report(text, template)
    return reports


def _bind_outputs(
    spec: AgentSpec,
    reports: dict[str, Report],
    artifacts_by_tool: dict[str, str],
    env: StageEnv,
    registry: ToolRegistry,
) -> list[BlackboardEntry]:
    entries: list[BlackboardEntry] = []
    for key, binding in spec.output_bindings:
        if isinstance(binding, ReportText):
            report = reports[binding.kind.value]
            entries.append(BlackboardEntry(key=key, producer=spec.stage_id,
                                           kind="text", content=report.raw_text))
        elif isinstance(binding, AssessmentsFrom):
            report = reports[binding.kind.value]
            assessments = _parse_assessments(report, env, registry, spec.stage_id)
            entries.append(BlackboardEntry(
                key=key, producer=spec.stage_id, kind="structured",
                content=[a.as_dict() for a in assessments]))
        elif isinstance(binding, ToolArtifact):
            name = artifacts_by_tool.get(binding.tool_id)
            if name is None:
                raise OutputContractUnmet(
                    f"stage {spec.stage_id!r} must produce key {key!r} but tool "
                    f"{binding.tool_id!r} generated no artifact")
            entries.append(BlackboardEntry(key=key, producer=spec.stage_id,
                                           kind="image-ref", content=name))
        else:  # pragma: no cover - exhaustive over Binding
            raise TypeError(f"unknown binding {binding!r}")
    return entries


def _parse_assessments(
    report: Report,
    env: StageEnv,
    registry: ToolRegistry,
    stage_id: str,
) -> list[SiteAssessment]:
    """Structured per-site findings from the 'Site Assessments' section.

    Sites are matched by location name (case-insensitive substring); grades
    come from the line's token. Guideline citations are the chunk ids the
    stage's file_search calls returned.
    """
    citations: list[int] = []
    for record in registry.log.snapshot():
        if record.stage_id == stage_id and record.tool_id == "file_search" and record.ok:
            for hit in record.result or []:
                if isinstance(hit, dict) and "chunk_id" in hit:
                    citations.append(int(hit["chunk_id"]))
    cited = tuple(dict.fromkeys(citations))

    body = report.sections.get("Site Assessments", "")
    assessments: list[SiteAssessment] = []
    for line in body.splitlines():
        if not line.strip():
            continue
        try:
            grade = parse_grade(line)
        except GradeParseError:
            continue  # validation already flagged it; never invent a grade
        site_id, location = "", line.strip()
        for sid, name in env.sites:
            if name.casefold() in line.casefold():
                site_id, location = sid, name
                break
        assessments.append(SiteAssessment(
            site_id=site_id,
            location_name=location,
            description=line.strip(),
            grade=grade,
            guideline_citations=cited,
        ))
    return assessments
