"""The four agent roles: prompts, allowed tools, blackboard contracts.

Each stage declares what it reads, which tools it may call, which report
templates its final answer must satisfy, and how its blackboard keys derive
from that answer (report text, parsed assessments, or a tool-produced
artifact). Format instructions are generated from the templates so prompt and
validator can never drift apart.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

from disasteller.config import ConfigError, EngineConfig
from disasteller.reporting.templates import (
    BudgetLine,
    GradeLines,
    QuantifiedLines,
    ReportKind,
    ReportTemplate,
)

STAGE_IDS = ("expert", "alerts", "emergency", "assignment")

# The four tools of the standard registry; overrides must stay inside this set.
KNOWN_TOOL_IDS = frozenset({"interpret_image", "file_search", "web_search", "annotate_map"})


@dataclass(frozen=True)
class ReportText:
    """Bind a key to one report's extracted text."""
    kind: ReportKind


@dataclass(frozen=True)
class AssessmentsFrom:
    """Bind a key to the structured per-site assessments parsed from a report."""
    kind: ReportKind


@dataclass(frozen=True)
class ToolArtifact:
    """Bind a key to the last artifact a given tool produced this stage."""
    tool_id: str


Binding = ReportText | AssessmentsFrom | ToolArtifact


@dataclass(frozen=True)
class AgentSpec:
    stage_id: str
    system_prompt: str
    allowed_tools: frozenset[str]
    input_keys: tuple[str, ...]
    output_bindings: tuple[tuple[str, Binding], ...]
    report_kinds: tuple[ReportKind, ...]
    temperature: float = 0.7
    max_output_tokens: int = 2048
    max_tool_iterations: int = 8
    max_format_retries: int = 2

    def __post_init__(self) -> None:
        if self.max_tool_iterations < 1:
            raise ValueError("max_tool_iterations must be positive")
        if self.max_format_retries < 0:
            raise ValueError("max_format_retries must be >= 0")

    @property
    def output_keys(self) -> tuple[str, ...]:
        return tuple(key for key, _ in self.output_bindings)


EXPERT_PROMPT = """\
You are the on-site assessment expert of a disaster response operation. Working
from the post-disaster photographs of each listed site:
1. Call interpret_image once per site to obtain a damage description.
2. Call file_search against the technical guideline to ground the damage
   grading; assign each site one grade from G1 (slight) to G5 (destruction).
3. Call annotate_map once, passing one {location_name, grade} annotation per
   graded site, to produce the alert map.
Then write your summary report."""

ALERTS_PROMPT = """\
You are the public alerts team. Using the expert assessment and alert map you
are given, write the alert news: what happened, which areas are dangerous and
why, and what people must do right now. Be specific about locations."""

EMERGENCY_PROMPT = """\
You are the emergency services coordinator. From the expert assessment and the
alert map, determine where immediate relief and restoration effort must go.
You may call web_search for records of comparable past disasters to support
your recommendations."""

ASSIGNMENT_PROMPT = """\
You are the assignment team. Integrate the expert summary, the alert news, and
the emergency services report into the three final documents: the human
resource allocation command (concrete personnel numbers per location), the
public notice, and the reconstruction plan with a budget estimate. You may call
web_search for cost references from comparable past disasters."""

_DEFAULT_PROMPTS = {
    "expert": EXPERT_PROMPT,
    "alerts": ALERTS_PROMPT,
    "emergency": EMERGENCY_PROMPT,
    "assignment": ASSIGNMENT_PROMPT,
}

_DEFAULT_TOOLS = {
    "expert": frozenset({"interpret_image", "file_search", "annotate_map"}),
    "alerts": frozenset(),
    "emergency": frozenset({"web_search"}),
    "assignment": frozenset({"web_search"}),
}

_INPUT_KEYS = {
    "expert": (),
    "alerts": ("expert.summary", "expert.alert_map"),
    "emergency": ("expert.summary", "expert.alert_map"),
    "assignment": ("expert.summary", "alerts.news", "emergency.services"),
}

_BINDINGS: dict[str, tuple[tuple[str, Binding], ...]] = {
    "expert": (
        ("expert.assessments", AssessmentsFrom(ReportKind.EXPERT_SUMMARY)),
        ("expert.alert_map", ToolArtifact("annotate_map")),
        ("expert.summary", ReportText(ReportKind.EXPERT_SUMMARY)),
    ),
    "alerts": (("alerts.news", ReportText(ReportKind.ALERT_NEWS)),),
    "emergency": (("emergency.services", ReportText(ReportKind.EMERGENCY_SERVICES)),),
    "assignment": (
        ("assignment.human_allocation", ReportText(ReportKind.HUMAN_ALLOCATION)),
        ("assignment.public_notice", ReportText(ReportKind.PUBLIC_NOTICE)),
        ("assignment.reconstruction_plan", ReportText(ReportKind.RECONSTRUCTION_PLAN)),
    ),
}

_REPORT_KINDS = {
    "expert": (ReportKind.EXPERT_SUMMARY,),
    "alerts": (ReportKind.ALERT_NEWS,),
    "emergency": (ReportKind.EMERGENCY_SERVICES,),
    "assignment": (ReportKind.HUMAN_ALLOCATION, ReportKind.PUBLIC_NOTICE,
                   ReportKind.RECONSTRUCTION_PLAN),
}


def format_instructions(templates: list[ReportTemplate]) -> str:
    """Section and constraint requirements, derived from the templates."""
    lines = ["Your final message must be plain Markdown containing, in this order:"]
    for t in templates:
        heads = ", ".join(f'"## {h}"' for h in t.headers)
        lines.append(f"- the {t.kind.value} report with the sections {heads}")
        for c in t.constraints:
            if isinstance(c, GradeLines):
                want = (f"exactly {c.expected_count} lines, one per site, "
                        if c.expected_count else "lines that ")
                lines.append(
                    f'  (under "{c.section}": {want}each carrying exactly one '
                    f"damage grade token G1..G5)")
            elif isinstance(c, QuantifiedLines):
                lines.append(f'  (under "{c.section}": every line must state integer '
                             f"personnel quantities)")
            elif isinstance(c, BudgetLine):
                lines.append(f'  (under "{c.section}": state a monetary amount, '
                             f'e.g. "$1 billion")')
    lines.append("Use each section header exactly once. No other top-level sections.")
    return "\n".join(lines)


def build_default_agents(config: EngineConfig) -> dict[str, AgentSpec]:
    """The four default AgentSpecs, with config prompt/tool overrides applied.

    Raises ConfigError for a missing prompt file or an unknown tool name.
    """
    specs: dict[str, AgentSpec] = {}
    for stage in STAGE_IDS:
        prompt = _DEFAULT_PROMPTS[stage]
        tools = _DEFAULT_TOOLS[stage]
        override = config.agents.get(stage)
        if override is not None:
            if override.prompt is not None:
                path = Path(override.prompt)
                if not path.is_file():
                    raise ConfigError(f"prompt override for stage {stage!r} not found: {path}")
                prompt = path.read_text(encoding="utf-8")
            if override.tools is not None:
                unknown = sorted(set(override.tools) - KNOWN_TOOL_IDS)
                if unknown:
                    raise ConfigError(
                        f"agent override for stage {stage!r} names unknown tool {unknown[0]!r}")
                tools = frozenset(override.tools)
        specs[stage] = AgentSpec(
            stage_id=stage,
            system_prompt=prompt,
            allowed_tools=tools,
            input_keys=_INPUT_KEYS[stage],
            output_bindings=_BINDINGS[stage],
            report_kinds=_REPORT_KINDS[stage],
            temperature=config.gateway.temperature,
            max_output_tokens=config.gateway.max_output_tokens,
            max_tool_iterations=config.orchestration.max_tool_iterations,
            max_format_retries=config.orchestration.max_format_retries,
        )
    return specs
