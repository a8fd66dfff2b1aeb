"""disasteller: a multi-agent post-disaster assessment and reporting engine.

Four role-prompted vision-language agents (expert, alerts, emergency,
assignment) coordinate over a shared blackboard, call four tools (image
interpretation, guideline search, web search, map annotation), and produce six
templated reports plus an annotated alert map. Everything runs offline against
a scripted model backend; the same pipeline runs live against any
OpenAI-compatible endpoint.
"""

from disasteller.config import ConfigError, EngineConfig, config_from_dict, load_config
from disasteller.core import (
    Blackboard,
    BlackboardEntry,
    DamageGrade,
    DisasterScenario,
    RunRecord,
    ScenarioInvalid,
    SiteAssessment,
    grade_color,
    load_scenario,
    parse_grade,
)
from disasteller.errors import DisasTellerError
from disasteller.orchestrator import (
    AgentSpec,
    PipelineGraph,
    StageFailed,
    build_default_agents,
    run_agent,
    run_pipeline,
)
from disasteller.reporting import ReportKind, persist_run, template_for, validate_report

__version__ = "0.1.0"

__all__ = [
    "AgentSpec",
    "Blackboard",
    "BlackboardEntry",
    "ConfigError",
    "DamageGrade",
    "DisasTellerError",
    "DisasterScenario",
    "EngineConfig",
    "PipelineGraph",
    "ReportKind",
    "RunRecord",
    "ScenarioInvalid",
    "SiteAssessment",
    "StageFailed",
    "__version__",
    "build_default_agents",
    "config_from_dict",
    "grade_color",
    "load_config",
    "load_scenario",
    "parse_grade",
    "persist_run",
    "run_agent",
    "run_pipeline",
    "template_for",
    "validate_report",
]
