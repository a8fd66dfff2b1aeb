from disasteller.orchestrator.agents import (
    AgentSpec,
    AssessmentsFrom,
    KNOWN_TOOL_IDS,
    ReportText,
    ToolArtifact,
    build_default_agents,
    format_instructions,
)
from disasteller.orchestrator.loop import (
    DisallowedTool,
    FormatRetriesExhausted,
    MissingInput,
    OutputContractUnmet,
    StageEnv,
    StageResult,
    ToolIterationLimit,
    run_agent,
)
from disasteller.orchestrator.pipeline import (
    ALERT_MAP_NAME,
    PipelineGraph,
    StageFailed,
    build_registry,
    run_pipeline,
    validate_specs,
)

__all__ = [
    "ALERT_MAP_NAME",
    "AgentSpec",
    "AssessmentsFrom",
    "DisallowedTool",
    "FormatRetriesExhausted",
    "KNOWN_TOOL_IDS",
    "MissingInput",
    "OutputContractUnmet",
    "PipelineGraph",
    "ReportText",
    "StageEnv",
    "StageFailed",
    "StageResult",
    "ToolArtifact",
    "ToolIterationLimit",
    "build_default_agents",
    "build_registry",
    "format_instructions",
    "run_agent",
    "run_pipeline",
    "validate_specs",
]
