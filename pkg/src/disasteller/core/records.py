"""Provenance records: stage timings, tool calls, and the full run record."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Any

from disasteller.core.blackboard import BlackboardEntry

if TYPE_CHECKING:  # avoids a runtime cycle with reporting
    from disasteller.reporting.validation import Report


@dataclass(frozen=True)
class StageTiming:
    stage_id: str
    start: float          # epoch seconds, informational only
    end: float
    duration_s: float     # monotonic-clock duration, used for timing invariants


@dataclass(frozen=True)
class ToolCallRecord:
    sequence: int
    stage_id: str
    tool_id: str
    arguments: dict[str, Any]
    ok: bool
    result: Any
    error: str | None
    duration_s: float
    started_at: str

    def as_dict(self) -> dict[str, Any]:
        return {
            "sequence": self.sequence,
            "stage_id": self.stage_id,
            "tool_id": self.tool_id,
            "arguments": self.arguments,
            "ok": self.ok,
            "result": self.result,
            "error": self.error,
            "duration_s": self.duration_s,
            "started_at": self.started_at,
        }


@dataclass
class RunRecord:
    """Everything one pipeline execution produced and when.

    ``total_wall_time_s`` spans the stage graph (first stage start to last
    stage end); setup and persistence are reported separately by the runner.
    On success all six report kinds are present.
    """

    run_id: str
    scenario_id: str
    scenario_path: str = ""
    stage_timings: dict[str, StageTiming] = field(default_factory=dict)
    tool_calls: list[ToolCallRecord] = field(default_factory=list)
    blackboard: list[BlackboardEntry] = field(default_factory=list)
    reports: dict[str, "Report"] = field(default_factory=dict)
    alert_map_name: str | None = None
    artifacts: dict[str, bytes] = field(default_factory=dict)
    transcript: list[dict[str, Any]] = field(default_factory=list)
    gateway_calls: int = 0
    total_wall_time_s: float = 0.0
    setup_duration_s: float = 0.0
    config_snapshot: dict[str, Any] = field(default_factory=dict)
    warnings: list[str] = field(default_factory=list)
