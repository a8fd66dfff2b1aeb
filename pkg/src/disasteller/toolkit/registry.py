"""Tool registry and dispatch: uniform surface the agents call tools through.

Every dispatch is argument-checked against the tool's declared schema and
logged exactly once (success or failure) to the run's tool-call log, which
shares the blackboard's concurrent-append contract.
"""

from __future__ import annotations

import threading
import time
from dataclasses import dataclass, field
from datetime import datetime, timezone
from typing import Any, Callable

from disasteller.core.grades import GradeParseError, parse_grade
from disasteller.core.records import ToolCallRecord
from disasteller.errors import DisasTellerError

ARG_TYPES = ("string", "integer", "grade", "list-of-annotation")


class ToolError(DisasTellerError):
    pass


class UnknownTool(ToolError):
    pass


class ArgumentSchemaViolation(ToolError):
    """Arguments do not fit the tool's schema; ``field`` names the offender."""

    def __init__(self, message: str, field_name: str):
        super().__init__(message)
        self.field = field_name


@dataclass(frozen=True)
class ArgField:
    name: str
    type: str                      # one of ARG_TYPES
    description: str = ""
    required: bool = True

    def __post_init__(self) -> None:
        if self.type not in ARG_TYPES:
            raise ValueError(f"unknown argument type {self.type!r}")


@dataclass(frozen=True)
class ToolSpec:
    tool_id: str
    description: str
    arguments: tuple[ArgField, ...] = ()

    def wire_format(self) -> dict[str, Any]:
        """OpenAI function-call tool declaration."""
        properties: dict[str, Any] = {}
        required: list[str] = []
        for arg in self.arguments:
            properties[arg.name] = _json_schema_for(arg)
            if arg.required:
                required.append(arg.name)
        return {
            "type": "function",
            "function": {
                "name": self.tool_id,
                "description": self.description,
                "parameters": {
                    "type": "object",
                    "properties": properties,
                    "required": required,
                },
            },
        }


def _json_schema_for(arg: ArgField) -> dict[str, Any]:
    if arg.type == "string":
        return {"type": "string", "description": arg.description}
    if arg.type == "integer":
        return {"type": "integer", "description": arg.description}
    if arg.type == "grade":
        return {
            "type": "string",
            "description": arg.description or "damage grade token G1..G5",
        }
    return {
        "type": "array",
        "description": arg.description,
        "items": {
            "type": "object",
            "properties": {
                "location_name": {"type": "string"},
                "grade": {"type": "string", "description": "damage grade token G1..G5"},
            },
            "required": ["location_name", "grade"],
        },
    }


@dataclass
class ToolResult:
    """What a handler returns: ``content`` goes back to the model (and into the
    log); ``artifacts`` are binary outputs kept on the run, by name."""

    content: Any
    artifacts: dict[str, bytes] = field(default_factory=dict)


# Handlers get (args, stage_id); the stage matters to tools that make nested
# gateway calls, which must be attributed to the calling stage.
Handler = Callable[[dict[str, Any], str], ToolResult]


class ToolCallLog:
    """Concurrent append-only record of every dispatch."""

    def __init__(self) -> None:
        self._lock = threading.Lock()
        self._records: list[ToolCallRecord] = []

    def append(self, **kwargs: Any) -> ToolCallRecord:
        with self._lock:
            record = ToolCallRecord(sequence=len(self._records), **kwargs)
            self._records.append(record)
            return record

    def snapshot(self) -> list[ToolCallRecord]:
        with self._lock:
            return list(self._records)

    def __len__(self) -> int:
        with self._lock:
            return len(self._records)


class ToolRegistry:
    def __init__(self, log: ToolCallLog | None = None) -> None:
        self._tools: dict[str, tuple[ToolSpec, Handler]] = {}
        self.log = log if log is not None else ToolCallLog()

    def register(self, spec: ToolSpec, handler: Handler) -> None:
        if spec.tool_id in self._tools:
            raise ToolError(f"tool already registered: {spec.tool_id!r}")
        self._tools[spec.tool_id] = (spec, handler)

    def spec(self, tool_id: str) -> ToolSpec:
        try:
            return self._tools[tool_id][0]
        except KeyError:
            raise UnknownTool(f"no such tool: {tool_id!r}") from None

    def specs(self, tool_ids: Any = None) -> list[ToolSpec]:
        if tool_ids is None:
            return [spec for spec, _ in self._tools.values()]
        return [self.spec(t) for t in tool_ids]

    def known(self, tool_id: str) -> bool:
        return tool_id in self._tools

    def dispatch(self, tool_id: str, args: dict[str, Any], stage_id: str = "") -> ToolResult:
        """Validate args, invoke the handler exactly once, log the call.

        Raises UnknownTool / ArgumentSchemaViolation before the handler runs;
        handler failures are logged and re-raised.
        """
        if tool_id not in self._tools:
            raise UnknownTool(f"no such tool: {tool_id!r}")
        spec, handler = self._tools[tool_id]
        started_at = datetime.now(timezone.utc).isoformat()
        t0 = time.monotonic()
        try:
            validate_args(spec, args)
            result = handler(args, stage_id)
        except Exception as exc:
            self.log.append(
                stage_id=stage_id, tool_id=tool_id, arguments=args, ok=False,
                result=None, error=f"{type(exc).__name__}: {exc}",
                duration_s=time.monotonic() - t0, started_at=started_at,
            )
            raise
        self.log.append(
            stage_id=stage_id, tool_id=tool_id, arguments=args, ok=True,
            result=result.content, error=None,
            duration_s=time.monotonic() - t0, started_at=started_at,
        )
        return result


def validate_args(spec: ToolSpec, args: dict[str, Any]) -> None:
    declared = {a.name: a for a in spec.arguments}
    for name in args:
        if name not in declared:
            raise ArgumentSchemaViolation(
                f"tool {spec.tool_id!r} accepts no argument {name!r}", name)
    for arg in spec.arguments:
        if arg.name not in args:
            if arg.required:
                raise ArgumentSchemaViolation(
                    f"tool {spec.tool_id!r} requires argument {arg.name!r}", arg.name)
            continue
        _check_value(spec.tool_id, arg.name, arg.type, args[arg.name])


def _check_value(tool_id: str, name: str, type_: str, value: Any) -> None:
    if type_ == "string":
        if not isinstance(value, str):
            raise ArgumentSchemaViolation(f"{name!r} must be a string", name)
    elif type_ == "integer":
        if isinstance(value, bool) or not isinstance(value, int):
            raise ArgumentSchemaViolation(f"{name!r} must be an integer", name)
    elif type_ == "grade":
        if not isinstance(value, str):
            raise ArgumentSchemaViolation(f"{name!r} must be a grade token", name)
        try:
            parse_grade(value)
        except GradeParseError as exc:
            raise ArgumentSchemaViolation(
                f"{name!r} is not a valid grade token: {exc}", name) from exc
    elif type_ == "list-of-annotation":
        if not isinstance(value, list):
            raise ArgumentSchemaViolation(f"{name!r} must be a list", name)
        for i, item in enumerate(value):
            if not isinstance(item, dict):
                raise ArgumentSchemaViolation(f"{name}[{i}] must be an object", f"{name}[{i}]")
            if not isinstance(item.get("location_name"), str) or not item.get("location_name"):
                raise ArgumentSchemaViolation(
                    f"{name}[{i}].location_name must be a non-empty string",
                    f"{name}[{i}].location_name")
            _check_value(tool_id, f"{name}[{i}].grade", "grade", item.get("grade", ""))
