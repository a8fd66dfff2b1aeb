"""Engine configuration: one JSON file, strict validation, normalized output.

Secrets never live here; the live gateway key comes from DISASTELLER_API_KEY
and the optional live-search key from DISASTELLER_SEARCH_KEY, so configs and
run directories stay shareable.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any

from disasteller.errors import DisasTellerError

STAGES = ("expert", "alerts", "emergency", "assignment")


class ConfigError(DisasTellerError):
    pass


@dataclass
class GatewayConfig:
    endpoint: str = "https://api.openai.com/v1"
    model_id: str = "gpt-4o"
    evaluator_model_id: str = "gpt-4o"
    temperature: float = 0.7
    max_output_tokens: int = 2048
    deadline_s: float = 120.0
    max_in_flight: int = 4


@dataclass
class RetryConfig:
    max_attempts: int = 3
    base_delay_ms: int = 250


@dataclass
class RetrievalConfig:
    chunk_size: int = 300
    overlap: int = 50
    k: int = 3


@dataclass
class OrchestrationConfig:
    parallel_alerts_emergency: bool = True
    max_tool_iterations: int = 8
    max_format_retries: int = 2


@dataclass
class AgentOverride:
    prompt: str | None = None          # path to a prompt text file
    tools: list[str] | None = None     # replaces the default allowed-tool set


@dataclass
class WebSearchConfig:
    mode: str = "fixture"              # "fixture" | "live"
    fixture_path: str | None = None
    endpoint: str | None = None


@dataclass
class EngineConfig:
    gateway: GatewayConfig = field(default_factory=GatewayConfig)
    retry: RetryConfig = field(default_factory=RetryConfig)
    retrieval: RetrievalConfig = field(default_factory=RetrievalConfig)
    orchestration: OrchestrationConfig = field(default_factory=OrchestrationConfig)
    agents: dict[str, AgentOverride] = field(default_factory=dict)
    web_search: WebSearchConfig = field(default_factory=WebSearchConfig)

    def normalized(self) -> dict[str, Any]:
        data = asdict(self)
        data["agents"] = {stage: asdict(o) for stage, o in self.agents.items()}
        return data


def _take(data: dict, section: str, cls, allowed: set[str]):
    raw = data.get(section, {})
    if not isinstance(raw, dict):
        raise ConfigError(f"config section {section!r} must be an object")
    unknown = set(raw) - allowed
    if unknown:
        raise ConfigError(f"unknown key {sorted(unknown)[0]!r} in config section {section!r}")
    return cls(**raw)


def config_from_dict(data: dict[str, Any]) -> EngineConfig:
    if not isinstance(data, dict):
        raise ConfigError("config root must be a JSON object")
    known = {"gateway", "retry", "retrieval", "orchestration", "agents", "prompts",
             "tools", "web_search"}
    unknown = set(data) - known
    if unknown:
        raise ConfigError(f"unknown top-level config key {sorted(unknown)[0]!r}")

    cfg = EngineConfig(
        gateway=_take(data, "gateway", GatewayConfig,
                      {"endpoint", "model_id", "evaluator_model_id", "temperature",
                       "max_output_tokens", "deadline_s", "max_in_flight"}),
        retry=_take(data, "retry", RetryConfig, {"max_attempts", "base_delay_ms"}),
        retrieval=_take(data, "retrieval", RetrievalConfig, {"chunk_size", "overlap", "k"}),
        orchestration=_take(data, "orchestration", OrchestrationConfig,
                            {"parallel_alerts_emergency", "max_tool_iterations",
                             "max_format_retries"}),
    )

    # "tools" wraps provider settings; "web_search" directly is also accepted.
    tools = data.get("tools", {})
    raw_ws = tools.get("web_search", data.get("web_search", {}))
    if isinstance(raw_ws, dict):
        unknown_ws = set(raw_ws) - {"mode", "fixture_path", "endpoint"}
        if unknown_ws:
            raise ConfigError(f"unknown key {sorted(unknown_ws)[0]!r} in web_search config")
        cfg.web_search = WebSearchConfig(**raw_ws)
    else:
        raise ConfigError("web_search config must be an object")

    # Per-stage agent overrides; the bare "prompts": {stage: path} spelling maps
    # onto AgentOverride.prompt.
    agents: dict[str, AgentOverride] = {}
    for stage, path in (data.get("prompts") or {}).items():
        if stage not in STAGES:
            raise ConfigError(f"prompts override for unknown stage {stage!r}")
        agents[stage] = AgentOverride(prompt=str(path))
    for stage, raw in (data.get("agents") or {}).items():
        if stage not in STAGES:
            raise ConfigError(f"agent override for unknown stage {stage!r}")
        if not isinstance(raw, dict):
            raise ConfigError(f"agents.{stage} must be an object")
        unknown_a = set(raw) - {"prompt", "tools"}
        if unknown_a:
            raise ConfigError(f"unknown key {sorted(unknown_a)[0]!r} in agents.{stage}")
        base = agents.get(stage, AgentOverride())
        agents[stage] = AgentOverride(
            prompt=raw.get("prompt", base.prompt),
            tools=list(raw["tools"]) if raw.get("tools") is not None else base.tools,
        )
    cfg.agents = agents

    validate_config(cfg)
    return cfg


def validate_config(cfg: EngineConfig) -> None:
    g, r, v, o = cfg.gateway, cfg.retry, cfg.retrieval, cfg.orchestration
    checks = [
        (g.temperature >= 0, "gateway.temperature must be >= 0"),
        (g.max_output_tokens >= 1, "gateway.max_output_tokens must be positive"),
        (g.deadline_s > 0, "gateway.deadline_s must be positive"),
        (g.max_in_flight >= 1, "gateway.max_in_flight must be positive"),
        (bool(g.endpoint), "gateway.endpoint must be non-empty"),
        (bool(g.model_id), "gateway.model_id must be non-empty"),
        (r.max_attempts >= 1, "retry.max_attempts must be positive"),
        (r.base_delay_ms >= 0, "retry.base_delay_ms must be >= 0"),
        (v.chunk_size >= 1, "retrieval.chunk_size must be positive"),
        (0 <= v.overlap < v.chunk_size,
         "retrieval.overlap must satisfy 0 <= overlap < chunk_size"),
        (v.k >= 1, "retrieval.k must be positive"),
        (o.max_tool_iterations >= 1, "orchestration.max_tool_iterations must be positive"),
        (o.max_format_retries >= 0, "orchestration.max_format_retries must be >= 0"),
    ]
    for ok, message in checks:
        if not ok:
            raise ConfigError(message)
    if cfg.web_search.mode not in ("fixture", "live"):
        raise ConfigError("web_search.mode must be 'fixture' or 'live'")
    if cfg.web_search.mode == "fixture" and not cfg.web_search.fixture_path:
        raise ConfigError("web_search.mode 'fixture' requires web_search.fixture_path")
    if cfg.web_search.mode == "live" and not cfg.web_search.endpoint:
        raise ConfigError("web_search.mode 'live' requires web_search.endpoint")


def load_config(path: str | Path) -> EngineConfig:
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"config file not found: {path}")
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from exc
    try:
        return config_from_dict(data)
    except TypeError as exc:
        raise ConfigError(f"config field error: {exc}") from exc
