import json

import pytest

from disasteller.config import (
    ConfigError,
    EngineConfig,
    config_from_dict,
    load_config,
)


def _base():
    return {"tools": {"web_search": {"mode": "fixture", "fixture_path": "/tmp/f.json"}}}


def test_defaults():
    cfg = config_from_dict(_base())
    assert cfg.gateway.temperature == 0.7
    assert cfg.gateway.deadline_s == 120.0
    assert cfg.retry.max_attempts == 3
    assert cfg.retrieval.chunk_size == 300
    assert cfg.retrieval.overlap == 50
    assert cfg.orchestration.max_tool_iterations == 8
    assert cfg.orchestration.max_format_retries == 2
    assert cfg.orchestration.parallel_alerts_emergency is True


def test_unknown_top_level_key_rejected():
    data = _base()
    data["gatway"] = {}
    with pytest.raises(ConfigError, match="gatway"):
        config_from_dict(data)


def test_unknown_section_key_rejected():
    data = _base()
    data["gateway"] = {"temprature": 0.5}
    with pytest.raises(ConfigError, match="temprature"):
        config_from_dict(data)


@pytest.mark.parametrize("section,key,value,needle", [
    ("gateway", "temperature", -0.1, "temperature"),
    ("gateway", "max_output_tokens", 0, "max_output_tokens"),
    ("gateway", "deadline_s", 0, "deadline_s"),
    ("gateway", "max_in_flight", 0, "max_in_flight"),
    ("retry", "max_attempts", 0, "max_attempts"),
    ("retrieval", "chunk_size", 0, "chunk_size"),
    ("retrieval", "k", 0, "retrieval.k"),
    ("orchestration", "max_tool_iterations", 0, "max_tool_iterations"),
    ("orchestration", "max_format_retries", -1, "max_format_retries"),
])
def test_numeric_validation(section, key, value, needle):
    data = _base()
    data[section] = {key: value}
    with pytest.raises(ConfigError, match=needle):
        config_from_dict(data)


def test_overlap_must_be_below_chunk_size():
    data = _base()
    data["retrieval"] = {"chunk_size": 100, "overlap": 100}
    with pytest.raises(ConfigError, match="overlap"):
        config_from_dict(data)


def test_fixture_mode_requires_path():
    with pytest.raises(ConfigError, match="fixture_path"):
        config_from_dict({"tools": {"web_search": {"mode": "fixture"}}})


def test_live_mode_requires_endpoint():
    with pytest.raises(ConfigError, match="endpoint"):
        config_from_dict({"tools": {"web_search": {"mode": "live"}}})


def test_prompts_spelling_maps_to_agent_override():
    data = _base()
    data["prompts"] = {"expert": "/tmp/expert.txt"}
    cfg = config_from_dict(data)
    assert cfg.agents["expert"].prompt == "/tmp/expert.txt"
    assert cfg.agents["expert"].tools is None


def test_agents_override_merges_with_prompts():
    data = _base()
    data["prompts"] = {"assignment": "/tmp/a.txt"}
    data["agents"] = {"assignment": {"tools": []}}
    cfg = config_from_dict(data)
    assert cfg.agents["assignment"].prompt == "/tmp/a.txt"
    assert cfg.agents["assignment"].tools == []


def test_unknown_stage_rejected():
    data = _base()
    data["agents"] = {"publicity": {}}
    with pytest.raises(ConfigError, match="publicity"):
        config_from_dict(data)


def test_normalized_round_trips_through_from_dict():
    data = _base()
    data["gateway"] = {"temperature": 0.2, "model_id": "local-model"}
    cfg = config_from_dict(data)
    again = config_from_dict({
        "gateway": cfg.normalized()["gateway"],
        "retry": cfg.normalized()["retry"],
        "retrieval": cfg.normalized()["retrieval"],
        "orchestration": cfg.normalized()["orchestration"],
        "web_search": cfg.normalized()["web_search"],
    })
    assert again == cfg


def test_load_config_file_errors(tmp_path):
    with pytest.raises(ConfigError, match="not found"):
        load_config(tmp_path / "none.json")
    bad = tmp_path / "bad.json"
    bad.write_text("{oops")
    with pytest.raises(ConfigError, match="not valid JSON"):
        load_config(bad)
    wrong_type = tmp_path / "w.json"
    wrong_type.write_text(json.dumps({"gateway": {"temperature": "hot"}}))
    with pytest.raises(ConfigError):
        load_config(wrong_type)


def test_default_engine_config_prefers_fixture_mode():
    cfg = EngineConfig()
    assert cfg.web_search.mode == "fixture"  # fixture-first: CI never needs the network
