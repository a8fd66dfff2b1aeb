"""Request/response types for vision-language backends, plus the wire mapping.

The wire protocol is OpenAI-compatible chat completions: messages carry text
and base64 image-URL content parts, tools use the function-call convention.
Encode/decode are exact inverses for anything representable on the wire.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from typing import Any, Sequence

from disasteller.errors import DisasTellerError

ROLES = ("system", "user", "assistant", "tool")
FINISH_REASONS = ("stop", "tool_call", "length", "error")


class GatewayError(DisasTellerError):
    pass


class MalformedResponse(GatewayError):
    """Wire payload could not be mapped into a ModelResponse."""


@dataclass(frozen=True)
class TextPart:
    text: str


@dataclass(frozen=True)
class ImagePart:
    media_type: str   # "image/png" or "image/jpeg"
    base64_data: str


Part = TextPart | ImagePart


@dataclass(frozen=True)
class ToolCall:
    call_id: str
    tool_id: str
    arguments: dict[str, Any]


@dataclass(frozen=True)
class Message:
    role: str
    parts: tuple[Part, ...]
    tool_call_id: str | None = None          # set on role="tool" result messages
    tool_calls: tuple[ToolCall, ...] = ()    # set on assistant messages requesting tools

    def __post_init__(self) -> None:
        if self.role not in ROLES:
            raise ValueError(f"unknown role {self.role!r}")
        if self.tool_calls and self.role != "assistant":
            raise ValueError("only assistant messages may carry tool calls")

    @classmethod
    def text(cls, role: str, text: str) -> "Message":
        return cls(role=role, parts=(TextPart(text),))


@dataclass(frozen=True)
class ModelRequest:
    """One completion request. First message must be the system prompt and
    image parts may only appear in user messages."""

    model_id: str
    messages: tuple[Message, ...]
    tool_specs: Sequence[Any] = ()   # objects exposing .wire_format()
    temperature: float = 0.7
    max_output_tokens: int = 2048
    stage: str | None = None         # orchestration label; scripted match key

    def __post_init__(self) -> None:
        if not self.messages:
            raise ValueError("request needs at least one message")
        if self.messages[0].role != "system":
            raise ValueError("first message must have role 'system'")
        if self.temperature < 0:
            raise ValueError("temperature must be >= 0")
        if self.max_output_tokens < 1:
            raise ValueError("max_output_tokens must be positive")
        for m in self.messages:
            if m.role != "user" and any(isinstance(p, ImagePart) for p in m.parts):
                raise ValueError("image parts are only allowed in user messages")


@dataclass(frozen=True)
class ModelResponse:
    text: str = ""
    tool_calls: tuple[ToolCall, ...] = ()
    finish_reason: str = "stop"
    usage: dict[str, int] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.finish_reason not in FINISH_REASONS:
            raise ValueError(f"unknown finish_reason {self.finish_reason!r}")
        if (self.finish_reason == "tool_call") != bool(self.tool_calls):
            raise ValueError("finish_reason 'tool_call' iff tool_calls non-empty")


def encode_request(request: ModelRequest) -> dict[str, Any]:
    """ModelRequest -> chat-completions request body."""
    messages: list[dict[str, Any]] = []
    for m in request.messages:
        if len(m.parts) == 1 and isinstance(m.parts[0], TextPart):
            content: Any = m.parts[0].text
        else:
            content = []
            for p in m.parts:
                if isinstance(p, TextPart):
                    content.append({"type": "text", "text": p.text})
                else:
                    url = f"data:{p.media_type};base64,{p.base64_data}"
                    content.append({"type": "image_url", "image_url": {"url": url}})
        msg: dict[str, Any] = {"role": m.role, "content": content}
        if m.tool_call_id is not None:
            msg["tool_call_id"] = m.tool_call_id
        if m.tool_calls:
            msg["tool_calls"] = [
                {
                    "id": tc.call_id,
                    "type": "function",
                    "function": {"name": tc.tool_id, "arguments": json.dumps(tc.arguments)},
                }
                for tc in m.tool_calls
            ]
        messages.append(msg)
    body: dict[str, Any] = {
        "model": request.model_id,
        "messages": messages,
        "temperature": request.temperature,
        "max_tokens": request.max_output_tokens,
    }
    if request.tool_specs:
        body["tools"] = [spec.wire_format() for spec in request.tool_specs]
    return body


_WIRE_FINISH = {"stop": "stop", "tool_calls": "tool_call", "length": "length", "error": "error",
                "tool_call": "tool_call"}


def encode_response(response: ModelResponse) -> dict[str, Any]:
    """ModelResponse -> chat-completions response body (single choice)."""
    message: dict[str, Any] = {"role": "assistant", "content": response.text}
    if response.tool_calls:
        message["tool_calls"] = [
            {
                "id": tc.call_id,
                "type": "function",
                "function": {"name": tc.tool_id, "arguments": json.dumps(tc.arguments)},
            }
            for tc in response.tool_calls
        ]
    finish = "tool_calls" if response.finish_reason == "tool_call" else response.finish_reason
    return {
        "choices": [{"index": 0, "message": message, "finish_reason": finish}],
        "usage": dict(response.usage),
    }


def decode_response(payload: dict[str, Any]) -> ModelResponse:
    """chat-completions response body -> ModelResponse.

    Raises MalformedResponse on anything that does not fit the schema.
    """
    try:
        choices = payload["choices"]
        if not isinstance(choices, list) or not choices:
            raise MalformedResponse("response has no choices")
        choice = choices[0]
        message = choice.get("message") or {}
        text = message.get("content") or ""
        if not isinstance(text, str):
            raise MalformedResponse("message content is not text")
        raw_calls = message.get("tool_calls") or []
        tool_calls = []
        for rc in raw_calls:
            fn = rc.get("function") or {}
            try:
                arguments = json.loads(fn.get("arguments") or "{}")
            except json.JSONDecodeError as exc:
                raise MalformedResponse(f"tool arguments are not JSON: {exc}") from exc
            if not isinstance(arguments, dict):
                raise MalformedResponse("tool arguments must decode to an object")
            tool_calls.append(
                ToolCall(call_id=str(rc.get("id", "")), tool_id=str(fn.get("name", "")),
                         arguments=arguments)
            )
        finish_raw = choice.get("finish_reason") or ("tool_calls" if tool_calls else "stop")
        finish = _WIRE_FINISH.get(finish_raw)
        if finish is None:
            raise MalformedResponse(f"unknown finish_reason {finish_raw!r}")
        usage = payload.get("usage") or {}
        if not isinstance(usage, dict):
            raise MalformedResponse("usage is not an object")
        return ModelResponse(
            text=text,
            tool_calls=tuple(tool_calls),
            finish_reason=finish,
            usage={str(k): int(v) for k, v in usage.items()},
        )
    except MalformedResponse:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise MalformedResponse(f"unparsable wire payload: {exc}") from exc


def request_digest(request: ModelRequest) -> str:
    """Stable content hash of a request; used by strict script matching."""
    body = encode_request(request)
    body["stage"] = request.stage
    canonical = json.dumps(body, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()
