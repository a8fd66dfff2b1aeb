"""Model backends: live OpenAI-compatible HTTP, deterministic scripted replay,
and a recording wrapper that turns any run into a replayable script file.

Script files are JSON arrays of
``{"stage": str, "index": int, "response": {...}, "request_digest": str|null}``
matched positionally by (stage, invocation index), or strictly by request
digest when the scripted backend is built with ``match="digest"``.
"""

from __future__ import annotations

import base64
import io
import json
import logging
import os
import threading
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Iterable

import requests
from PIL import Image

from disasteller.gateway.types import (
    GatewayError,
    ImagePart,
    MalformedResponse,
    Message,
    ModelRequest,
    ModelResponse,
    ToolCall,
    decode_response,
    encode_request,
    request_digest,
)

logger = logging.getLogger(__name__)

API_KEY_ENV = "DISASTELLER_API_KEY"
MAX_IMAGE_SIDE = 2048  # uploads are bounded; larger images are downscaled


class GatewayTimeout(GatewayError):
    """Deadline exceeded while waiting for the backend."""


class TransportError(GatewayError):
    """Connection or HTTP status failure. ``status`` is None for connection errors."""

    def __init__(self, message: str, status: int | None = None):
        super().__init__(message)
        self.status = status


class ScriptMiss(GatewayError):
    """Scripted backend has no (remaining) entry for this call."""


class MissingCredential(GatewayError):
    """Live backend configured without an API key."""


class HttpBackend:
    """OpenAI-compatible chat-completions client.

    The credential comes from the DISASTELLER_API_KEY environment variable
    unless passed explicitly; it is never logged or persisted. Concurrency can
    be bounded with ``max_in_flight``.
    """

    def __init__(
        self,
        endpoint: str,
        api_key: str | None = None,
        deadline_s: float = 120.0,
        max_in_flight: int | None = None,
    ) -> None:
        self.endpoint = endpoint.rstrip("/")
        key = api_key if api_key is not None else os.environ.get(API_KEY_ENV)
        if not key:
            raise MissingCredential(f"no API key: set {API_KEY_ENV} or pass api_key")
        self._api_key = key
        self.deadline_s = deadline_s
        self._gate = threading.Semaphore(max_in_flight) if max_in_flight else None

    def complete(self, request: ModelRequest) -> ModelResponse:
        body = encode_request(_bound_images(request))
        url = f"{self.endpoint}/chat/completions"
        headers = {
            "Authorization": f"Bearer {self._api_key}",
            "Content-Type": "application/json",
        }
        if self._gate:
            self._gate.acquire()
        try:
            logger.debug("POST %s stage=%s", url, request.stage)
            resp = requests.post(url, json=body, headers=headers, timeout=self.deadline_s)
        except requests.Timeout as exc:
            raise GatewayTimeout(f"deadline of {self.deadline_s}s exceeded") from exc
        except requests.RequestException as exc:
            raise TransportError(f"connection failure: {exc}") from exc
        finally:
            if self._gate:
                self._gate.release()
        if resp.status_code != 200:
            raise TransportError(
                f"backend returned HTTP {resp.status_code}", status=resp.status_code
            )
        try:
            payload = resp.json()
        except ValueError as exc:
            raise MalformedResponse(f"response body is not JSON: {exc}") from exc
        return decode_response(payload)


def _bound_images(request: ModelRequest) -> ModelRequest:
    """Re-encode any image part larger than MAX_IMAGE_SIDE px (longest side)."""
    changed = False
    new_messages = []
    for m in request.messages:
        parts = []
        for p in m.parts:
            if isinstance(p, ImagePart):
                shrunk = _shrink_part(p)
                changed = changed or shrunk is not p
                parts.append(shrunk)
            else:
                parts.append(p)
        new_messages.append(Message(role=m.role, parts=tuple(parts),
                                    tool_call_id=m.tool_call_id, tool_calls=m.tool_calls))
    if not changed:
        return request
    return ModelRequest(
        model_id=request.model_id,
        messages=tuple(new_messages),
        tool_specs=request.tool_specs,
        temperature=request.temperature,
        max_output_tokens=request.max_output_tokens,
        stage=request.stage,
    )


def _shrink_part(part: ImagePart) -> ImagePart:
    raw = base64.b64decode(part.base64_data)
    with Image.open(io.BytesIO(raw)) as im:
        if max(im.size) <= MAX_IMAGE_SIDE:
            return part
        scale = MAX_IMAGE_SIDE / max(im.size)
        new_size = (max(1, round(im.width * scale)), max(1, round(im.height * scale)))
        resized = im.convert("RGB").resize(new_size, Image.LANCZOS)
    buf = io.BytesIO()
    resized.save(buf, format="PNG")
    return ImagePart(media_type="image/png",
                     base64_data=base64.b64encode(buf.getvalue()).decode("ascii"))


@dataclass(frozen=True)
class ScriptEntry:
    stage: str
    index: int
    response: ModelResponse
    request_digest: str | None = None


class ScriptedBackend:
    """Replays canned responses; a pure function of (script, call order).

    Positional mode matches on (request.stage, per-stage invocation index) and
    each entry is consumed exactly once. Digest mode matches on the request's
    content hash instead, for stricter fixtures. Consumption is atomic, so
    concurrent stages cannot double-spend an entry.
    """

    def __init__(self, entries: Iterable[ScriptEntry], match: str = "positional") -> None:
        if match not in ("positional", "digest"):
            raise ValueError(f"unknown match mode {match!r}")
        self.match = match
        self._lock = threading.Lock()
        self._by_position: dict[tuple[str, int], ModelResponse] = {}
        self._by_digest: dict[str, list[ModelResponse]] = {}
        self._counters: dict[str, int] = {}
        for e in entries:
            key = (e.stage, e.index)
            if key in self._by_position:
                raise ValueError(f"duplicate script match key {key}")
            self._by_position[key] = e.response
            if e.request_digest:
                self._by_digest.setdefault(e.request_digest, []).append(e.response)

    @property
    def remaining(self) -> int:
        with self._lock:
            return len(self._by_position)

    def complete(self, request: ModelRequest) -> ModelResponse:
        if self.match == "digest":
            digest = request_digest(request)
            with self._lock:
                queue = self._by_digest.get(digest)
                if not queue:
                    raise ScriptMiss(f"no script entry for request digest {digest[:12]}…")
                return queue.pop(0)
        stage = request.stage or ""
        with self._lock:
            index = self._counters.get(stage, 0)
            self._counters[stage] = index + 1
            response = self._by_position.pop((stage, index), None)
        if response is None:
            raise ScriptMiss(f"no script entry for stage {stage!r} call #{index}")
        return response


class RecordingBackend:
    """Wraps any backend and captures (request, response) pairs per stage."""

    def __init__(self, inner: Any) -> None:
        self.inner = inner
        self._lock = threading.Lock()
        self._pairs: list[tuple[ModelRequest, ModelResponse]] = []

    def complete(self, request: ModelRequest) -> ModelResponse:
        response = self.inner.complete(request)
        with self._lock:
            self._pairs.append((request, response))
        return response

    def pairs(self) -> list[tuple[ModelRequest, ModelResponse]]:
        with self._lock:
            return list(self._pairs)

    @property
    def call_count(self) -> int:
        with self._lock:
            return len(self._pairs)


def _response_to_json(response: ModelResponse) -> dict[str, Any]:
    return {
        "text": response.text,
        "tool_calls": [
            {"call_id": tc.call_id, "tool_id": tc.tool_id, "arguments": tc.arguments}
            for tc in response.tool_calls
        ],
        "finish_reason": response.finish_reason,
        "usage": dict(response.usage),
    }


def _response_from_json(data: dict[str, Any]) -> ModelResponse:
    try:
        calls = tuple(
            ToolCall(
                call_id=str(rc.get("call_id", "")),
                tool_id=str(rc["tool_id"]),
                arguments=dict(rc.get("arguments", {})),
            )
            for rc in data.get("tool_calls", [])
        )
        return ModelResponse(
            text=str(data.get("text", "")),
            tool_calls=calls,
            finish_reason=str(data.get("finish_reason", "tool_call" if calls else "stop")),
            usage={str(k): int(v) for k, v in (data.get("usage") or {}).items()},
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise MalformedResponse(f"bad script response entry: {exc}") from exc


def transcript_entries(
    pairs: Iterable[tuple[ModelRequest, ModelResponse]]
) -> list[ScriptEntry]:
    """Assign per-stage invocation indices to recorded pairs, in call order."""
    counters: dict[str, int] = {}
    entries: list[ScriptEntry] = []
    for request, response in pairs:
        stage = request.stage or ""
        index = counters.get(stage, 0)
        counters[stage] = index + 1
        entries.append(
            ScriptEntry(
                stage=stage,
                index=index,
                response=response,
                request_digest=request_digest(request),
            )
        )
    return entries


def transcript_payload(
    pairs: Iterable[tuple[ModelRequest, ModelResponse]]
) -> list[dict[str, Any]]:
    """JSON-ready script entries for the recorded pairs, in a stable order
    even when stages ran concurrently."""
    entries = transcript_entries(pairs)
    entries.sort(key=lambda e: (e.stage, e.index))
    return [
        {
            "stage": e.stage,
            "index": e.index,
            "response": _response_to_json(e.response),
            "request_digest": e.request_digest,
        }
        for e in entries
    ]


def record_transcript(
    pairs: Iterable[tuple[ModelRequest, ModelResponse]], path: str | Path
) -> Path:
    """Write the script file that replays this run. Credentials never appear
    here: only stage labels, indices, content digests, and responses."""
    payload = transcript_payload(pairs)
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(payload, indent=2) + "\n", encoding="utf-8")
    return path


def load_script(path: str | Path) -> list[ScriptEntry]:
    """Load a script file; raises MalformedResponse on schema problems."""
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise MalformedResponse(f"script file is not JSON: {exc}") from exc
    if not isinstance(data, list):
        raise MalformedResponse("script file must be a JSON array")
    entries = []
    for item in data:
        if not isinstance(item, dict) or "stage" not in item or "index" not in item:
            raise MalformedResponse("script entries need 'stage' and 'index'")
        entries.append(
            ScriptEntry(
                stage=str(item["stage"]),
                index=int(item["index"]),
                response=_response_from_json(item.get("response") or {}),
                request_digest=item.get("request_digest"),
            )
        )
    return entries
