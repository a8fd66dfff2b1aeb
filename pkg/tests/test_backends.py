import json
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer

import pytest

from disasteller.gateway.backends import (
    HttpBackend,
    MissingCredential,
    RecordingBackend,
    ScriptEntry,
    ScriptMiss,
    ScriptedBackend,
    TransportError,
    load_script,
    record_transcript,
)
from disasteller.gateway.retry import RetryPolicy, with_retry
from disasteller.gateway.types import (
    Message,
    ModelRequest,
    ModelResponse,
    request_digest,
)


def _request(stage="expert", user="hi"):
    return ModelRequest(
        model_id="m",
        messages=(Message.text("system", "s"), Message.text("user", user)),
        stage=stage,
    )


def _entry(stage, index, text):
    return ScriptEntry(stage=stage, index=index, response=ModelResponse(text=text))


# --- scripted backend -------------------------------------------------------

def test_scripted_positional_replay():
    backend = ScriptedBackend([_entry("expert", 0, "first"), _entry("expert", 1, "second")])
    assert backend.complete(_request()).text == "first"
    assert backend.complete(_request()).text == "second"


def test_scripted_exhausted_key_raises():
    backend = ScriptedBackend([_entry("expert", 0, "only")])
    backend.complete(_request())
    with pytest.raises(ScriptMiss):
        backend.complete(_request())


def test_scripted_stages_have_independent_counters():
    backend = ScriptedBackend([_entry("expert", 0, "e"), _entry("alerts", 0, "a")])
    assert backend.complete(_request(stage="alerts")).text == "a"
    assert backend.complete(_request(stage="expert")).text == "e"


def test_scripted_digest_mode():
    req = _request(user="specific")
    entry = ScriptEntry(stage="expert", index=0, response=ModelResponse(text="hit"),
                        request_digest=request_digest(req))
    backend = ScriptedBackend([entry], match="digest")
    assert backend.complete(req).text == "hit"
    with pytest.raises(ScriptMiss):
        backend.complete(req)  # consumed
    other = ScriptedBackend([entry], match="digest")
    with pytest.raises(ScriptMiss):
        other.complete(_request(user="different"))


def test_scripted_concurrent_consumption_is_atomic():
    n = 50
    backend = ScriptedBackend([_entry("expert", i, f"t{i}") for i in range(n)])
    seen, misses = [], []
    lock = threading.Lock()

    def worker():
        for _ in range(n // 5):
            try:
                r = backend.complete(_request())
                with lock:
                    seen.append(r.text)
            except ScriptMiss:
                with lock:
                    misses.append(1)

    threads = [threading.Thread(target=worker) for _ in range(5)]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    assert sorted(seen) == sorted(f"t{i}" for i in range(n))
    assert len(set(seen)) == n


# --- transcript record/replay ----------------------------------------------

def test_record_replay_round_trip(tmp_path):
    responses = [ModelResponse(text=f"r{i}") for i in range(9)]
    pairs = [(_request(stage="expert" if i < 5 else "alerts"), responses[i])
             for i in range(9)]
    path = record_transcript(pairs, tmp_path / "script.json")
    entries = load_script(path)
    assert len(entries) == 9
    replay = ScriptedBackend(entries)
    texts = [replay.complete(_request(stage="expert")).text for _ in range(5)]
    texts += [replay.complete(_request(stage="alerts")).text for _ in range(4)]
    assert texts == [f"r{i}" for i in range(9)]
    with pytest.raises(ScriptMiss):  # call 10 of a 9-entry script
        replay.complete(_request(stage="alerts"))


def test_record_empty_run(tmp_path):
    path = record_transcript([], tmp_path / "empty.json")
    assert load_script(path) == []
    ScriptedBackend([])  # replay of zero calls succeeds


def test_recording_backend_captures_in_order():
    inner = ScriptedBackend([_entry("expert", 0, "a"), _entry("expert", 1, "b")])
    recorder = RecordingBackend(inner)
    recorder.complete(_request())
    recorder.complete(_request())
    assert recorder.call_count == 2
    assert [r.text for _, r in recorder.pairs()] == ["a", "b"]


# --- HTTP backend against a local stub --------------------------------------

class _StubHandler(BaseHTTPRequestHandler):
    behavior = {"status": 200, "fail_times": 0, "payload": None}
    calls = []

    def do_POST(self):
        length = int(self.headers["Content-Length"])
        body = json.loads(self.rfile.read(length))
        type(self).calls.append({"path": self.path, "body": body,
                                 "auth": self.headers.get("Authorization")})
        cfg = type(self).behavior
        if cfg["fail_times"] > 0:
            cfg["fail_times"] -= 1
            self.send_response(503)
            self.end_headers()
            return
        self.send_response(cfg["status"])
        self.send_header("Content-Type", "application/json")
        self.end_headers()
        payload = cfg["payload"] or {
            "choices": [{"message": {"content": "OK"}, "finish_reason": "stop"}],
            "usage": {"prompt_tokens": 3, "completion_tokens": 1},
        }
        self.wfile.write(json.dumps(payload).encode())

    def log_message(self, *args):  # keep test output quiet
        pass


@pytest.fixture
def stub_server():
    _StubHandler.behavior = {"status": 200, "fail_times": 0, "payload": None}
    _StubHandler.calls = []
    server = ThreadingHTTPServer(("127.0.0.1", 0), _StubHandler)
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    yield f"http://127.0.0.1:{server.server_address[1]}"
    server.shutdown()


def test_http_echo_through_wire_mapping(stub_server):
    backend = HttpBackend(stub_server, api_key="test-key-123")
    response = backend.complete(_request())
    assert response.text == "OK"
    assert response.finish_reason == "stop"
    assert response.usage["prompt_tokens"] == 3
    call = _StubHandler.calls[0]
    assert call["path"] == "/chat/completions"
    assert call["auth"] == "Bearer test-key-123"


def test_http_status_maps_to_transport(stub_server):
    backend = HttpBackend(stub_server, api_key="k")
    _StubHandler.behavior["status"] = 401
    with pytest.raises(TransportError) as excinfo:
        backend.complete(_request())
    assert excinfo.value.status == 401


def test_missing_credential(monkeypatch):
    monkeypatch.delenv("DISASTELLER_API_KEY", raising=False)
    with pytest.raises(MissingCredential):
        HttpBackend("http://localhost:1")


def test_key_from_environment(monkeypatch, stub_server):
    monkeypatch.setenv("DISASTELLER_API_KEY", "env-secret")
    backend = HttpBackend(stub_server)
    backend.complete(_request())
    assert _StubHandler.calls[0]["auth"] == "Bearer env-secret"


# --- retry policy ------------------------------------------------------------

class _FlakyBackend:
    def __init__(self, failures, error):
        self.failures = failures
        self.error = error
        self.attempts = 0

    def complete(self, request):
        self.attempts += 1
        if self.attempts <= self.failures:
            raise self.error
        return ModelResponse(text="done")


def test_retry_succeeds_on_third_attempt():
    backend = _FlakyBackend(2, TransportError("boom", status=503))
    sleeps = []
    response = with_retry(backend, _request(),
                          RetryPolicy(max_attempts=3, base_delay=0.1),
                          sleep=sleeps.append)
    assert response.text == "done"
    assert backend.attempts == 3
    assert sleeps == [0.1, 0.2]  # base_delay * 2**attempt


def test_4xx_never_retried():
    backend = _FlakyBackend(5, TransportError("denied", status=401))
    with pytest.raises(TransportError):
        with_retry(backend, _request(), RetryPolicy(max_attempts=3, base_delay=0.01),
                   sleep=lambda s: None)
    assert backend.attempts == 1


def test_script_miss_never_retried():
    backend = ScriptedBackend([])
    with pytest.raises(ScriptMiss):
        with_retry(backend, _request(), RetryPolicy(max_attempts=5, base_delay=0.01),
                   sleep=lambda s: None)


def test_single_attempt_boundary():
    backend = _FlakyBackend(5, TransportError("down", status=None))
    with pytest.raises(TransportError):
        with_retry(backend, _request(), RetryPolicy(max_attempts=1, base_delay=0.01),
                   sleep=lambda s: None)
    assert backend.attempts == 1


def test_http_5xx_retries_through_stub(stub_server):
    _StubHandler.behavior["fail_times"] = 2
    backend = HttpBackend(stub_server, api_key="k")
    response = with_retry(backend, _request(),
                          RetryPolicy(max_attempts=3, base_delay=0.0),
                          sleep=lambda s: None)
    assert response.text == "OK"
    assert len(_StubHandler.calls) == 3


# --- secrecy -----------------------------------------------------------------

def test_credential_never_in_transcript(tmp_path, stub_server, monkeypatch):
    secret = "super-secret-key-98765"
    monkeypatch.setenv("DISASTELLER_API_KEY", secret)
    backend = RecordingBackend(HttpBackend(stub_server))
    backend.complete(_request())
    path = record_transcript(backend.pairs(), tmp_path / "t.json")
    assert secret not in path.read_text()


# --- deadline and payload bounding -------------------------------------------

class _SlowHandler(BaseHTTPRequestHandler):
    def do_POST(self):
        import time as _time
        _time.sleep(0.6)
        self.send_response(200)
        self.send_header("Content-Type", "application/json")
        self.end_headers()
        self.wfile.write(b'{"choices":[{"message":{"content":"late"}}]}')

    def log_message(self, *args):
        pass


def test_deadline_exceeded_maps_to_timeout():
    from disasteller.gateway.backends import GatewayTimeout
    server = ThreadingHTTPServer(("127.0.0.1", 0), _SlowHandler)
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    try:
        backend = HttpBackend(f"http://127.0.0.1:{server.server_address[1]}",
                              api_key="k", deadline_s=0.2)
        with pytest.raises(GatewayTimeout):
            backend.complete(_request())
    finally:
        server.shutdown()


def test_oversized_images_downscaled_before_upload():
    import base64
    import io
    from PIL import Image
    from disasteller.gateway.backends import MAX_IMAGE_SIDE, _bound_images
    from disasteller.gateway.types import ImagePart, Message, TextPart

    buf = io.BytesIO()
    Image.new("RGB", (3000, 1500), (9, 9, 9)).save(buf, format="PNG")
    big = ImagePart(media_type="image/png",
                    base64_data=base64.b64encode(buf.getvalue()).decode("ascii"))
    request = ModelRequest(
        model_id="m",
        messages=(Message.text("system", "s"),
                  Message(role="user", parts=(TextPart("look"), big))),
    )
    bounded = _bound_images(request)
    part = [p for p in bounded.messages[1].parts if isinstance(p, ImagePart)][0]
    with Image.open(io.BytesIO(base64.b64decode(part.base64_data))) as im:
        assert max(im.size) <= MAX_IMAGE_SIDE
        assert im.size == (2048, 1024)  # aspect preserved

    small_buf = io.BytesIO()
    Image.new("RGB", (64, 64), (1, 1, 1)).save(small_buf, format="PNG")
    small = ImagePart(media_type="image/png",
                      base64_data=base64.b64encode(small_buf.getvalue()).decode("ascii"))
    request_small = ModelRequest(
        model_id="m",
        messages=(Message.text("system", "s"),
                  Message(role="user", parts=(small,))),
    )
    assert _bound_images(request_small) is request_small  # untouched


def test_duplicate_script_match_keys_rejected():
    with pytest.raises(ValueError, match="duplicate script match key"):
        ScriptedBackend([_entry("expert", 0, "a"), _entry("expert", 0, "b")])
