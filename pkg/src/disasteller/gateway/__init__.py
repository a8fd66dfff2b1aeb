from disasteller.gateway.backends import (
    API_KEY_ENV,
    HttpBackend,
    MissingCredential,
    RecordingBackend,
    ScriptEntry,
    ScriptMiss,
    ScriptedBackend,
    GatewayTimeout,
    TransportError,
    load_script,
    record_transcript,
    transcript_entries,
    transcript_payload,
)
from disasteller.gateway.retry import RetryPolicy, default_retryable, with_retry
from disasteller.gateway.types import (
    GatewayError,
    ImagePart,
    MalformedResponse,
    Message,
    ModelRequest,
    ModelResponse,
    TextPart,
    ToolCall,
    decode_response,
    encode_request,
    encode_response,
    request_digest,
)

__all__ = [
    "API_KEY_ENV",
    "GatewayError",
    "GatewayTimeout",
    "HttpBackend",
    "ImagePart",
    "MalformedResponse",
    "Message",
    "MissingCredential",
    "ModelRequest",
    "ModelResponse",
    "RecordingBackend",
    "RetryPolicy",
    "ScriptEntry",
    "ScriptMiss",
    "ScriptedBackend",
    "TextPart",
    "ToolCall",
    "decode_response",
    "default_retryable",
    "encode_request",
    "encode_response",
    "load_script",
    "record_transcript",
    "request_digest",
    "transcript_entries",
    "transcript_payload",
    "with_retry",
]
