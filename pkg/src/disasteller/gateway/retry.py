"""Retry wrapper for flaky transports: exponential backoff, bounded attempts."""

from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field
from typing import Any, Callable

from disasteller.gateway.backends import GatewayTimeout, TransportError
from disasteller.gateway.types import GatewayError, ModelRequest, ModelResponse

logger = logging.getLogger(__name__)


def default_retryable(error: Exception) -> bool:
    """Timeouts and 5xx/connection-level transport failures retry; nothing else.

    4xx statuses and script misses are deterministic and never retried.
    """
    if isinstance(error, GatewayTimeout):
        return True
    if isinstance(error, TransportError):
        return error.status is None or error.status >= 500
    return False


@dataclass(frozen=True)
class RetryPolicy:
    max_attempts: int = 3
    base_delay: float = 0.25           # seconds; delay = base_delay * 2**attempt
    retryable: Callable[[Exception], bool] = field(default=default_retryable)

    def __post_init__(self) -> None:
        if self.max_attempts < 1:
            raise ValueError("max_attempts must be >= 1")


def with_retry(
    backend: Any,
    request: ModelRequest,
    policy: RetryPolicy,
    sleep: Callable[[float], None] = time.sleep,
) -> ModelResponse:
    """Call ``backend.complete`` up to ``policy.max_attempts`` times.

    Returns the first success; re-raises the final error after exhaustion.
    """
    last: Exception | None = None
    for attempt in range(policy.max_attempts):
        try:
            return backend.complete(request)
        except GatewayError as exc:
            last = exc
            if not policy.retryable(exc) or attempt == policy.max_attempts - 1:
                raise
            delay = policy.base_delay * (2 ** attempt)
            logger.warning("gateway attempt %d failed (%s); retrying in %.2fs",
                           attempt + 1, exc, delay)
            sleep(delay)
    raise last if last else RuntimeError("unreachable")  # pragma: no cover
