"""Append-only shared store through which agents publish intermediate outputs.

Keys are namespaced "<stage>.<artifact>" by convention. Writing an existing
key is an error, never an overwrite: a stage accidentally running twice should
fail loudly. Safe for concurrent writers and readers; the alerts and emergency
stages may run in parallel.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass, field
from datetime import datetime, timezone
from typing import Any, Iterable

from disasteller.errors import DisasTellerError

ENTRY_KINDS = ("text", "image-ref", "structured")


class BlackboardError(DisasTellerError):
    pass


class DuplicateKey(BlackboardError):
    """A key was put twice; entries are immutable once written."""


class MissingKey(BlackboardError):
    """Read of a key nothing has produced."""


def _utc_now_iso() -> str:
    return datetime.now(timezone.utc).isoformat()


@dataclass(frozen=True)
class BlackboardEntry:
    """One immutable intermediate output.

    ``content`` is a str for kind "text", an artifact name for "image-ref",
    and JSON-serializable data for "structured".
    """

    key: str
    producer: str
    kind: str
    content: Any
    sequence: int = -1
    created_at: str = field(default_factory=_utc_now_iso)

    def __post_init__(self) -> None:
        if self.kind not in ENTRY_KINDS:
            raise ValueError(f"unknown entry kind {self.kind!r}")

    def as_dict(self) -> dict[str, Any]:
        return {
            "key": self.key,
            "producer": self.producer,
            "kind": self.kind,
            "content": self.content,
            "sequence": self.sequence,
            "created_at": self.created_at,
        }


class Blackboard:
    """Keyed append-only store with strictly increasing sequence numbers."""

    def __init__(self) -> None:
        self._lock = threading.Lock()
        self._entries: dict[str, BlackboardEntry] = {}
        self._order: list[str] = []

    def put(self, key: str, producer: str, kind: str, content: Any) -> BlackboardEntry:
        """Append one entry. Raises DuplicateKey if ``key`` already exists."""
        entry = BlackboardEntry(key=key, producer=producer, kind=kind, content=content)
        with self._lock:
            return self._append_locked(entry)

    def put_many(self, entries: Iterable[BlackboardEntry]) -> list[BlackboardEntry]:
        """Atomically publish several entries: all become visible or none do.

        Used by stages so partially formed output can never leak to successors.
        """
        staged = list(entries)
        with self._lock:
            for e in staged:
                if e.key in self._entries:
                    raise DuplicateKey(f"blackboard key already present: {e.key!r}")
            dup = {e.key for e in staged}
            if len(dup) != len(staged):
                raise DuplicateKey("duplicate key within one publication batch")
            return [self._append_locked(e) for e in staged]

    def _append_locked(self, entry: BlackboardEntry) -> BlackboardEntry:
        if entry.key in self._entries:
            raise DuplicateKey(f"blackboard key already present: {entry.key!r}")
        stamped = BlackboardEntry(
            key=entry.key,
            producer=entry.producer,
            kind=entry.kind,
            content=entry.content,
            sequence=len(self._order),
            created_at=entry.created_at,
        )
        self._entries[stamped.key] = stamped
        self._order.append(stamped.key)
        return stamped

    def get(self, key: str) -> BlackboardEntry:
        with self._lock:
            try:
                return self._entries[key]
            except KeyError:
                raise MissingKey(f"no blackboard entry for key {key!r}") from None

    def has(self, key: str) -> bool:
        with self._lock:
            return key in self._entries

    def snapshot(self) -> list[BlackboardEntry]:
        """All entries in write (sequence) order."""
        with self._lock:
            return [self._entries[k] for k in self._order]

    def __len__(self) -> int:
        with self._lock:
            return len(self._order)
