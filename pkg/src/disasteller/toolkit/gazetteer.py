"""Location name -> map pixel lookup.

The model supplies names and grades only; geometry always comes from this
explicit gazetteer. Matching is exact after normalization (lowercase, collapse
whitespace, strip punctuation) against canonical names first, then aliases.
A miss is an error, never a guess.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

from disasteller.errors import DisasTellerError
from disasteller.toolkit.normalize import normalize_phrase


class GazetteerError(DisasTellerError):
    pass


class UnresolvedLocation(GazetteerError):
    pass


@dataclass(frozen=True)
class GazetteerEntry:
    name: str
    aliases: tuple[str, ...]
    x: int
    y: int


class Gazetteer:
    def __init__(self, entries: list[GazetteerEntry]):
        self.entries = tuple(entries)
        self._canonical: dict[str, GazetteerEntry] = {}
        self._aliases: dict[str, GazetteerEntry] = {}
        for entry in entries:
            key = normalize_phrase(entry.name)
            if key in self._canonical:
                raise GazetteerError(f"duplicate canonical name after normalization: {entry.name!r}")
            self._canonical[key] = entry
        for entry in entries:
            for alias in entry.aliases:
                self._aliases.setdefault(normalize_phrase(alias), entry)

    @classmethod
    def from_file(cls, path: str | Path) -> "Gazetteer":
        try:
            data = json.loads(Path(path).read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise GazetteerError(f"gazetteer is not valid JSON: {exc}") from exc
        if not isinstance(data, list):
            raise GazetteerError("gazetteer must be a JSON array")
        entries = []
        for i, raw in enumerate(data):
            try:
                entries.append(
                    GazetteerEntry(
                        name=str(raw["name"]),
                        aliases=tuple(str(a) for a in raw.get("aliases", [])),
                        x=int(raw["x"]),
                        y=int(raw["y"]),
                    )
                )
            except (KeyError, TypeError, ValueError) as exc:
                raise GazetteerError(f"gazetteer entry {i} malformed: {exc}") from exc
        return cls(entries)

    def resolve(self, name: str) -> tuple[int, int]:
        key = normalize_phrase(name)
        entry = self._canonical.get(key) or self._aliases.get(key)
        if entry is None:
            raise UnresolvedLocation(f"no gazetteer match for {name!r}")
        return entry.x, entry.y


def resolve_location(gazetteer: Gazetteer, name: str) -> tuple[int, int]:
    return gazetteer.resolve(name)
