"""Web search behind a provider interface: a live HTTP endpoint or a local
fixture corpus. CI and the test suite only ever touch the fixture provider."""

from __future__ import annotations

import json
import logging
import os
from dataclasses import dataclass
from pathlib import Path

import requests

from disasteller.errors import DisasTellerError
from disasteller.toolkit.normalize import normalize_phrase

logger = logging.getLogger(__name__)

SEARCH_KEY_ENV = "DISASTELLER_SEARCH_KEY"


class WebSearchError(DisasTellerError):
    pass


class ProviderUnavailable(WebSearchError):
    """Live provider could not be reached or answered with an error."""


class NoFixture(WebSearchError):
    """Fixture provider has no entry for this query (distinct from an empty
    result list, which a fixture may legitimately contain)."""


@dataclass(frozen=True)
class SearchResult:
    title: str
    url: str
    snippet: str

    def as_dict(self) -> dict[str, str]:
        return {"title": self.title, "url": self.url, "snippet": self.snippet}


class FixtureSearchProvider:
    """Canned results keyed by normalized query; fully deterministic."""

    def __init__(self, corpus: dict[str, list[dict[str, str]]]):
        self._corpus = {normalize_phrase(q): results for q, results in corpus.items()}

    @classmethod
    def from_file(cls, path: str | Path) -> "FixtureSearchProvider":
        data = json.loads(Path(path).read_text(encoding="utf-8"))
        if not isinstance(data, dict):
            raise WebSearchError("web-search fixture must be a JSON object")
        return cls(data)

    def search(self, query: str, k: int) -> list[SearchResult]:
        key = normalize_phrase(query)
        if key not in self._corpus:
            raise NoFixture(f"no fixture entry for query {query!r}")
        results = self._corpus[key][:k]
        return [SearchResult(r.get("title", ""), r.get("url", ""), r.get("snippet", ""))
                for r in results]


class LiveSearchProvider:
    """GET <endpoint>?q=...&k=... expecting a JSON array of result objects.
    Bearer token from DISASTELLER_SEARCH_KEY when present."""

    def __init__(self, endpoint: str, timeout_s: float = 30.0):
        self.endpoint = endpoint
        self.timeout_s = timeout_s

    def search(self, query: str, k: int) -> list[SearchResult]:
        headers = {}
        key = os.environ.get(SEARCH_KEY_ENV)
        if key:
            headers["Authorization"] = f"Bearer {key}"
        try:
            resp = requests.get(
                self.endpoint, params={"q": query, "k": k},
                headers=headers, timeout=self.timeout_s,
            )
        except requests.RequestException as exc:
            raise ProviderUnavailable(f"search endpoint unreachable: {exc}") from exc
        if resp.status_code != 200:
            raise ProviderUnavailable(f"search endpoint returned HTTP {resp.status_code}")
        try:
            data = resp.json()
        except ValueError as exc:
            raise ProviderUnavailable(f"search endpoint returned non-JSON: {exc}") from exc
        if not isinstance(data, list):
            raise ProviderUnavailable("search endpoint must return a JSON array")
        return [
            SearchResult(str(r.get("title", "")), str(r.get("url", "")),
                         str(r.get("snippet", "")))
            for r in data[:k]
        ]


def web_search(provider, query: str, k: int) -> list[SearchResult]:
    """At most ``k`` results, provider order preserved."""
    if k < 1:
        raise ValueError("k must be positive")
    return provider.search(query, k)
