from disasteller.toolkit.gazetteer import (
    Gazetteer,
    GazetteerEntry,
    GazetteerError,
    UnresolvedLocation,
    resolve_location,
)
from disasteller.toolkit.mapping import (
    MapAnnotation,
    OutOfBounds,
    annotate_map,
    png_bytes,
)
from disasteller.toolkit.normalize import normalize_phrase, normalize_token, normalize_tokens
from disasteller.toolkit.registry import (
    ArgField,
    ArgumentSchemaViolation,
    ToolCallLog,
    ToolRegistry,
    ToolResult,
    ToolSpec,
    UnknownTool,
    validate_args,
)
from disasteller.toolkit.retrieval import (
    EmptyDocument,
    EmptyQuery,
    GuidelineChunk,
    GuidelineIndex,
    ScoredChunk,
    chunk_tokens,
    file_search,
    ingest_guideline,
)
from disasteller.toolkit.vision import UndecodableImage, interpret_image
from disasteller.toolkit.websearch import (
    FixtureSearchProvider,
    LiveSearchProvider,
    NoFixture,
    ProviderUnavailable,
    SearchResult,
    web_search,
)

__all__ = [
    "ArgField",
    "ArgumentSchemaViolation",
    "EmptyDocument",
    "EmptyQuery",
    "FixtureSearchProvider",
    "Gazetteer",
    "GazetteerEntry",
    "GazetteerError",
    "GuidelineChunk",
    "GuidelineIndex",
    "LiveSearchProvider",
    "MapAnnotation",
    "NoFixture",
    "OutOfBounds",
    "ProviderUnavailable",
    "ScoredChunk",
    "SearchResult",
    "ToolCallLog",
    "ToolRegistry",
    "ToolResult",
    "ToolSpec",
    "UndecodableImage",
    "UnknownTool",
    "UnresolvedLocation",
    "annotate_map",
    "chunk_tokens",
    "file_search",
    "ingest_guideline",
    "interpret_image",
    "normalize_phrase",
    "normalize_token",
    "normalize_tokens",
    "png_bytes",
    "resolve_location",
    "validate_args",
    "web_search",
]
