"""Guideline retrieval: whitespace chunking plus classical BM25 ranking.

Chunking is purely positional: token starts at 0, step = chunk_size - overlap.
Scoring is BM25 with k1=1.2, b=0.75 and the always-positive idf variant
idf(t) = ln(1 + (N - df + 0.5) / (df + 0.5)). Both are deterministic, so the
whole index can be checked against a brute-force oracle.
"""

from __future__ import annotations

import json
import math
from collections import Counter
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

from disasteller.errors import DisasTellerError
from disasteller.toolkit.normalize import normalize_tokens

BM25_K1 = 1.2
BM25_B = 0.75


class RetrievalError(DisasTellerError):
    pass


class EmptyDocument(RetrievalError):
    pass


class EmptyQuery(RetrievalError):
    """No query tokens survive normalization."""


@dataclass(frozen=True)
class GuidelineChunk:
    doc_id: str
    chunk_id: int      # contiguous from 0 within its document
    text: str
    token_count: int


@dataclass(frozen=True)
class ScoredChunk:
    chunk: GuidelineChunk
    score: float


def chunk_tokens(tokens: Sequence[str], chunk_size: int, overlap: int) -> list[tuple[int, int]]:
    """(start, end) token windows for the stated chunking rule."""
    if chunk_size < 1:
        raise ValueError("chunk_size must be positive")
    if not 0 <= overlap < chunk_size:
        raise ValueError("overlap must satisfy 0 <= overlap < chunk_size")
    step = chunk_size - overlap
    n = len(tokens)
    return [(start, min(start + chunk_size, n)) for start in range(0, n, step)]


class GuidelineIndex:
    """Immutable after construction; safe for concurrent reads."""

    def __init__(self, chunks: Sequence[GuidelineChunk]) -> None:
        if not chunks:
            raise EmptyDocument("index needs at least one chunk")
        self.chunks: tuple[GuidelineChunk, ...] = tuple(chunks)
        self._chunk_terms: list[Counter[str]] = []
        self._chunk_len: list[int] = []
        self.doc_freq: Counter[str] = Counter()
        for chunk in self.chunks:
            terms = Counter(normalize_tokens(chunk.text))
            self._chunk_terms.append(terms)
            self._chunk_len.append(sum(terms.values()))
            self.doc_freq.update(terms.keys())
        self.avg_chunk_len = sum(self._chunk_len) / len(self.chunks)

    @classmethod
    def from_texts(
        cls, documents: Iterable[tuple[str, str]], chunk_size: int = 300, overlap: int = 50
    ) -> "GuidelineIndex":
        """Chunk each (doc_id, text) pair; raises EmptyDocument if nothing yields tokens."""
        chunks: list[GuidelineChunk] = []
        for doc_id, text in documents:
            tokens = text.split()
            if not tokens:
                raise EmptyDocument(f"document {doc_id!r} has no tokens")
            for chunk_id, (start, end) in enumerate(chunk_tokens(tokens, chunk_size, overlap)):
                window = tokens[start:end]
                chunks.append(
                    GuidelineChunk(
                        doc_id=doc_id,
                        chunk_id=chunk_id,
                        text=" ".join(window),
                        token_count=len(window),
                    )
                )
        if not chunks:
            raise EmptyDocument("no documents given")
        return cls(chunks)

    def search(self, query: str, k: int) -> list[ScoredChunk]:
        """Top-k chunks by BM25; ties broken by ascending position in the index."""
        if k < 1:
            raise ValueError("k must be positive")
        terms = normalize_tokens(query)
        if not terms:
            raise EmptyQuery(f"query {query!r} has no tokens after normalization")
        n = len(self.chunks)
        scored: list[tuple[float, int]] = []
        unique_terms = sorted(set(terms))
        for i in range(n):
            chunk_terms = self._chunk_terms[i]
            dl = self._chunk_len[i]
            score = 0.0
            for term in unique_terms:
                tf = chunk_terms.get(term, 0)
                if tf == 0:
                    continue
                df = self.doc_freq[term]
                idf = math.log(1.0 + (n - df + 0.5) / (df + 0.5))
                norm = tf + BM25_K1 * (1.0 - BM25_B + BM25_B * dl / self.avg_chunk_len)
                score += idf * tf * (BM25_K1 + 1.0) / norm
            scored.append((score, i))
        scored.sort(key=lambda pair: (-pair[0], pair[1]))
        return [ScoredChunk(chunk=self.chunks[i], score=s) for s, i in scored[:k]]

    def save(self, out_dir: str | Path) -> Path:
        """Persist chunks and scoring statistics; returns the chunks file path."""
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        chunks_path = out / "chunks.json"
        chunks_path.write_text(
            json.dumps(
                [
                    {"doc_id": c.doc_id, "chunk_id": c.chunk_id,
                     "text": c.text, "token_count": c.token_count}
                    for c in self.chunks
                ],
                indent=2,
            ) + "\n",
            encoding="utf-8",
        )
        stats = {
            "chunk_count": len(self.chunks),
            "avg_chunk_len": self.avg_chunk_len,
            "vocabulary": len(self.doc_freq),
            "doc_freq": dict(sorted(self.doc_freq.items())),
            "bm25": {"k1": BM25_K1, "b": BM25_B},
        }
        (out / "stats.json").write_text(json.dumps(stats, indent=2) + "\n", encoding="utf-8")
        return chunks_path

    @classmethod
    def load(cls, index_dir: str | Path) -> "GuidelineIndex":
        data = json.loads((Path(index_dir) / "chunks.json").read_text(encoding="utf-8"))
        chunks = [
            GuidelineChunk(
                doc_id=item["doc_id"], chunk_id=item["chunk_id"],
                text=item["text"], token_count=item["token_count"],
            )
            for item in data
        ]
        return cls(chunks)


def ingest_guideline(
    path: str | Path, chunk_size: int = 300, overlap: int = 50
) -> GuidelineIndex:
    """Read a plain-text guideline and build its retrieval index.

    Raises EmptyDocument for token-free files; I/O problems propagate as OSError.
    """
    path = Path(path)
    text = path.read_text(encoding="utf-8")
    if not text.split():
        raise EmptyDocument(f"guideline file {path} contains no tokens")
    return GuidelineIndex.from_texts([(path.stem, text)], chunk_size, overlap)


def file_search(index: GuidelineIndex, query: str, k: int) -> list[ScoredChunk]:
    return index.search(query, k)
