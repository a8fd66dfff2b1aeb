"""Shared text normalization: lowercase, collapse whitespace, strip punctuation.

Used for retrieval scoring terms, gazetteer name matching, and web-search
fixture keys, so all three agree on what "the same string" means.
"""

from __future__ import annotations

import string

_STRIP = string.punctuation + "“”‘’–—"


def normalize_token(token: str) -> str:
    return token.casefold().strip(_STRIP)


def normalize_tokens(text: str) -> list[str]:
    """Whitespace-split then normalize; empty leftovers are dropped."""
    out = []
    for raw in text.split():
        tok = normalize_token(raw)
        if tok:
            out.append(tok)
    return out


def normalize_phrase(text: str) -> str:
    """Canonical form of a multi-word name or query."""
    return " ".join(normalize_tokens(text))
