"""Chunk the grading guideline and query it with BM25.

Shows what the expert agent's file_search tool sees: deterministic
whitespace chunking, then classical BM25 (k1=1.2, b=0.75) ranking.

    python3 demos/retrieval_search.py
"""

import tempfile
from pathlib import Path

from disasteller.demo import GUIDELINE_TEXT
from disasteller.toolkit.retrieval import ingest_guideline

workdir = Path(tempfile.mkdtemp(prefix="disasteller-retrieval-"))
guideline = workdir / "guideline.txt"
guideline.write_text(GUIDELINE_TEXT)

index = ingest_guideline(guideline, chunk_size=120, overlap=30)
print(f"ingested {guideline.name}: {len(index.chunks)} chunks, "
      f"avg {index.avg_chunk_len:.1f} scoring tokens, "
      f"{len(index.doc_freq)} distinct terms")

for query in (
    "damage grade classification",
    "partial collapse of roofs",
    "hairline cracks in plaster",
    "fire following earthquake",
):
    print(f"\nquery: {query!r}")
    for hit in index.search(query, k=3):
        preview = " ".join(hit.chunk.text.split()[:14])
        print(f"  chunk {hit.chunk.chunk_id:>2}  score {hit.score:7.3f}  {preview}...")

# The index persists to plain JSON for the `disasteller index` command.
index.save(workdir / "index")
print(f"\nindex persisted under {workdir / 'index'}")
