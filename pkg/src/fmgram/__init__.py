"""fmgram: sharded FM-index search over document corpora.

Builds compressed full-text indexes (~0.45x the corpus size) from JSONL
document collections and answers exact-match count and document-retrieval
queries from disk, plus a benchmark contamination auditor built on the
count primitive.
"""

__version__ = "0.1.0"
