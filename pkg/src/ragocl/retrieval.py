"""Top-k chunk retrieval with BM25, dense and sparse scorers.

Candidates are restricted to the query's meta-model, scored, sorted by
descending score (ties by ascending chunk index) and truncated to ``k``.
"""

from __future__ import annotations

import math
import threading
from collections import Counter
from dataclasses import dataclass
from typing import Literal, Sequence

from ragocl.chunker import Chunk
from ragocl.corpus import KnowledgeBase
from ragocl.errors import EmptyCorpus, UnknownModel
from ragocl.text import tokenize
from ragocl.vectorizers import DenseProvider, SparseEncoder, TfidfSparseEncoder, cosine_similarity, sparse_dot

Scorer = Literal["bm25", "dense", "sparse"]
SCORERS: tuple[str, ...] = ("bm25", "dense", "sparse")

__all__ = [
    "BM25Params",
    "RetrievalQuery",
    "Retriever",
    "ScoredChunk",
    "bm25_scores",
    "retrieve_top_k",
    "tokenize",
]


@dataclass(frozen=True)
class BM25Params:
    k1: float = 1.5
    b: float = 0.75

    def __post_init__(self):
        if not self.k1 > 0:
            raise ValueError("k1 must be positive")
        if not 0.0 <= self.b <= 1.0:
            raise ValueError("b must lie in [0, 1]")


@dataclass(frozen=True)
class RetrievalQuery:
    nl_spec: str
    model_name: str
    k: int

    def __post_init__(self):
        if self.k < 0:
            raise ValueError("k must be non-negative")


@dataclass(frozen=True)
class ScoredChunk:
    chunk: Chunk
    score: float
    rank: int


def bm25_scores(
    query_tokens: Sequence[str],
    documents: Sequence[Sequence[str]],
    params: BM25Params = BM25Params(),
) -> list[float]:
    """Okapi BM25 with the non-negative ``ln(... + 1)`` idf, one score per tokenized document."""
    n = len(documents)
    if n == 0:
        raise EmptyCorpus("BM25 needs at least one document")
    lengths = [len(d) for d in documents]
    avgdl = sum(lengths) / n
    tfs = [Counter(d) for d in documents]
    df: Counter[str] = Counter()
    for tf in tfs:
        df.update(tf.keys())

    terms = list(dict.fromkeys(query_tokens))
    idf = {t: math.log((n - df[t] + 0.5) / (df[t] + 0.5) + 1.0) for t in terms}
    scores = []
    for tf, dl in zip(tfs, lengths):
        norm = params.k1 * (1.0 - params.b + params.b * dl / avgdl) if avgdl > 0 else params.k1
        s = 0.0
        for t in terms:
            f = tf.get(t, 0)
            if f:
                s += idf[t] * f * (params.k1 + 1.0) / (f + norm)
        scores.append(s)
    return scores


def rank_scored(chunks: Sequence[Chunk], scores: Sequence[float], k: int) -> list[ScoredChunk]:
    order = sorted(range(len(chunks)), key=lambda i: (-scores[i], chunks[i].index))
    return [ScoredChunk(chunks[i], float(scores[i]), rank) for rank, i in enumerate(order[:k], start=1)]


class Retriever:
    """Scores a knowledge base's chunks; per-model tokenizations and a fitted sparse encoder are cached.

    When no sparse encoder is given, a tf-idf surrogate is fitted lazily on every
    chunk text in the knowledge base.
    """

    def __init__(
        self,
        kb: KnowledgeBase,
        dense: DenseProvider | None = None,
        sparse: SparseEncoder | None = None,
        bm25: BM25Params = BM25Params(),
    ):
        self.kb = kb
        self.dense = dense
        self._sparse = sparse
        self.bm25 = bm25
        self._tokens: dict[str, list[list[str]]] = {}
        self._lock = threading.Lock()

    @property
    def sparse(self) -> SparseEncoder:
        with self._lock:
            if self._sparse is None:
                self._sparse = TfidfSparseEncoder().fit(c.text for c in self.kb.all_chunks())
            return self._sparse

    def _chunk_tokens(self, model_name: str) -> list[list[str]]:
        toks = self._tokens.get(model_name)
        if toks is None:
            toks = [tokenize(c.text) for c in self.kb.chunks(model_name)]
            self._tokens[model_name] = toks
        return toks

    def score(self, query: RetrievalQuery, scorer: Scorer) -> tuple[tuple[Chunk, ...], list[float]]:
        if query.model_name not in self.kb:
            raise UnknownModel(query.model_name)
        chunks = self.kb.chunks(query.model_name)
        if scorer == "bm25":
            scores = bm25_scores(tokenize(query.nl_spec), self._chunk_tokens(query.model_name), self.bm25)
        elif scorer == "dense":
            if self.dense is None:
                raise ValueError("dense scorer needs a dense provider")
            vecs = self.dense.embed([query.nl_spec] + [c.text for c in chunks])
            scores = [cosine_similarity(vecs[0], v) for v in vecs[1:]]
        elif scorer == "sparse":
            vecs = self.sparse.encode([query.nl_spec] + [c.text for c in chunks])
            scores = [sparse_dot(vecs[0], v) for v in vecs[1:]]
        else:
            raise ValueError(f"unknown scorer {scorer!r}; expected one of {SCORERS}")
        return chunks, scores

    def retrieve(self, query: RetrievalQuery, scorer: Scorer) -> list[ScoredChunk]:
        if query.model_name not in self.kb:
            raise UnknownModel(query.model_name)
        if query.k == 0:
            return []
        chunks, scores = self.score(query, scorer)
        return rank_scored(chunks, scores, query.k)


def retrieve_top_k(
    query: RetrievalQuery,
    kb: KnowledgeBase,
    scorer: Scorer,
    dense: DenseProvider | None = None,
    sparse: SparseEncoder | None = None,
    bm25: BM25Params = BM25Params(),
) -> list[ScoredChunk]:
    return Retriever(kb, dense=dense, sparse=sparse, bm25=bm25).retrieve(query, scorer)
