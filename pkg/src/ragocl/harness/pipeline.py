"""Retrieve -> prompt -> generate, shared by the sweep and the REST service.

PathOCL is treated as one more retriever whose context is path text, so every
later stage is identical across retrieval strategies.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import TYPE_CHECKING

from ragocl.corpus import KnowledgeBase
from ragocl.errors import UnknownModel, UnknownRetriever
from ragocl.generation import (
    CannedClient,
    EchoClient,
    GenerationConfig,
    GenerationRecord,
    LLMClient,
    RemoteLLMClient,
    build_prompt,
    generate_ocl,
    join_chunks,
)
from ragocl.pathocl import PathBudget, PathOclContext, paths_to_context
from ragocl.retrieval import RetrievalQuery, Retriever
from ragocl.vectorizers import (
    DenseProvider,
    EmbeddingProviderSpec,
    RemoteSparseEncoder,
    SparseEncoder,
    make_dense_provider,
)

if TYPE_CHECKING:
    from ragocl.harness.config import ExperimentConfig, LLMConfig, ProviderConfig

CHUNK_RETRIEVERS = ("bm25", "dense", "sparse")
PATHOCL_RETRIEVERS = ("pathocl-jaccard", "pathocl-cosine")
SWEEP_RETRIEVERS = CHUNK_RETRIEVERS + PATHOCL_RETRIEVERS


@dataclass(frozen=True)
class RetrievedItem:
    text: str
    score: float
    rank: int


@dataclass(frozen=True)
class ContextResult:
    items: list[RetrievedItem]
    context_text: str


class Pipeline:
    def __init__(
        self,
        kb: KnowledgeBase,
        llm: LLMClient,
        dense: DenseProvider | None = None,
        sparse: SparseEncoder | None = None,
        generation: GenerationConfig = GenerationConfig(),
        budget: PathBudget = PathBudget(),
    ):
        self.kb = kb
        self.llm = llm
        self.dense = dense
        self.generation = generation
        self.retriever = Retriever(kb, dense=dense, sparse=sparse)
        self.pathocl = PathOclContext(budget)

    def retrieve(self, retriever_id: str, nl_spec: str, model_name: str, k: int) -> ContextResult:
        if model_name not in self.kb:
            raise UnknownModel(model_name)
        if retriever_id == "none" or k == 0:
            return ContextResult([], "")
        if retriever_id in CHUNK_RETRIEVERS:
            hits = self.retriever.retrieve(RetrievalQuery(nl_spec, model_name, k), retriever_id)
            items = [RetrievedItem(h.chunk.text, h.score, h.rank) for h in hits]
            return ContextResult(items, join_chunks([i.text for i in items]))
        if retriever_id in PATHOCL_RETRIEVERS:
            measure = retriever_id.split("-", 1)[1]
            chunks = self.kb.chunks(model_name)
            ranked, text = self.pathocl.context(nl_spec, model_name, chunks, measure, k, self.dense)
            items = [RetrievedItem(paths_to_context([c], chunks), c.score, r) for r, c in enumerate(ranked, 1)]
            return ContextResult(items, text)
        raise UnknownRetriever(f"unknown retriever {retriever_id!r}")

    def generate(self, retriever_id: str, nl_spec: str, model_name: str, k: int,
                 sample_id: str = "") -> tuple[ContextResult, GenerationRecord]:
        ctx = self.retrieve(retriever_id, nl_spec, model_name, k)
        prompt = build_prompt(ctx.context_text, nl_spec)
        record = generate_ocl(prompt, self.llm, self.generation, sample_id=sample_id,
                              retriever_id=retriever_id, k=k)
        return ctx, record


def provider_spec(cfg: "ProviderConfig") -> EmbeddingProviderSpec:
    return EmbeddingProviderSpec(kind=cfg.kind, endpoint=cfg.endpoint, dim=cfg.dim, cache_policy=cfg.cache_policy,
                                 cache_path=cfg.cache_path, token=cfg.token, timeout_s=cfg.timeout_s)


def make_llm(cfg: "LLMConfig") -> LLMClient:
    if cfg.kind == "echo":
        return EchoClient()
    if cfg.kind == "canned":
        answers = {}
        if cfg.answers_path:
            answers = json.loads(Path(cfg.answers_path).read_text(encoding="utf-8"))
        return CannedClient(answers, cfg.default)
    if cfg.kind == "remote":
        if not cfg.endpoint:
            raise ValueError("remote llm requires an endpoint")
        return RemoteLLMClient(cfg.endpoint, token=cfg.token, timeout_s=cfg.timeout_s,
                               min_interval_s=cfg.min_interval_s)
    raise ValueError(f"unknown llm kind {cfg.kind!r}")


def make_sparse(cfg: "ProviderConfig") -> SparseEncoder | None:
    """``None`` selects the tf-idf surrogate fitted on the knowledge base."""
    if cfg.kind == "remote":
        return RemoteSparseEncoder(cfg.endpoint, token=cfg.token, timeout_s=cfg.timeout_s)
    return None


def pipeline_from_config(config: "ExperimentConfig", kb: KnowledgeBase, llm: LLMClient | None = None) -> Pipeline:
    return Pipeline(
        kb,
        llm=llm or make_llm(config.llm),
        dense=make_dense_provider(provider_spec(config.dense)),
        sparse=make_sparse(config.sparse),
        generation=GenerationConfig(max_output_tokens=config.llm.max_output_tokens,
                                    system_role_text=config.llm.system_role_text,
                                    timeout_s=config.llm.timeout_s),
        budget=PathBudget(config.max_path_len, config.max_paths),
    )
