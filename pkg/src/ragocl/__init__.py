"""Retrieval-augmented OCL constraint generation over PlantUML meta-models."""

from ragocl.chunker import Chunk, ChunkKind, RawMetaModel, chunk_metamodel, normalize_text
from ragocl.corpus import DatasetRecord, KnowledgeBase, build_kb, load_kb, parse_dataset, persist_kb
from ragocl.retrieval import RetrievalQuery, Retriever, ScoredChunk, retrieve_top_k, tokenize

__version__ = "0.1.0"

__all__ = [
    "Chunk",
    "ChunkKind",
    "DatasetRecord",
    "KnowledgeBase",
    "RawMetaModel",
    "RetrievalQuery",
    "Retriever",
    "ScoredChunk",
    "build_kb",
    "chunk_metamodel",
    "load_kb",
    "normalize_text",
    "parse_dataset",
    "persist_kb",
    "retrieve_top_k",
    "tokenize",
]
