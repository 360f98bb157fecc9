"""Retriever x k sweep with per-record checkpointing.

Every (retriever, k, sample) outcome is appended to a JSON-lines checkpoint as
soon as it is scored; a rerun with the same checkpoint skips those records and
never calls the LLM for them again.
"""

from __future__ import annotations

import json
import logging
import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Callable

from ragocl.corpus import DatasetRecord, KnowledgeBase, build_kb, filter_by_chunk_count, load_kb, parse_dataset, sample_records
from ragocl.errors import RagOclError, SweepError
from ragocl.evaluation import AggregateStats, EvalRecord, aggregate_stats, score_pair
from ragocl.generation import GenerationRecord, LLMClient, build_prompt, generate_ocl
from ragocl.harness.config import ExperimentConfig
from ragocl.harness.pipeline import Pipeline, pipeline_from_config, provider_spec
from ragocl.vectorizers import DenseProvider, make_dense_provider

log = logging.getLogger(__name__)

CellKey = tuple[str, int]


@dataclass
class SweepResult:
    cells: dict[CellKey, AggregateStats]
    records: list[EvalRecord]
    meta: dict = field(default_factory=dict)

    def retrievers(self) -> list[str]:
        return list(dict.fromkeys(r for r, _ in self.cells))

    def save(self, out_dir: str | Path) -> None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        doc = {
            "meta": self.meta,
            "cells": [{"retriever": r, "k": k, **s.to_json()} for (r, k), s in self.cells.items()],
            "records": [r.to_json() for r in self.records],
        }
        (out / "result.json").write_text(json.dumps(doc, indent=1) + "\n", encoding="utf-8")

    @classmethod
    def load(cls, out_dir: str | Path) -> "SweepResult":
        doc = json.loads((Path(out_dir) / "result.json").read_text(encoding="utf-8"))
        cells = {}
        for c in doc["cells"]:
            c = dict(c)
            key = (c.pop("retriever"), int(c.pop("k")))
            cells[key] = AggregateStats(**c)
        return cls(cells, [EvalRecord.from_json(r) for r in doc["records"]], doc.get("meta", {}))


@dataclass
class _Checkpoint:
    path: Path | None
    done: dict[tuple[str, str, int], dict] = field(default_factory=dict)
    lock: threading.Lock = field(default_factory=threading.Lock)

    @classmethod
    def open(cls, path: str | Path | None) -> "_Checkpoint":
        ckpt = cls(Path(path) if path else None)
        if ckpt.path and ckpt.path.exists():
            with open(ckpt.path, encoding="utf-8") as fh:
                for line in fh:
                    try:
                        row = json.loads(line)
                    except json.JSONDecodeError:
                        continue  # torn last line of an interrupted run
                    ckpt.done[(row["sample"], row["retriever"], int(row["k"]))] = row
        elif ckpt.path:
            ckpt.path.parent.mkdir(parents=True, exist_ok=True)
            ckpt.path.touch()
        return ckpt

    def add(self, row: dict) -> None:
        with self.lock:
            self.done[(row["sample"], row["retriever"], int(row["k"]))] = row
            if self.path:
                with open(self.path, "a", encoding="utf-8") as fh:
                    fh.write(json.dumps(row, ensure_ascii=False) + "\n")
                    fh.flush()


def prepare_samples(config: ExperimentConfig, records: list[DatasetRecord], kb: KnowledgeBase) -> list[DatasetRecord]:
    pool = records
    if config.filter != "none":
        mode = "above" if config.filter == "hard_above" else "below"
        pool = filter_by_chunk_count(records, kb, config.threshold, mode)
    n = config.sample_n
    if n > len(pool):
        log.warning("only %d records pass the filter; sampling all of them instead of %d", len(pool), n)
        n = len(pool)
    return sample_records(pool, n, config.seed)


def load_or_build_kb(config: ExperimentConfig, records: list[DatasetRecord]) -> KnowledgeBase:
    if config.kb_path and Path(config.kb_path).exists():
        return load_kb(config.kb_path)
    return build_kb(records, dataset=str(config.dataset_path))


def run_sweep(
    config: ExperimentConfig,
    *,
    llm: LLMClient | None = None,
    evaluator: DenseProvider | None = None,
    pipeline: Pipeline | None = None,
    checkpoint_path: str | Path | None = None,
    progress: Callable[[str, int, int], None] | None = None,
) -> SweepResult:
    started = datetime.now(timezone.utc).isoformat(timespec="seconds")
    records = parse_dataset(config.dataset_path)
    kb = pipeline.kb if pipeline else load_or_build_kb(config, records)
    samples = prepare_samples(config, records, kb)
    if not samples:
        raise RagOclError("no records left after filtering")
    pipe = pipeline or pipeline_from_config(config, kb, llm)
    scorer = evaluator or make_dense_provider(provider_spec(config.evaluation))
    ckpt = _Checkpoint.open(checkpoint_path)

    # identical prompts reuse one completion (greedy decoding), e.g. every k=0 cell
    memo: dict[tuple[str, str], GenerationRecord] = {}
    for row in ckpt.done.values():
        memo.setdefault((row["sample"], row["prompt"]), GenerationRecord.from_json(row))
    memo_lock = threading.Lock()

    def one(retriever: str, k: int, rec: DatasetRecord) -> dict:
        key = (rec.sample_id, retriever, k)
        if key in ckpt.done:
            return ckpt.done[key]
        try:
            ctx = pipe.retrieve(retriever, rec.nl_spec, rec.model_name, k)
            prompt = build_prompt(ctx.context_text, rec.nl_spec)
            with memo_lock:
                cached = memo.get((rec.sample_id, prompt.rendered))
            if cached is not None:
                gen = GenerationRecord(rec.sample_id, retriever, k, cached.prompt, cached.output_ocl,
                                       0, cached.truncated)
            else:
                gen = generate_ocl(prompt, pipe.llm, pipe.generation, rec.sample_id, retriever, k)
                with memo_lock:
                    memo[(rec.sample_id, prompt.rendered)] = gen
            cs, ed = score_pair(gen.output_ocl, rec.ocl_rule, scorer)
        except Exception as exc:
            raise SweepError(retriever, k, rec.sample_id, exc) from exc
        row = {**gen.to_json(), "cs": cs, "ed": ed}
        ckpt.add(row)
        return row

    cells: dict[CellKey, AggregateStats] = {}
    archive: list[EvalRecord] = []
    with ThreadPoolExecutor(max_workers=config.max_in_flight) as pool:
        for retriever in config.retrievers:
            for k in config.ks_for(retriever):
                futures = [pool.submit(one, retriever, k, rec) for rec in samples]
                rows = []
                error: BaseException | None = None
                for fut in futures:
                    try:
                        rows.append(fut.result())
                    except SweepError as exc:
                        error = error or exc
                if error is not None:
                    raise error
                evals = [EvalRecord(r["sample"], retriever, k, float(r["cs"]), float(r["ed"])) for r in rows]
                cells[(retriever, k)] = aggregate_stats(evals, trim_by=config.trim_by)
                archive.extend(evals)
                if progress:
                    progress(retriever, k, len(evals))

    meta = {
        "seed": config.seed,
        "config_hash": config.digest(),
        "sample_ids": [r.sample_id for r in samples],
        "started_at": started,
        "finished_at": datetime.now(timezone.utc).isoformat(timespec="seconds"),
    }
    return SweepResult(cells, archive, meta)
