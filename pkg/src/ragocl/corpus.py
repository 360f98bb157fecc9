"""Dataset ingestion, knowledge-base construction/persistence and sample filters."""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Iterable, Literal, Mapping, Sequence

from ragocl.chunker import Chunk, ChunkKind, RawMetaModel, chunk_metamodel, normalize_text
from ragocl.errors import CorruptKbFile, InconsistentModel, IoFailure, MalformedRecord, SampleTooLarge, UnknownModel

KB_FORMAT = "ragocl-kb"
KB_VERSION = 1

_REQUIRED = ("ocl", "spec", "model", "plantuml")


@dataclass(frozen=True)
class DatasetRecord:
    sample_id: str
    ocl_rule: str
    nl_spec: str
    model_name: str
    plantuml_text: str

    def to_json(self) -> dict:
        return {
            "id": self.sample_id,
            "ocl": self.ocl_rule,
            "spec": self.nl_spec,
            "model": self.model_name,
            "plantuml": self.plantuml_text,
        }


@dataclass(frozen=True)
class Provenance:
    dataset: str
    built_at: str


@dataclass(frozen=True)
class KnowledgeBase:
    models: Mapping[str, tuple[Chunk, ...]]
    provenance: Provenance = field(default_factory=lambda: Provenance("", ""))

    def __contains__(self, model_name: str) -> bool:
        return model_name in self.models

    def __len__(self) -> int:
        return len(self.models)

    def chunks(self, model_name: str) -> tuple[Chunk, ...]:
        try:
            return self.models[model_name]
        except KeyError:
            raise UnknownModel(model_name) from None

    def all_chunks(self) -> Iterable[Chunk]:
        for chunks in self.models.values():
            yield from chunks

    def raw_model(self, model_name: str) -> RawMetaModel:
        """Reassemble the normalized meta-model text from its chunks."""
        return RawMetaModel(model_name, " ".join(c.text for c in self.chunks(model_name)))

    def stats(self) -> dict:
        per_model_total = sum(len(c) for c in self.models.values())
        global_unique = len({c.text for c in self.all_chunks()})
        return {
            "models": len(self.models),
            "chunks_unique_per_model": per_model_total,
            "chunks_unique_global": global_unique,
        }


def parse_dataset(path: str | Path) -> list[DatasetRecord]:
    """Read a JSON-lines dataset (keys ``ocl``, ``spec``, ``model``, ``plantuml``, optional ``id``).

    Blank lines are skipped but still counted, so a synthesized id is always the
    record's 0-based physical line number.
    """
    path = Path(path)
    try:
        lines = path.read_text(encoding="utf-8").splitlines()
    except OSError as exc:
        raise IoFailure(f"cannot read dataset {path}: {exc}") from exc

    records: list[DatasetRecord] = []
    seen: set[str] = set()
    for line_no, line in enumerate(lines):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise MalformedRecord(line_no, f"invalid JSON: {exc.msg}") from None
        if not isinstance(obj, dict):
            raise MalformedRecord(line_no, "record is not an object")
        for key in _REQUIRED:
            value = obj.get(key)
            if not isinstance(value, str):
                raise MalformedRecord(line_no, f"missing or non-string field {key!r}")
            if not value.strip():
                raise MalformedRecord(line_no, f"empty field {key!r}")
        sample_id = obj.get("id", line_no)
        if isinstance(sample_id, bool) or not isinstance(sample_id, (str, int)) or sample_id == "":
            raise MalformedRecord(line_no, "field 'id' must be a non-empty string or integer")
        sample_id = str(sample_id)
        if sample_id in seen:
            raise MalformedRecord(line_no, f"duplicate sample id {sample_id!r}")
        seen.add(sample_id)
        records.append(
            DatasetRecord(
                sample_id=sample_id,
                ocl_rule=obj["ocl"],
                nl_spec=obj["spec"],
                model_name=obj["model"],
                plantuml_text=obj["plantuml"],
            )
        )
    return records


def write_dataset(records: Iterable[DatasetRecord], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for rec in records:
            fh.write(json.dumps(rec.to_json(), ensure_ascii=False) + "\n")


def _dedup(chunks: list[Chunk]) -> tuple[Chunk, ...]:
    seen: set[str] = set()
    kept: list[Chunk] = []
    for chunk in chunks:
        if chunk.text in seen:
            continue
        seen.add(chunk.text)
        kept.append(Chunk(chunk.model_name, len(kept), chunk.kind, chunk.text))
    return tuple(kept)


def build_kb(
    records: Sequence[DatasetRecord],
    dataset: str = "",
    built_at: str | None = None,
) -> KnowledgeBase:
    if not records:
        raise ValueError("cannot build a knowledge base from zero records")
    sources: dict[str, str] = {}
    models: dict[str, tuple[Chunk, ...]] = {}
    for rec in records:
        normalized = normalize_text(rec.plantuml_text)
        if rec.model_name in sources:
            if sources[rec.model_name] != normalized:
                raise InconsistentModel(rec.model_name)
            continue
        sources[rec.model_name] = normalized
        models[rec.model_name] = _dedup(chunk_metamodel(RawMetaModel(rec.model_name, rec.plantuml_text)))
    if built_at is None:
        built_at = datetime.now(timezone.utc).isoformat(timespec="seconds")
    return KnowledgeBase(models=models, provenance=Provenance(dataset, built_at))


def filter_by_chunk_count(
    records: Sequence[DatasetRecord],
    kb: KnowledgeBase,
    threshold: int,
    mode: Literal["above", "below"],
) -> list[DatasetRecord]:
    if mode == "above":
        return [r for r in records if len(kb.chunks(r.model_name)) > threshold]
    if mode == "below":
        return [r for r in records if len(kb.chunks(r.model_name)) < threshold]
    raise ValueError(f"mode must be 'above' or 'below', got {mode!r}")


def sample_records(records: Sequence[DatasetRecord], n: int, seed: int) -> list[DatasetRecord]:
    """Uniform sample without replacement, returned in dataset order."""
    if n > len(records):
        raise SampleTooLarge(f"cannot sample {n} records from {len(records)}")
    if n < 0:
        raise ValueError("sample size must be non-negative")
    picked = sorted(random.Random(seed).sample(range(len(records)), n))
    return [records[i] for i in picked]


def persist_kb(kb: KnowledgeBase, path: str | Path) -> None:
    """Write the KB as JSON lines: one header line, then one line per chunk."""
    header = {
        "format": KB_FORMAT,
        "version": KB_VERSION,
        "dataset": kb.provenance.dataset,
        "built_at": kb.provenance.built_at,
        "chunks": sum(len(c) for c in kb.models.values()),
    }
    try:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(json.dumps(header, ensure_ascii=False) + "\n")
            for chunk in kb.all_chunks():
                entry = {"model": chunk.model_name, "index": chunk.index, "kind": chunk.kind.value, "text": chunk.text}
                fh.write(json.dumps(entry, ensure_ascii=False) + "\n")
    except OSError as exc:
        raise IoFailure(f"cannot write knowledge base {path}: {exc}") from exc


def load_kb(path: str | Path) -> KnowledgeBase:
    try:
        raw = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise IoFailure(f"cannot read knowledge base {path}: {exc}") from exc
    if not raw.endswith("\n"):
        raise CorruptKbFile("file does not end with a newline (truncated write?)")
    lines = raw.splitlines()
    try:
        header = json.loads(lines[0])
    except (IndexError, json.JSONDecodeError):
        raise CorruptKbFile("missing or unreadable header line") from None
    if not isinstance(header, dict) or header.get("format") != KB_FORMAT:
        raise CorruptKbFile("not a knowledge-base file")
    if header.get("version") != KB_VERSION:
        raise CorruptKbFile(f"unsupported version {header.get('version')!r}")

    models: dict[str, list[Chunk]] = {}
    for n, line in enumerate(lines[1:], start=2):
        try:
            entry = json.loads(line)
            chunk = Chunk(entry["model"], int(entry["index"]), ChunkKind(entry["kind"]), entry["text"])
        except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
            raise CorruptKbFile(f"line {n}: {exc}") from None
        bucket = models.setdefault(chunk.model_name, [])
        if chunk.index != len(bucket):
            raise CorruptKbFile(f"line {n}: chunk index {chunk.index} out of sequence for {chunk.model_name!r}")
        bucket.append(chunk)
    count = sum(len(c) for c in models.values())
    if count != header.get("chunks"):
        raise CorruptKbFile(f"header announces {header.get('chunks')} chunks, found {count}")
    return KnowledgeBase(
        models={name: tuple(chunks) for name, chunks in models.items()},
        provenance=Provenance(header.get("dataset", ""), header.get("built_at", "")),
    )
