"""Embedding-based scoring of generated constraints and per-cell aggregate statistics."""

from __future__ import annotations

import json
import math
import statistics
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Iterable, Literal, Sequence

from ragocl.errors import EmptyRecordSet, EmptyText
from ragocl.vectorizers import DenseProvider, cosine_similarity, euclidean_distance

TRIM_FRACTION = 0.10


@dataclass(frozen=True)
class EvalRecord:
    sample_id: str
    retriever_id: str
    k: int
    cosine_sim: float
    euclid_dist: float

    def to_json(self) -> dict:
        return {"sample": self.sample_id, "retriever": self.retriever_id, "k": self.k,
                "cs": self.cosine_sim, "ed": self.euclid_dist}

    @classmethod
    def from_json(cls, obj) -> "EvalRecord":
        return cls(str(obj["sample"]), obj["retriever"], int(obj["k"]), float(obj["cs"]), float(obj["ed"]))


@dataclass(frozen=True)
class AggregateStats:
    mean_cs: float
    var_cs: float
    trimmed_mean_cs: float
    mean_ed: float
    var_ed: float
    trimmed_mean_ed: float
    n: int
    trim_count: int

    def to_json(self) -> dict:
        return asdict(self)


def score_pair(generated: str, reference: str, provider: DenseProvider) -> tuple[float, float]:
    if not generated.strip():
        raise EmptyText("generated text is empty")
    if not reference.strip():
        raise EmptyText("reference text is empty")
    gen, ref = provider.embed([generated, reference])
    return cosine_similarity(gen, ref), euclidean_distance(gen, ref)


# statistics.mean/pvariance sum exactly (Fractions), so a constant list has
# mean == its value and trimmed means never fall below the full mean.
def _mean(xs: Sequence[float]) -> float:
    return float(statistics.mean(xs))


def _pvariance(xs: Sequence[float]) -> float:
    return float(statistics.pvariance(xs))


def aggregate_stats(
    records: Sequence[EvalRecord],
    trim_by: Literal["per-metric", "cs"] = "per-metric",
) -> AggregateStats:
    """Mean, population variance and trimmed mean (worst ``floor(0.1 n)`` dropped).

    ``trim_by="per-metric"`` drops the lowest-CS records for CS and the
    highest-ED records for ED; ``"cs"`` drops the lowest-CS records for both.
    """
    if not records:
        raise EmptyRecordSet("no records to aggregate")
    cells = {(r.retriever_id, r.k) for r in records}
    if len(cells) > 1:
        raise ValueError(f"records span several (retriever, k) cells: {sorted(cells)}")

    n = len(records)
    trim = math.floor(TRIM_FRACTION * n)
    cs = [r.cosine_sim for r in records]
    ed = [r.euclid_dist for r in records]

    kept_cs = sorted(cs)[trim:]
    if trim_by == "per-metric":
        kept_ed = sorted(ed)[: n - trim]
    elif trim_by == "cs":
        by_cs = sorted(records, key=lambda r: (r.cosine_sim, -r.euclid_dist))
        kept_ed = [r.euclid_dist for r in by_cs[trim:]]
    else:
        raise ValueError(f"unknown trim mode {trim_by!r}")

    return AggregateStats(
        mean_cs=_mean(cs),
        var_cs=_pvariance(cs),
        trimmed_mean_cs=_mean(kept_cs),
        mean_ed=_mean(ed),
        var_ed=_pvariance(ed),
        trimmed_mean_ed=_mean(kept_ed),
        n=n,
        trim_count=trim,
    )


def write_eval_records(records: Iterable[EvalRecord], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for r in records:
            fh.write(json.dumps(r.to_json()) + "\n")


def read_eval_records(path: str | Path) -> list[EvalRecord]:
    with open(path, encoding="utf-8") as fh:
        return [EvalRecord.from_json(json.loads(line)) for line in fh if line.strip()]
