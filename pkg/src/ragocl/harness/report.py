"""Tables (text/CSV) and boxplot data from a sweep result. Values are rounded here only."""

from __future__ import annotations

import csv
import io
from collections import defaultdict
from typing import Literal

from ragocl.harness.sweep import SweepResult

# (label, attribute, best = "max" | "min")
ROWS = (
    ("Mean CS", "mean_cs", "max"),
    ("Variance CS", "var_cs", "min"),
    ("Trimmed Mean CS", "trimmed_mean_cs", "max"),
    ("Mean ED", "mean_ed", "min"),
    ("Variance ED", "var_ed", "min"),
    ("Trimmed Mean ED", "trimmed_mean_ed", "min"),
)

TITLES = {
    "bm25": "BM25 retriever",
    "dense": "Dense-embedding retriever",
    "sparse": "Sparse-vector retriever",
    "pathocl-jaccard": "PathOCL (Jaccard)",
    "pathocl-cosine": "PathOCL (cosine)",
}

BOXPLOT_HEADER = ("retriever", "metric", "k", "invert_axis", "sample", "value")


def fmt4(x: float) -> str:
    return f"{x:.4f}"


def _columns(result: SweepResult, retriever: str) -> list[int]:
    ks = sorted(k for r, k in result.cells if r == retriever)
    # baseline (k = 0) goes last, as in the published tables
    return [k for k in ks if k != 0] + ([0] if 0 in ks else [])


def _best(values: dict[int, float], how: str) -> int | None:
    # the baseline is a reference point and never marked when other cells exist
    pool = {k: round(v, 4) for k, v in values.items() if k != 0} or {k: round(v, 4) for k, v in values.items()}
    if not pool:
        return None
    target = max(pool.values()) if how == "max" else min(pool.values())
    return min(k for k, v in pool.items() if v == target)


def _table(result: SweepResult, retriever: str) -> str:
    ks = _columns(result, retriever)
    header = ["Metric"] + [f"k = {k}" + (" (Baseline)" if k == 0 else "") + " " for k in ks]
    body = []
    for label, attr, how in ROWS:
        values = {k: getattr(result.cells[(retriever, k)], attr) for k in ks}
        best = _best(values, how)
        body.append([label] + [fmt4(values[k]) + ("*" if k == best else " ") for k in ks])
    n = {result.cells[(retriever, k)].n for k in ks}
    widths = [max(len(row[i]) for row in [header] + body) for i in range(len(header))]

    def line(row: list[str]) -> str:
        return "  ".join(cell.ljust(w) if i == 0 else cell.rjust(w) for i, (cell, w) in enumerate(zip(row, widths))).rstrip()

    title = f"{TITLES.get(retriever, retriever)} [{retriever}] (n = {', '.join(map(str, sorted(n)))})"
    rule = "-" * len(line(header))
    return "\n".join([title, rule, line(header), rule, *(line(r) for r in body[:3]), rule,
                      *(line(r) for r in body[3:]), rule])


def render_report(result: SweepResult, format: Literal["table-text", "csv"] = "table-text") -> str:
    if format == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["retriever", "k", "metric", "value"])
        for retriever in result.retrievers():
            for k in _columns(result, retriever):
                stats = result.cells[(retriever, k)]
                for label, attr, _ in ROWS:
                    w.writerow([retriever, k, label, fmt4(getattr(stats, attr))])
        return buf.getvalue()
    if format != "table-text":
        raise ValueError(f"unknown report format {format!r}")
    tables = [_table(result, r) for r in result.retrievers()]
    legend = "* best value per row (max for CS means, min for variances and ED means; baseline excluded)"
    return "\n\n".join(tables + [legend]) + "\n"


def parse_report_csv(text: str) -> dict[tuple[str, int, str], float]:
    rows = csv.DictReader(io.StringIO(text))
    return {(r["retriever"], int(r["k"]), r["metric"]): float(r["value"]) for r in rows}


def export_boxplot_data(result: SweepResult) -> str:
    """Long-format CSV of raw per-sample values; ED rows carry ``invert_axis=1``."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(BOXPLOT_HEADER)
    order = {r: i for i, r in enumerate(result.retrievers())}
    recs = sorted(result.records, key=lambda r: (order.get(r.retriever_id, len(order)), r.retriever_id, r.k))
    for metric, attr, invert in (("cs", "cosine_sim", 0), ("ed", "euclid_dist", 1)):
        for r in recs:
            w.writerow([r.retriever_id, metric, r.k, invert, r.sample_id, repr(getattr(r, attr))])
    return buf.getvalue()


def parse_boxplot_data(text: str) -> dict[tuple[str, str], dict[int, list[float]]]:
    groups: dict[tuple[str, str], dict[int, list[float]]] = defaultdict(lambda: defaultdict(list))
    for row in csv.DictReader(io.StringIO(text)):
        groups[(row["retriever"], row["metric"])][int(row["k"])].append(float(row["value"]))
    return {key: dict(v) for key, v in groups.items()}
