"""``ragocl`` command line."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from ragocl.chunker import RawMetaModel, chunk_metamodel
from ragocl.corpus import build_kb, load_kb, parse_dataset, persist_kb
from ragocl.errors import RagOclError
from ragocl.harness.config import ExperimentConfig, load_config
from ragocl.harness.pipeline import SWEEP_RETRIEVERS, pipeline_from_config
from ragocl.harness.report import export_boxplot_data, render_report
from ragocl.harness.sweep import SweepResult, run_sweep

log = logging.getLogger("ragocl")


def _config(args) -> ExperimentConfig:
    cfg = load_config(args.config) if args.config else ExperimentConfig()
    if args.seed is not None:
        cfg.seed = args.seed
    if args.kb:
        cfg.kb_path = args.kb
    if getattr(args, "dataset", None):
        cfg.dataset_path = args.dataset
    return cfg


def _kb(args, cfg: ExperimentConfig):
    if cfg.kb_path and Path(cfg.kb_path).exists():
        return load_kb(cfg.kb_path)
    return build_kb(parse_dataset(cfg.dataset_path), dataset=cfg.dataset_path)


def _out(args, default: str) -> Path:
    return Path(args.out or default)


def cmd_ingest(args) -> int:
    cfg = _config(args)
    kb = build_kb(parse_dataset(cfg.dataset_path), dataset=cfg.dataset_path)
    target = _out(args, cfg.kb_path or "kb.jsonl")
    persist_kb(kb, target)
    print(json.dumps({"kb": str(target), **kb.stats()}, indent=2))
    return 0


def cmd_chunk(args) -> int:
    text = Path(args.plantuml).read_text(encoding="utf-8")
    for c in chunk_metamodel(RawMetaModel(args.model or Path(args.plantuml).stem, text)):
        print(json.dumps({"index": c.index, "kind": c.kind.value, "text": c.text}, ensure_ascii=False))
    return 0


def cmd_index(args) -> int:
    cfg = _config(args)
    kb = _kb(args, cfg)
    pipe = pipeline_from_config(cfg, kb)
    texts = [c.text for c in kb.all_chunks()]
    pipe.dense.embed(texts)
    _ = pipe.retriever.sparse
    print(json.dumps({"embedded_chunks": len(texts), "cache": cfg.dense.cache_path}))
    return 0


def cmd_retrieve(args) -> int:
    cfg = _config(args)
    pipe = pipeline_from_config(cfg, _kb(args, cfg))
    ctx = pipe.retrieve(args.retriever, args.spec, args.model, args.k)
    for item in ctx.items:
        print(json.dumps({"rank": item.rank, "score": item.score, "text": item.text}, ensure_ascii=False))
    return 0


def cmd_generate(args) -> int:
    cfg = _config(args)
    pipe = pipeline_from_config(cfg, _kb(args, cfg))
    ctx, rec = pipe.generate(args.retriever, args.spec, args.model, args.k)
    print(rec.output_ocl)
    return 0


def cmd_sweep(args) -> int:
    cfg = _config(args)
    out = _out(args, "sweep-out")
    out.mkdir(parents=True, exist_ok=True)
    result = run_sweep(
        cfg,
        checkpoint_path=out / "checkpoint.jsonl",
        progress=lambda r, k, n: log.info("cell %s k=%d done (%d samples)", r, k, n),
    )
    result.save(out)
    (out / "report.txt").write_text(render_report(result), encoding="utf-8")
    (out / "report.csv").write_text(render_report(result, "csv"), encoding="utf-8")
    (out / "boxplot.csv").write_text(export_boxplot_data(result), encoding="utf-8")
    sys.stdout.write(render_report(result))
    return 0


def cmd_report(args) -> int:
    result = SweepResult.load(_out(args, "sweep-out"))
    sys.stdout.write(render_report(result, args.format))
    return 0


def cmd_export_plots(args) -> int:
    result = SweepResult.load(_out(args, "sweep-out"))
    sys.stdout.write(export_boxplot_data(result))
    return 0


def cmd_serve(args) -> int:
    from ragocl.harness.service import serve_api

    cfg = _config(args)
    serve_api(pipeline_from_config(cfg, _kb(args, cfg)), host=args.host, port=args.port)
    return 0


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="experiment config (YAML or JSON)")
    common.add_argument("--seed", type=int)
    common.add_argument("--kb", help="knowledge-base file")
    common.add_argument("--out", help="output file or directory")
    common.add_argument("-v", "--verbose", action="store_true")

    # subcommands re-declare the globals without defaults so either position works
    sub_common = argparse.ArgumentParser(add_help=False)
    for action in common._actions:
        kwargs = {"default": argparse.SUPPRESS, "help": argparse.SUPPRESS}
        if action.nargs == 0:
            sub_common.add_argument(*action.option_strings, action="store_true", **kwargs)
        else:
            sub_common.add_argument(*action.option_strings, type=action.type, **kwargs)

    parser = argparse.ArgumentParser(prog="ragocl", parents=[common], description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", parents=[sub_common], help="parse a dataset and persist its knowledge base")
    p.add_argument("--dataset")
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("chunk", parents=[sub_common], help="chunk one PlantUML file")
    p.add_argument("plantuml")
    p.add_argument("--model")
    p.set_defaults(func=cmd_chunk)

    p = sub.add_parser("index", parents=[sub_common], help="embed every chunk (fills a persistent cache)")
    p.add_argument("--dataset")
    p.set_defaults(func=cmd_index)

    for name, func, help_ in (("retrieve", cmd_retrieve, "top-k chunks for one specification"),
                              ("generate", cmd_generate, "generate one OCL constraint")):
        p = sub.add_parser(name, parents=[sub_common], help=help_)
        p.add_argument("--dataset")
        p.add_argument("--model", required=True)
        p.add_argument("--spec", required=True)
        p.add_argument("--retriever", default="sparse", choices=SWEEP_RETRIEVERS + ("none",))
        p.add_argument("--k", type=int, default=10)
        p.set_defaults(func=func)

    p = sub.add_parser("sweep", parents=[sub_common], help="run the retriever x k evaluation sweep")
    p.add_argument("--dataset")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("report", parents=[sub_common], help="render tables from a sweep directory")
    p.add_argument("--format", choices=("table-text", "csv"), default="table-text")
    p.set_defaults(func=cmd_report)

    p = sub.add_parser("export-plots", parents=[sub_common], help="boxplot data from a sweep directory")
    p.set_defaults(func=cmd_export_plots)

    p = sub.add_parser("serve", parents=[sub_common], help="run the REST API")
    p.add_argument("--dataset")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.set_defaults(func=cmd_serve)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except RagOclError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
