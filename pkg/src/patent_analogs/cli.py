"""Command-line front end; mirrors the HTTP verbs for batch use."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import clp, ingest, patent_search, trainer
from .config import KEYS, load_settings
from .coordinator import Workstation, corpus_stats, error_envelope
from .errors import NotFound, PatentAnalogError
from .store import DocumentStore

SERVING = ("state", "serving")


def _emit(obj):
    print(json.dumps(obj, ensure_ascii=False, indent=2))


def _workstation(args) -> Workstation:
    overrides = {k: getattr(args, k) for k in KEYS if getattr(args, k, None) is not None}
    settings = load_settings(args.config, overrides)
    ws = Workstation(DocumentStore(settings.store_root), settings.resources(), settings.training, settings.phrases)
    ws.settings = settings
    return ws


def _serving_model(ws: Workstation):
    try:
        path = ws.store.get(*SERVING)["model_path"]
    except NotFound:
        return ws.require_model()
    return ws.init_model(path)


def cmd_ingest(args, ws):
    for name in args.files:
        path = Path(name)
        doc_id = args.id if args.id and len(args.files) == 1 else path.stem
        text = ingest.extract_text(ingest.RawDocument(doc_id, path.read_bytes(), args.format, args.encoding))
        ws.store.put(patent_search.TEXTS, text.doc_id, text.to_json())
        _emit({"doc_id": text.doc_id, "language": text.language.value, "chars": len(text.text)})


def cmd_corpus_build(args, ws):
    ids = args.docs or ws.store.list(patent_search.TEXTS)
    docs = [ingest.ExtractedText.from_json(ws.store.get(patent_search.TEXTS, i)) for i in ids]
    corpus = clp.build_corpus(docs, ws.resources, ws.phrases)
    path = ws.save_corpus(corpus, args.name, ids)
    _emit({"name": args.name, "path": str(path), **corpus_stats(corpus)})


def cmd_model_train(args, ws):
    model = trainer.train(ws.load_corpus(args.corpus), ws.training)
    path = ws.save_model(model, args.name, ws.training)
    _emit({"model_path": str(path), "terms": len(model), "dim": model.dim})


def cmd_model_init(args, ws):
    model = ws.init_model(args.path)
    ws.store.put(*SERVING, {"model_path": ws.model_path})
    _emit({"model_path": ws.model_path, "terms": len(model), "dim": model.dim})


def cmd_index(args, ws):
    model = _serving_model(ws)
    for name in args.files:
        path = Path(name)
        doc = ingest.extract_text(ingest.RawDocument(path.stem, path.read_bytes(), "plain_text", args.encoding))
        record = patent_search.index_patent(ws.store, model.index, doc,
                                            {"title": args.title or path.stem, "ipc_class": args.ipc}, ws.resources)
        _emit({"id": record.id, "terms": len(record.term_array)})


def cmd_search(args, ws):
    model = _serving_model(ws)
    path = Path(args.file)
    doc = ingest.extract_text(ingest.RawDocument(path.stem, path.read_bytes(), "plain_text", args.encoding))
    _emit(patent_search.search_analogs(ws.store, model, doc, args.k, ws.resources).to_json())


def cmd_serve(args, ws):
    import uvicorn

    from .api import create_app

    try:
        _serving_model(ws)
    except PatentAnalogError:
        pass
    host, port = ws.settings.host_port
    uvicorn.run(create_app(ws), host=host, port=port)


def cmd_functions(args, ws):
    if args.action == "list":
        _emit(ws.registry.to_json())
        return
    if not args.function or not args.task:
        raise SystemExit("functions exec needs FUNCTION and TASK_FILE")
    task = json.loads(Path(args.task).read_text(encoding="utf-8"))
    if args.function in ("C_5", "C_7"):
        try:
            _serving_model(ws)
        except PatentAnalogError:
            pass
    _emit(ws.execute_function(args.function, task))


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", default=argparse.SUPPRESS, help="key = value settings file")
    for key in KEYS:
        flag = "--" + key.replace("_", "-")
        dest = "listen" if key == "listen" else key
        common.add_argument(flag, dest=dest, default=argparse.SUPPRESS)
    common.add_argument("--addr", dest="listen", default=argparse.SUPPRESS, help="HOST:PORT for serve")
    common.add_argument("-v", "--verbose", action="store_true", default=argparse.SUPPRESS)

    parser = argparse.ArgumentParser(prog="patent-analogs", parents=[common])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", parents=[common], help="store plain-text patents")
    p.add_argument("files", nargs="+")
    p.add_argument("--id")
    p.add_argument("--encoding", default="utf8", choices=[e.value for e in ingest.Encoding])
    p.add_argument("--format", default="plain_text", choices=[f.value for f in ingest.DocFormat])
    p.set_defaults(func=cmd_ingest)

    corpus = sub.add_parser("corpus").add_subparsers(dest="action", required=True)
    p = corpus.add_parser("build", parents=[common], help="build the normalized corpus from stored texts")
    p.add_argument("--docs", nargs="*")
    p.add_argument("--name", default="default")
    p.set_defaults(func=cmd_corpus_build)

    model = sub.add_parser("model").add_subparsers(dest="action", required=True)
    p = model.add_parser("train", parents=[common], help="train vectors on a stored corpus")
    p.add_argument("--corpus", default="default")
    p.add_argument("--name", default="model.txt")
    p.set_defaults(func=cmd_model_train)
    p = model.add_parser("init", parents=[common], help="select the model used for search")
    p.add_argument("path")
    p.set_defaults(func=cmd_model_init)

    p = sub.add_parser("index", parents=[common], help="index patents against the serving model")
    p.add_argument("files", nargs="+")
    p.add_argument("--ipc", required=True)
    p.add_argument("--title")
    p.add_argument("--encoding", default="utf8")
    p.set_defaults(func=cmd_index)

    p = sub.add_parser("search", parents=[common], help="rank stored patents against a new one")
    p.add_argument("file")
    p.add_argument("--k", type=int, default=10)
    p.add_argument("--encoding", default="utf8")
    p.set_defaults(func=cmd_search)

    p = sub.add_parser("serve", parents=[common], help="run the HTTP API")
    p.set_defaults(func=cmd_serve)

    p = sub.add_parser("functions", parents=[common], help="list or execute composed functions")
    p.add_argument("action", choices=["list", "exec"])
    p.add_argument("function", nargs="?")
    p.add_argument("task", nargs="?")
    p.set_defaults(func=cmd_functions)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    for key in (*KEYS, "config"):
        if not hasattr(args, key):
            setattr(args, key, None)
    logging.basicConfig(level=logging.INFO if getattr(args, "verbose", False) else logging.WARNING)
    try:
        ws = _workstation(args)
        args.func(args, ws)
    except PatentAnalogError as exc:
        _emit(error_envelope(exc))
        return 1
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
