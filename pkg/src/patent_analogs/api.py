"""HTTP JSON front door of the coordinator."""

from __future__ import annotations

import threading
import time
from typing import Any, Optional

from fastapi import FastAPI, Query, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse
from pydantic import BaseModel, Field

from . import clp, ingest, patent_search, trainer
from .coordinator import Workstation, corpus_stats, error_envelope, phrase_config, training_config, _raw_document
from .errors import MalformedInput, PatentAnalogError


class DocumentIn(BaseModel):
    id: str = Field(min_length=1)
    text: Optional[str] = None
    payload_b64: Optional[str] = None
    format: str = "plain_text"
    encoding: str = "utf8"


class CorpusBuildIn(BaseModel):
    doc_ids: Optional[list[str]] = None
    phrase_config: Optional[dict[str, Any]] = None
    name: str = "default"


class TrainIn(BaseModel):
    corpus: str = "default"
    model_name: str = "model.txt"
    dim: Optional[int] = None
    window: Optional[int] = None
    negatives: Optional[int] = None
    epochs: Optional[int] = None
    lr0: Optional[float] = None
    min_count: Optional[int] = None
    subsample: Optional[float] = None
    noise_power: Optional[float] = None
    seed: Optional[int] = None
    workers: Optional[int] = None


class InitIn(BaseModel):
    model_path: str


class PatentIn(BaseModel):
    id: str = Field(min_length=1)
    title: str = ""
    ipc_class: str = Field(min_length=1)
    text: Optional[str] = None


class TermSetsIn(BaseModel):
    set_a: list[str] = Field(min_length=1)
    set_b: list[str] = Field(min_length=1)


class TermsIn(BaseModel):
    terms: list[str] = Field(min_length=1)


class SearchIn(BaseModel):
    text: str
    k: int = Field(10, ge=1)
    id: str = "query"


class TrainingJob:
    def __init__(self):
        self.lock = threading.Lock()
        self.status = {"state": "idle"}

    def start(self, ws: Workstation, body: TrainIn) -> dict:
        overrides = body.model_dump(exclude={"corpus", "model_name"}, exclude_none=True)
        cfg = training_config(overrides, ws.training)
        corpus = ws.load_corpus(body.corpus)
        with self.lock:
            if self.status["state"] == "running":
                raise MalformedInput("a training job is already running")
            self.status = {"state": "running", "corpus": body.corpus, "config": cfg.to_json(), "started": time.time()}
        threading.Thread(target=self._run, args=(ws, corpus, cfg, body.model_name), daemon=True).start()
        return dict(self.status)

    def _run(self, ws, corpus, cfg, name):
        try:
            model = trainer.train(corpus, cfg)
            path = ws.save_model(model, name, cfg)
            update = {"state": "done", "model_path": str(path), "terms": len(model)}
        except Exception as exc:  # reported through /model/status
            update = {"state": "failed", "error": error_envelope(exc)["error"]}
        with self.lock:
            self.status = {**self.status, **update, "finished": time.time()}


def create_app(ws: Workstation) -> FastAPI:
    app = FastAPI(title="patent-analogs")
    app.state.workstation = ws
    job = TrainingJob()
    app.state.training_job = job

    @app.exception_handler(PatentAnalogError)
    async def _domain_error(request: Request, exc: PatentAnalogError):
        return JSONResponse(error_envelope(exc, request.headers.get("x-correlation-id")), status_code=exc.status)

    @app.exception_handler(RequestValidationError)
    async def _malformed(request: Request, exc: RequestValidationError):
        body = error_envelope(MalformedInput(str(exc.errors())), request.headers.get("x-correlation-id"))
        return JSONResponse(body, status_code=400)

    @app.post("/documents", status_code=201)
    def upload(doc: DocumentIn):
        extracted = ingest.extract_text(_raw_document(doc.model_dump(exclude_none=True)))
        ws.store.put(patent_search.TEXTS, extracted.doc_id, extracted.to_json())
        return {"doc_id": extracted.doc_id, "language": extracted.language.value, "chars": len(extracted.text)}

    @app.post("/corpus/build")
    def build_corpus(body: CorpusBuildIn):
        ids = body.doc_ids if body.doc_ids is not None else ws.store.list(patent_search.TEXTS)
        docs = [ingest.ExtractedText.from_json(ws.store.get(patent_search.TEXTS, i)) for i in ids]
        corpus = clp.build_corpus(docs, ws.resources, phrase_config(body.phrase_config, ws.phrases))
        ws.save_corpus(corpus, body.name, ids)
        return {"name": body.name, **corpus_stats(corpus)}

    @app.post("/model/train", status_code=202)
    def train_model(body: TrainIn):
        return job.start(ws, body)

    @app.get("/model/status")
    def model_status():
        with job.lock:
            status = dict(job.status)
        status["serving"] = ws.model_path
        return status

    @app.post("/model/init")
    def init_model(body: InitIn):
        model = ws.init_model(body.model_path)
        return {"model_path": ws.model_path, "terms": len(model), "dim": model.dim}

    @app.post("/patents", status_code=201)
    def index(body: PatentIn):
        if body.text is not None:
            doc = ingest.extract_text(ingest.RawDocument(body.id, body.text.encode("utf-8")))
        else:
            doc = ingest.ExtractedText.from_json(ws.store.get(patent_search.TEXTS, body.id))
        record = patent_search.index_patent(ws.store, ws.require_model().index, doc,
                                            {"title": body.title, "ipc_class": body.ipc_class}, ws.resources)
        return record.to_json()

    @app.get("/similarity")
    def similarity(a: str = Query(min_length=1), b: str = Query(min_length=1)):
        return {"a": a, "b": b, "score": ws.require_model().similarity(a, b)}

    @app.get("/associates")
    def associates(term: str = Query(min_length=1), k: int = Query(10, ge=1)):
        hits = ws.require_model().most_similar(term, k)
        return {"term": term, "results": [{"term": t, "score": s} for t, s in hits]}

    @app.post("/n-similarity")
    def n_similarity(body: TermSetsIn):
        return {"score": ws.require_model().n_similarity(body.set_a, body.set_b)}

    @app.post("/cluster-center")
    def cluster_center(body: TermsIn):
        return {"center": ws.require_model().cluster_center(body.terms).tolist()}

    @app.post("/search")
    def search(body: SearchIn):
        doc = ingest.extract_text(ingest.RawDocument(body.id, body.text.encode("utf-8")))
        return patent_search.search_analogs(ws.store, ws.require_model(), doc, body.k, ws.resources).to_json()

    @app.get("/functions")
    def functions():
        return ws.registry.to_json()

    @app.post("/functions/{fid}/execute")
    def execute(fid: str, task: dict[str, Any]):
        try:
            return ws.execute_function(fid, task)
        except PatentAnalogError as exc:
            corr = task.get("correlation_id") if isinstance(task, dict) else None
            return JSONResponse(error_envelope(exc, corr, fid), status_code=exc.status)

    return app
