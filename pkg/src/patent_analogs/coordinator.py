"""Composite web service: atomic-service registry, composed functions, and their pipelines.

The workstation is modelled as a triple of atomic services (``aws_1`` ..
``aws_24``), a coordinator that routes tasks among them, and a set of
functions, each a non-empty subset of the services. Functions whose members
are all served locally run a fixed pipeline; every stage is tagged with the
service that performs it, and a stage outside the function's own subset is
refused.
"""

from __future__ import annotations

import base64
import contextlib
import enum
import logging
import re
import threading
import time
import uuid
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping

from . import clp, ingest, patent_search, trainer
from .clp import NormalizedCorpus, PhraseConfig, Resources
from .errors import (
    EmptyServiceSet,
    LanguageMismatch,
    MalformedInput,
    ModelNotInitialized,
    NoPipeline,
    NotFound,
    NotExecutable,
    PatentAnalogError,
    StageError,
    UnknownFunction,
    UnknownServiceId,
)
from .ingest import Language
from .store import DocumentStore
from .trainer import TrainingConfig
from .vectors import KeyedVectors

log = logging.getLogger(__name__)

M_SERVICES = 24
AWS = tuple(f"aws_{i}" for i in range(1, M_SERVICES + 1))
_SERVICE_ID = re.compile(r"aws_([1-9][0-9]*)")


class Status(str, enum.Enum):
    LOCAL = "local"
    DECLARED_EXTERNAL = "declared_external"
    UNAVAILABLE = "unavailable"


SERVICE_NAMES = {
    "aws_1": "text extraction from pdf originals",
    "aws_2": "text extraction from doc/docx originals",
    "aws_3": "language detection",
    "aws_4": "automatic summarization (uk)",
    "aws_5": "encoding conversion utf8 <-> win1251",
    "aws_6": "pdf title/author/page-count extraction",
    "aws_7": "keyword extraction (uk)",
    "aws_8": "sentence splitting (uk)",
    "aws_9": "tokenization into lemmas with part-of-speech tags (uk)",
    "aws_10": "tokenization into raw word forms (uk)",
    "aws_11": "compositional term detection (uk)",
    "aws_12": "stop-word removal",
    "aws_13": "lemmatization (uk)",
    "aws_14": "neural syntactic parsing",
    "aws_15": "scholarly publication search agent",
    "aws_16": "full-text search indexing",
    "aws_17": "JSON document storage",
    "aws_18": "ontology editor",
    "aws_19": "pattern discovery and classification (KONFOR)",
    "aws_20": "compositional text processing control (KONSPEKT), headless",
    "aws_21": "vector model queries",
    "aws_22": "personal ontology knowledge base UI",
    "aws_23": "document template generation and filling",
    "aws_24": "additional services (built-in HTTP layer)",
}

# aws_1/aws_2 serve the plain-text path only; aws_20 is realized by the CLP pipeline
# without its GUI; aws_24 resolves to this package's own HTTP layer.
LOCAL_SERVICES = frozenset(f"aws_{i}" for i in (1, 2, 3, 5, 8, 9, 10, 11, 12, 13, 17, 20, 21, 23, 24))

BUILTIN_FUNCTIONS = {
    "C_1": (1, 3, 5, 6, 8, 9, 11, 12, 14, 16, 20),
    "C_2": (1, 9, 11, 13, 15, 18, 22, 24),
    "C_3": (1, 9, 11, 13, 15, 18, 22),
    "C_4": (1, 3, 5, 8, 12, 20, 24),
    "C_5": (21, 24),
    "C_6": (1, 3, 8, 14, 20, 24),
    "C_7": (1, 3, 21, 23, 24),
}
BUILTIN_FUNCTIONS = {fid: frozenset(f"aws_{k}" for k in ks) for fid, ks in BUILTIN_FUNCTIONS.items()}
N_FUNCTIONS = 7

assert len(AWS) == M_SERVICES and len(SERVICE_NAMES) == M_SERVICES
assert len(BUILTIN_FUNCTIONS) == N_FUNCTIONS
assert all(fn <= set(AWS) for fn in BUILTIN_FUNCTIONS.values())


def service_id(value: str) -> str:
    m = _SERVICE_ID.fullmatch(str(value))
    if not m or not 1 <= int(m.group(1)) <= M_SERVICES:
        raise UnknownServiceId(f"unknown atomic service {value!r}; valid ids are aws_1..aws_{M_SERVICES}")
    return m.group(0)


def _service_key(sid: str) -> int:
    return int(sid.split("_")[1])


@dataclass(frozen=True)
class ServiceDescriptor:
    status: Status
    endpoint: str | None = None
    description: str = ""

    def to_json(self):
        return {"status": self.status.value, "endpoint": self.endpoint, "description": self.description}


@dataclass(frozen=True)
class FunctionDef:
    id: str
    services: frozenset
    executable: bool
    missing: tuple = ()

    def to_json(self):
        return {"id": self.id, "services": sorted(self.services, key=_service_key),
                "executable": self.executable, "missing": list(self.missing)}


class ServiceRegistry:
    """Service statuses and function definitions; mutations are serialized."""

    def __init__(self):
        self._lock = threading.RLock()
        self.services: dict[str, ServiceDescriptor] = {}
        self.functions: dict[str, FunctionDef] = {}
        for sid in AWS:
            status = Status.LOCAL if sid in LOCAL_SERVICES else Status.DECLARED_EXTERNAL
            self.services[sid] = ServiceDescriptor(status, f"local:{sid}" if status is Status.LOCAL else None,
                                                   SERVICE_NAMES[sid])
        for fid, services in BUILTIN_FUNCTIONS.items():
            self.define_function(fid, services)

    def register_service(self, sid: str, descriptor: ServiceDescriptor) -> "ServiceRegistry":
        sid = service_id(sid)
        with self._lock:
            self.services[sid] = descriptor
            for fid, fn in list(self.functions.items()):
                self.functions[fid] = self._make(fid, fn.services)
        return self

    def _make(self, fid, services) -> FunctionDef:
        missing = tuple(sorted((s for s in services if self.services[s].status is not Status.LOCAL), key=_service_key))
        return FunctionDef(fid, frozenset(services), not missing, missing)

    def define_function(self, fid: str, services) -> FunctionDef:
        services = frozenset(service_id(s) for s in services)
        if not services:
            raise EmptyServiceSet(f"function {fid} needs at least one atomic service")
        with self._lock:
            fn = self._make(fid, services)
            self.functions[fid] = fn
        return fn

    def function(self, fid: str) -> FunctionDef:
        try:
            return self.functions[fid]
        except KeyError:
            raise UnknownFunction(f"no function {fid!r}; defined: {', '.join(sorted(self.functions))}") from None

    def to_json(self):
        return {
            "services": {sid: d.to_json() for sid, d in self.services.items()},
            "functions": [self.functions[f].to_json() for f in sorted(self.functions)],
        }


def register_service(registry: ServiceRegistry, sid, descriptor):
    return registry.register_service(sid, descriptor)


def define_function(registry: ServiceRegistry, fid, services):
    return registry.define_function(fid, services)


DEFAULT_TEMPLATE = """ЗАЯВКА НА ВИНАХІД

Заявник: {{applicant}}
Назва винаходу: {{title}}
Ідентифікатор документа: {{query_id}}

Відомості про аналоги винаходу:
{{analogs}}
"""


@dataclass
class _Run:
    function: FunctionDef
    correlation_id: str
    stages: list = field(default_factory=list)
    dropped_oov_terms: int = 0

    @contextlib.contextmanager
    def stage(self, service: str, name: str):
        if service not in self.function.services:
            raise RuntimeError(f"{self.function.id} must not dispatch to {service}")
        started = time.perf_counter()
        try:
            yield
        except StageError:
            raise
        except Exception as exc:
            raise StageError(service, exc) from exc
        finally:
            self.stages.append({"service": service, "stage": name,
                                "elapsed_ms": round((time.perf_counter() - started) * 1e3, 3)})

    @property
    def audit(self) -> list[str]:
        return [s["service"] for s in self.stages]


def _raw_document(item: Mapping) -> ingest.RawDocument:
    if not isinstance(item, Mapping) or not item.get("id"):
        raise MalformedInput("every document needs a non-empty 'id'")
    encoding = item.get("encoding", "utf8")
    fmt = item.get("format", "plain_text")
    try:
        if "payload_b64" in item:
            payload = base64.b64decode(item["payload_b64"], validate=True)
        elif isinstance(item.get("text"), str):
            payload, encoding = item["text"].encode("utf-8"), "utf8"
        else:
            raise MalformedInput(f"document {item['id']}: give 'text' or 'payload_b64'")
        return ingest.RawDocument(str(item["id"]), payload, fmt, encoding)
    except (ValueError, TypeError) as exc:
        if isinstance(exc, PatentAnalogError):
            raise
        raise MalformedInput(f"document {item.get('id')}: {exc}") from None


def _documents(payload, key="documents") -> list[Mapping]:
    docs = payload.get(key, [])
    if not isinstance(docs, list):
        raise MalformedInput(f"'{key}' must be a list")
    return docs


class Workstation:
    """The coordinator plus the state its pipelines share: store, resources, served model."""

    def __init__(self, store: DocumentStore, resources: Resources | None = None,
                 training: TrainingConfig = TrainingConfig(), phrases: PhraseConfig = PhraseConfig(),
                 registry: ServiceRegistry | None = None):
        self.store = store
        self.resources = resources if resources is not None else Resources.default()
        self.training = training
        self.phrases = phrases
        self.registry = registry or ServiceRegistry()
        self.model: KeyedVectors | None = None
        self.model_path = None
        self._model_lock = threading.Lock()
        self.pipelines = {"C_4": self._run_c4, "C_5": self._run_c5, "C_7": self._run_c7}

    # serving-process model ------------------------------------------------
    def init_model(self, path) -> KeyedVectors:
        path = self.resolve_model_path(path)
        if not path.is_file():
            raise NotFound(f"model file {path} does not exist")
        model = KeyedVectors.load(path)
        with self._model_lock:
            self.model, self.model_path = model, str(path)
        return model

    def set_model(self, model: KeyedVectors, path=None):
        with self._model_lock:
            self.model, self.model_path = model, str(path) if path else None

    def require_model(self) -> KeyedVectors:
        if self.model is None:
            raise ModelNotInitialized("no vector model is initialized; train one or call model init")
        return self.model

    def resolve_model_path(self, path):
        p = Path(path)
        if not p.is_absolute() and not p.exists():
            p = self.store.blob_path(str(path))
        return p

    def save_model(self, model: KeyedVectors, name: str, config: TrainingConfig | None = None):
        path = self.store.blob_path(name)
        model.save(path)
        self.store.put("models", name, {"name": name, "path": str(path), "terms": len(model),
                                        "dim": model.dim, "config": config.to_json() if config else None})
        return path

    def save_corpus(self, corpus: NormalizedCorpus, name: str, doc_ids):
        path = self.store.blob_path(f"corpus-{name}.txt")
        corpus.save(path)
        self.store.put("corpora", name, {"name": name, "path": str(path), "doc_ids": list(doc_ids),
                                         **corpus_stats(corpus)})
        return path

    def load_corpus(self, name: str) -> NormalizedCorpus:
        meta = self.store.get("corpora", name)
        return NormalizedCorpus.load(meta["path"])

    # execution -------------------------------------------------------------
    def execute_function(self, fid: str, task: Mapping) -> dict:
        fn = self.registry.function(fid)
        if not isinstance(task, Mapping):
            raise MalformedInput("task envelope must be a JSON object")
        payload = task.get("payload", {})
        if not isinstance(payload, Mapping):
            raise MalformedInput("task payload must be a JSON object")
        if not fn.executable:
            raise NotExecutable(fid, fn.missing)
        pipeline = self.pipelines.get(fid)
        if pipeline is None:
            raise NoPipeline(f"{fid} has no pipeline bound in this coordinator")
        run = _Run(fn, str(task.get("correlation_id") or uuid.uuid4()))
        log.info("executing %s [%s]", fid, run.correlation_id)
        result = pipeline(run, payload)
        return {"correlation_id": run.correlation_id, "function": fid, "status": "ok",
                "stages": run.stages, "dropped_oov_terms": run.dropped_oov_terms, "result": result}

    def _extract(self, run, items):
        with run.stage("aws_1", "extract_text"):
            return [ingest.extract_text(_raw_document(item)) for item in items]

    def _check_language(self, run, texts):
        with run.stage("aws_3", "detect_language"):
            texts = [ingest.ExtractedText(t.doc_id, t.text, ingest.detect_language(t.text)) for t in texts]
            bad = [t.doc_id for t in texts if t.language is not Language.UK]
            if bad:
                raise LanguageMismatch(bad)
            return texts

    def _run_c4(self, run, payload):
        """Normalized-corpus construction."""
        items = _documents(payload)
        if not items:
            raise MalformedInput("C_4 needs at least one document")
        cfg = phrase_config(payload.get("phrase_config"), self.phrases)
        replaced = 0
        with run.stage("aws_5", "convert_encoding"):
            converted = []
            for item in items:
                if item.get("encoding") == "win1251" and "payload_b64" in item:
                    raw = _raw_document(item)
                    data, n = ingest.convert_encoding(raw.payload, "win1251", "utf8")
                    replaced += n
                    item = {**item, "payload_b64": base64.b64encode(data).decode("ascii"), "encoding": "utf8"}
                converted.append(item)
        texts = self._check_language(run, self._extract(run, converted))
        with run.stage("aws_8", "split_sentences"):
            sentences = [s for t in texts for s in clp.split_sentences(t.text)]
        with run.stage("aws_20", "tokenize_lemmatize_tag"):
            res = self.resources
            tagged = [clp.pos_tag([clp.Token(w, clp.lemmatize(w, res.lemmas)) for w in clp.tokenize(s)], res.tags)
                      for s in sentences]
        with run.stage("aws_12", "remove_stopwords"):
            cleaned = [[t.lemma for t in clp.remove_stopwords(tokens, res.stoplist)] for tokens in tagged]
        with run.stage("aws_20", "detect_phrases"):
            corpus = clp.detect_phrases(NormalizedCorpus.from_sentences(cleaned), cfg)
        name = str(payload.get("corpus_name") or "default")
        with run.stage("aws_24", "persist_corpus"):
            for t in texts:
                self.store.put(patent_search.TEXTS, t.doc_id, t.to_json())
            path = self.save_corpus(corpus, name, [t.doc_id for t in texts])
        return {"corpus_name": name, "corpus_path": str(path), "encoding_replacements": replaced,
                **corpus_stats(corpus)}

    def _run_c5(self, run, payload):
        """Vector-model queries."""
        if payload.get("model_path"):
            with run.stage("aws_24", "init_model"):
                self.init_model(payload["model_path"])
        with run.stage("aws_21", "query_model"):
            return vector_query(self.require_model(), payload)

    def _run_c7(self, run, payload):
        """Analog search for a new patent and the filled application document."""
        items = _documents(payload)
        query = payload.get("query")
        if not isinstance(query, Mapping):
            raise MalformedInput("C_7 needs a 'query' document")
        k = payload.get("k", 10)
        if not isinstance(k, int) or k < 1:
            raise MalformedInput("'k' must be a positive integer")
        texts = self._check_language(run, self._extract(run, [*items, query]))
        existing, new = texts[:-1], texts[-1]
        meta = {item["id"]: item for item in items}

        model_name = None
        with run.stage("aws_24", "prepare_model"):
            if payload.get("model_path"):
                model = self.init_model(payload["model_path"])
            elif existing:
                cfg = phrase_config(payload.get("phrase_config"), self.phrases)
                corpus = clp.build_corpus(existing, self.resources, cfg)
                self.save_corpus(corpus, str(payload.get("corpus_name") or "default"), [t.doc_id for t in existing])
                tcfg = training_config(payload.get("training"), self.training)
                model = trainer.train(corpus, tcfg)
                model_name = str(payload.get("model_name") or "model.txt")
                self.set_model(model, self.save_model(model, model_name, tcfg))
            else:
                model = self.require_model()
        with run.stage("aws_24", "index_patents"):
            for t in existing:
                patent_search.index_patent(self.store, model.index, t, meta[t.doc_id], self.resources)
        with run.stage("aws_24", "extract_query_terms"):
            terms, dropped = patent_search.extract_terms(new, model.index, self.resources)
            run.dropped_oov_terms = dropped
        with run.stage("aws_21", "rank_analogs"):
            patents = patent_search.load_patents(self.store)
            ranked = patent_search.rank_analogs(patents, model, terms, k)
        search = patent_search.SearchResult(new.doc_id, dropped, ranked)
        titles = {p.id: p.title for p in patents}
        with run.stage("aws_23", "fill_template"):
            fields = {
                "title": str(query.get("title") or new.doc_id),
                "query_id": new.doc_id,
                "analogs": format_analogs(ranked, titles),
                "top_analog": ranked[0].patent_id,
                **{str(k_): str(v) for k_, v in (payload.get("fields") or {}).items()},
            }
            document = patent_search.fill_template(payload.get("template") or DEFAULT_TEMPLATE, fields)
        return {"search": search.to_json(), "application": document, "model": self.model_path or model_name}


def format_analogs(ranked, titles) -> str:
    lines = []
    for n, r in enumerate(ranked, 1):
        lines.append(f"{n}. {r.patent_id} {titles.get(r.patent_id, '')} "
                     f"(cosine {r.score:.4f}, {'аналог' if r.verdict is patent_search.Verdict.SIMILAR else 'не аналог'})")
    return "\n".join(lines)


def corpus_stats(corpus: NormalizedCorpus) -> dict:
    return {"sentences": len(corpus.sentences), "vocab_size": len(corpus.vocab_counts),
            "total_tokens": corpus.total_tokens}


def _config(cls, overrides, base):
    if overrides is None:
        return base
    if not isinstance(overrides, Mapping):
        raise MalformedInput(f"{cls.__name__} must be a JSON object")
    known = set(base.__dataclass_fields__)
    unknown = set(overrides) - known
    if unknown:
        raise MalformedInput(f"unknown {cls.__name__} keys: {', '.join(sorted(unknown))}")
    try:
        return cls(**{**base.__dict__, **overrides})
    except (TypeError, ValueError) as exc:
        raise MalformedInput(str(exc)) from None


def phrase_config(overrides, base=PhraseConfig()) -> PhraseConfig:
    return _config(PhraseConfig, overrides, base)


def training_config(overrides, base=TrainingConfig()) -> TrainingConfig:
    return _config(TrainingConfig, overrides, base)


def vector_query(model: KeyedVectors, payload: Mapping) -> dict:
    op = payload.get("op")
    try:
        if op == "similarity":
            return {"op": op, "score": model.similarity(payload["a"], payload["b"])}
        if op == "most_similar":
            hits = model.most_similar(payload["term"], int(payload.get("k", 10)))
            return {"op": op, "results": [{"term": t, "score": s} for t, s in hits]}
        if op == "cluster_center":
            return {"op": op, "center": model.cluster_center(list(payload["terms"])).tolist()}
        if op == "n_similarity":
            return {"op": op, "score": model.n_similarity(list(payload["set_a"]), list(payload["set_b"]))}
    except KeyError as exc:
        raise MalformedInput(f"{op} needs field {exc.args[0]!r}") from None
    raise MalformedInput(f"unknown vector operation {op!r}")


def error_envelope(exc: Exception, correlation_id=None, function=None) -> dict:
    error = {"type": type(exc).__name__, "message": str(exc)}
    if isinstance(exc, StageError):
        error["service"] = exc.service
        error["cause"] = type(exc.cause).__name__
    if isinstance(exc, NotExecutable):
        error["missing"] = exc.missing
    return {"correlation_id": correlation_id, "function": function, "status": "error", "error": error}
