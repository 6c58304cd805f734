"""Patent indexing, analog ranking and verdicts, and application templates."""

from __future__ import annotations

import enum
import re
from dataclasses import asdict, dataclass, field
from typing import Mapping

from .clp import Resources, analyze_sentence, match_phrases, split_sentences
from .errors import EmptyStore, EmptyTermArray, LanguageMismatch, MalformedInput, MissingField
from .ingest import ExtractedText, Language
from .store import DocumentStore
from .vectors import KeyedVectors

PATENTS = "patents"
TEXTS = "texts"
SIMILAR_ABOVE = 0.5

_PLACEHOLDER = re.compile(r"\{\{\s*([A-Za-z_][A-Za-z0-9_]*)\s*\}\}")


class Verdict(str, enum.Enum):
    SIMILAR = "similar"
    DISSIMILAR = "dissimilar"


@dataclass
class PatentRecord:
    id: str
    title: str
    ipc_class: str
    term_array: list[str]
    text_ref: str

    def to_json(self):
        return asdict(self)

    @classmethod
    def from_json(cls, data):
        return cls(data["id"], data["title"], data["ipc_class"], list(data["term_array"]), data["text_ref"])


@dataclass(frozen=True)
class RankedAnalog:
    patent_id: str
    score: float
    verdict: Verdict

    def to_json(self):
        return {"patent_id": self.patent_id, "score": self.score, "verdict": self.verdict.value}


@dataclass
class SearchResult:
    query_id: str
    dropped_oov_terms: int
    results: list[RankedAnalog] = field(default_factory=list)

    def to_json(self):
        return {"query_id": self.query_id, "dropped_oov_terms": self.dropped_oov_terms,
                "results": [r.to_json() for r in self.results]}


def classify(score: float) -> Verdict:
    # 0.5 itself is dissimilar: the screening rule only flags strictly closer contexts
    return Verdict.SIMILAR if score > SIMILAR_ABOVE else Verdict.DISSIMILAR


def extract_terms(doc: ExtractedText, vocabulary, resources: Resources = Resources()) -> tuple[list[str], int]:
    """Normalize one document against an existing model vocabulary.

    Multi-word terms come from greedy longest matching against the
    vocabulary instead of fresh collocation statistics. Returns the kept
    terms and how many out-of-vocabulary terms were dropped.
    """
    if doc.language is not Language.UK:
        raise LanguageMismatch([doc.doc_id])
    terms = [t for s in split_sentences(doc.text)
             for t in match_phrases(analyze_sentence(s, resources), vocabulary)]
    kept = [t for t in terms if t in vocabulary]
    return kept, len(terms) - len(kept)


def index_patent(store: DocumentStore, model_vocab, doc: ExtractedText, metadata: Mapping,
                 resources: Resources = Resources()) -> PatentRecord:
    title = str(metadata.get("title") or doc.doc_id)
    ipc_class = str(metadata.get("ipc_class") or "").strip()
    if not ipc_class:
        raise MalformedInput(f"{doc.doc_id}: ipc_class must be non-empty")
    terms, _ = extract_terms(doc, model_vocab, resources)
    if not terms:
        raise EmptyTermArray(f"{doc.doc_id}: no term of the document is in the model vocabulary")
    store.put(TEXTS, doc.doc_id, doc.to_json())
    record = PatentRecord(doc.doc_id, title, ipc_class, terms, f"{TEXTS}/{doc.doc_id}")
    store.put(PATENTS, record.id, record.to_json())
    return record


def load_patents(store: DocumentStore) -> list[PatentRecord]:
    return [PatentRecord.from_json(store.get(PATENTS, pid)) for pid in store.list(PATENTS)]


def rank_analogs(patents: list[PatentRecord], model: KeyedVectors, terms: list[str], k: int) -> list[RankedAnalog]:
    if k < 1:
        raise MalformedInput("k must be >= 1")
    if not patents:
        raise EmptyStore("no indexed patents to compare against")
    if not terms:
        raise EmptyTermArray("query has no in-vocabulary terms")
    scored = []
    for p in patents:
        # records indexed under an earlier model may hold terms the current one lacks
        known = [t for t in p.term_array if t in model.index]
        if known:
            scored.append((model.n_similarity(terms, known), p.id))
    scored.sort(key=lambda sp: (-sp[0], sp[1]))
    return [RankedAnalog(pid, score, classify(score)) for score, pid in scored[:k]]


def search_analogs(store: DocumentStore, model: KeyedVectors, new_patent: ExtractedText, k: int = 10,
                   resources: Resources = Resources()) -> SearchResult:
    patents = load_patents(store)
    if not patents:
        raise EmptyStore("no indexed patents to compare against")
    terms, dropped = extract_terms(new_patent, model.index, resources)
    if not terms:
        raise EmptyTermArray(f"{new_patent.doc_id}: no term of the query is in the model vocabulary")
    return SearchResult(new_patent.doc_id, dropped, rank_analogs(patents, model, terms, k))


def fill_template(template: str, fields: Mapping[str, str]) -> str:
    missing = [m.group(1) for m in _PLACEHOLDER.finditer(template) if m.group(1) not in fields]
    if missing:
        raise MissingField(missing)
    return _PLACEHOLDER.sub(lambda m: str(fields[m.group(1)]), template)
