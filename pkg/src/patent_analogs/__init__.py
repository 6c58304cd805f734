"""Patent-analog search: text normalization, SGNS word vectors, set-to-set cosine ranking."""

from .clp import NormalizedCorpus, PhraseConfig, Resources, build_corpus, detect_phrases
from .coordinator import ServiceRegistry, Workstation
from .ingest import ExtractedText, RawDocument, detect_language, extract_text
from .patent_search import classify, fill_template, index_patent, search_analogs
from .store import DocumentStore
from .trainer import TrainingConfig, train
from .vectors import KeyedVectors, load_model, save_model

__version__ = "0.1.0"
