"""Compositional linguistic preprocessing.

Turns Ukrainian plain text into the normalized corpus the vector model is
trained on: sentence splitting, tokenization, dictionary lemmatization and
tagging, stop-word removal, and collocation merging into ``a_b`` terms.
"""

from __future__ import annotations

import enum
import math
import re
from collections import Counter
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Iterable, Mapping

from .errors import LanguageMismatch
from .ingest import ExtractedText, Language

PHRASE_JOINER = "_"
TERMINATORS = ".!?…"
APOSTROPHES = "'’ʼ"

_WORD = re.compile(r"(?:[^\W_]|[{a}])+(?:-(?:[^\W_]|[{a}])+)*".format(a=APOSTROPHES))
_SENTENCE_END = re.compile(r"[{t}]+".format(t=re.escape(TERMINATORS)))


class Pos(str, enum.Enum):
    NOUN = "noun"
    VERB = "verb"
    ADJ = "adj"
    ADV = "adv"
    PREP = "prep"
    CONJ = "conj"
    NUM = "num"
    PUNCT = "punct"
    OTHER = "other"
    UNTAGGED = "untagged"


NOISE_POS = frozenset({Pos.PREP, Pos.CONJ, Pos.PUNCT, Pos.NUM})


@dataclass(frozen=True)
class Token:
    surface: str
    lemma: str
    pos: Pos = Pos.UNTAGGED
    is_stopword: bool = False


@dataclass(frozen=True)
class PhraseConfig:
    delta: float = 1.0
    threshold: float = 10.0
    max_passes: int = 2

    def __post_init__(self):
        if self.delta < 0:
            raise ValueError("delta must be non-negative")
        if not self.threshold > 0:
            raise ValueError("threshold must be positive")
        if self.max_passes < 1:
            raise ValueError("max_passes must be at least 1")


@dataclass
class NormalizedCorpus:
    sentences: list[list[str]] = field(default_factory=list)
    vocab_counts: dict[str, int] = field(default_factory=dict)
    total_tokens: int = 0

    @classmethod
    def from_sentences(cls, sentences: Iterable[Iterable[str]]) -> "NormalizedCorpus":
        sentences = [list(s) for s in sentences]
        sentences = [s for s in sentences if s]
        counts = Counter(t for s in sentences for t in s)
        return cls(sentences, dict(sorted(counts.items())), sum(counts.values()))

    def dumps(self) -> str:
        return "".join(" ".join(s) + "\n" for s in self.sentences)

    @classmethod
    def loads(cls, text: str) -> "NormalizedCorpus":
        return cls.from_sentences(line.split() for line in text.splitlines())

    def save(self, path):
        Path(path).write_text(self.dumps(), encoding="utf-8")

    @classmethod
    def load(cls, path) -> "NormalizedCorpus":
        return cls.loads(Path(path).read_text(encoding="utf-8"))


@dataclass
class Resources:
    """Stoplist plus the surface->lemma and lemma->pos dictionaries."""

    stoplist: frozenset = frozenset()
    lemmas: Mapping[str, str] = field(default_factory=dict)
    tags: Mapping[str, Pos] = field(default_factory=dict)

    @classmethod
    def from_files(cls, stoplist=None, lemmas=None, tags=None) -> "Resources":
        return cls(
            stoplist=frozenset(load_stoplist(stoplist)) if stoplist else frozenset(),
            lemmas=load_pairs(lemmas) if lemmas else {},
            tags={k: Pos(v) for k, v in load_pairs(tags).items()} if tags else {},
        )

    @classmethod
    def default(cls) -> "Resources":
        base = Path(__file__).parent / "resources"
        return cls.from_files(base / "stoplist_uk.txt", None, base / "pos_uk.tsv")


def _entries(path):
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        line = line.strip()
        if line and not line.startswith("#"):
            yield line


def load_stoplist(path) -> set[str]:
    return {line.lower() for line in _entries(path)}


def load_pairs(path) -> dict[str, str]:
    pairs = {}
    for n, line in enumerate(_entries(path), 1):
        key, sep, value = line.partition("\t")
        value = value.strip()
        if not sep or not key or not value or any(c.isspace() or c == PHRASE_JOINER for c in value):
            raise ValueError(f"{path}:{n}: expected 'key<TAB>value' with a single-word value")
        pairs[key.strip().lower()] = value.lower()
    return pairs


def split_sentences(text: str) -> list[str]:
    sentences = []
    start = 0
    for m in _SENTENCE_END.finditer(text):
        if set(m.group()) == {"."}:
            rest = text[m.end():].lstrip()
            if rest and (rest[0].islower() or rest[0].isdigit()):
                continue
        sentences.append(text[start:m.end()])
        start = m.end()
    sentences.append(text[start:])
    return [" ".join(s.split()) for s in sentences if s.strip()]


def tokenize(sentence: str) -> list[str]:
    return [m.group().lower() for m in _WORD.finditer(sentence)]


def lemmatize(surface: str, dictionary: Mapping[str, str]) -> str:
    return dictionary.get(surface, surface)


def pos_tag(tokens: list[Token], dictionary: Mapping[str, Pos]) -> list[Token]:
    return [replace(t, pos=Pos(dictionary.get(t.lemma, Pos.UNTAGGED))) for t in tokens]


def mark_stopwords(tokens: list[Token], stoplist) -> list[Token]:
    return [replace(t, is_stopword=t.lemma in stoplist or t.pos in NOISE_POS) for t in tokens]


def remove_stopwords(tokens: list[Token], stoplist) -> list[Token]:
    return [t for t in mark_stopwords(tokens, stoplist) if not t.is_stopword]


def analyze_sentence(sentence: str, resources: Resources) -> list[str]:
    """Per-sentence chain up to stop-word removal; returns lemmas."""
    tokens = [Token(s, lemmatize(s, resources.lemmas)) for s in tokenize(sentence)]
    tokens = remove_stopwords(pos_tag(tokens, resources.tags), resources.stoplist)
    return [t.lemma for t in tokens]


def phrase_score(count_ab: int, count_a: int, count_b: int, total: int, delta: float) -> float:
    return (count_ab - delta) * total / (count_a * count_b)


def _merge_pass(sentences, cfg):
    unigrams = Counter(t for s in sentences for t in s)
    bigrams = Counter(pair for s in sentences for pair in zip(s, s[1:]))
    total = sum(unigrams.values())
    merged_any = False
    out = []
    for s in sentences:
        new, i = [], 0
        while i < len(s):
            if i + 1 < len(s):
                a, b = s[i], s[i + 1]
                if phrase_score(bigrams[a, b], unigrams[a], unigrams[b], total, cfg.delta) > cfg.threshold:
                    new.append(a + PHRASE_JOINER + b)
                    merged_any = True
                    i += 2
                    continue
            new.append(s[i])
            i += 1
        out.append(new)
    return out, merged_any


def detect_phrases(corpus: NormalizedCorpus, cfg: PhraseConfig = PhraseConfig()) -> NormalizedCorpus:
    sentences = [list(s) for s in corpus.sentences]
    if math.isinf(cfg.threshold):
        return NormalizedCorpus.from_sentences(sentences)
    for _ in range(cfg.max_passes):
        sentences, merged = _merge_pass(sentences, cfg)
        if not merged:
            break
    return NormalizedCorpus.from_sentences(sentences)


def build_corpus(docs: list[ExtractedText], resources: Resources = Resources(),
                 cfg: PhraseConfig = PhraseConfig()) -> NormalizedCorpus:
    bad = [d.doc_id for d in docs if d.language is not Language.UK]
    if bad:
        raise LanguageMismatch(bad)
    sentences = [analyze_sentence(s, resources) for d in docs for s in split_sentences(d.text)]
    return detect_phrases(NormalizedCorpus.from_sentences(sentences), cfg)


def match_phrases(terms: list[str], vocabulary) -> list[str]:
    """Greedy longest-match of ``terms`` against known multi-word entries."""
    longest = max((t.count(PHRASE_JOINER) + 1 for t in vocabulary if PHRASE_JOINER in t), default=1)
    out, i = [], 0
    while i < len(terms):
        for span in range(min(longest, len(terms) - i), 1, -1):
            joined = PHRASE_JOINER.join(terms[i:i + span])
            if joined in vocabulary:
                out.append(joined)
                i += span
                break
        else:
            out.append(terms[i])
            i += 1
    return out
