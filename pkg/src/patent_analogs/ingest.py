"""Document intake: plain-text extraction, language detection, encoding conversion."""

from __future__ import annotations

import enum
import re
import unicodedata
from dataclasses import dataclass

from .errors import EncodingError, UnsupportedFormat


class DocFormat(str, enum.Enum):
    PLAIN_TEXT = "plain_text"
    PDF = "pdf"
    DOC = "doc"
    DOCX = "docx"


class Encoding(str, enum.Enum):
    UTF8 = "utf8"
    WIN1251 = "win1251"
    UNKNOWN = "unknown"


class Language(str, enum.Enum):
    UK = "uk"
    RU = "ru"
    EN = "en"
    UNKNOWN = "unknown"


_CODECS = {Encoding.UTF8: "utf-8", Encoding.WIN1251: "cp1251", Encoding.UNKNOWN: "utf-8"}

UKRAINIAN_MARKERS = frozenset("іїєґ")
DOMINANCE = 0.5

_HSPACE = re.compile(r"[^\S\n]+")


@dataclass(frozen=True)
class RawDocument:
    id: str
    payload: bytes
    declared_format: DocFormat = DocFormat.PLAIN_TEXT
    declared_encoding: Encoding = Encoding.UTF8

    def __post_init__(self):
        if not self.id:
            raise ValueError("document id must be non-empty")
        object.__setattr__(self, "declared_format", DocFormat(self.declared_format))
        object.__setattr__(self, "declared_encoding", Encoding(self.declared_encoding))


@dataclass(frozen=True)
class ExtractedText:
    doc_id: str
    text: str
    language: Language

    def to_json(self):
        return {"doc_id": self.doc_id, "text": self.text, "language": self.language.value}

    @classmethod
    def from_json(cls, data):
        return cls(data["doc_id"], data["text"], Language(data["language"]))


def _decode(payload: bytes, encoding: Encoding) -> str:
    try:
        return payload.decode(_CODECS[Encoding(encoding)])
    except UnicodeDecodeError as exc:
        raise EncodingError(f"payload is not valid {encoding.value}: {exc.reason} at byte {exc.start}") from exc


def normalize_whitespace(text: str) -> str:
    text = text.replace("\r\n", "\n").replace("\r", "\n").replace("\x00", "")
    lines = (_HSPACE.sub(" ", line).strip() for line in text.split("\n"))
    return "\n".join(lines).strip("\n")


def extract_text(doc: RawDocument) -> ExtractedText:
    if doc.declared_format is not DocFormat.PLAIN_TEXT:
        raise UnsupportedFormat(f"{doc.id}: {doc.declared_format.value} parsing is not supported, supply plain text")
    text = normalize_whitespace(_decode(doc.payload, doc.declared_encoding))
    return ExtractedText(doc.id, text, detect_language(text))


def detect_language(text: str) -> Language:
    """Classify by letter script; Ukrainian needs one of the letters і ї є ґ."""
    cyrillic = latin = letters = 0
    marked = False
    for ch in text:
        if not ch.isalpha():
            continue
        letters += 1
        name = unicodedata.name(ch, "")
        if name.startswith("CYRILLIC"):
            cyrillic += 1
            if ch.lower() in UKRAINIAN_MARKERS:
                marked = True
        elif name.startswith("LATIN"):
            latin += 1
    if not letters:
        return Language.UNKNOWN
    if cyrillic / letters > DOMINANCE:
        return Language.UK if marked else Language.RU
    if latin / letters > DOMINANCE:
        return Language.EN
    return Language.UNKNOWN


def convert_encoding(payload: bytes, source: Encoding | str, target: Encoding | str) -> tuple[bytes, int]:
    """Re-encode ``payload``; returns the new bytes and how many characters became '?'."""
    source, target = Encoding(source), Encoding(target)
    if Encoding.UNKNOWN in (source, target):
        raise EncodingError("conversion needs explicit utf8 or win1251 encodings")
    text = _decode(payload, source)
    codec = _CODECS[target]
    out = []
    replaced = 0
    for ch in text:
        try:
            out.append(ch.encode(codec))
        except UnicodeEncodeError:
            out.append(b"?")
            replaced += 1
    return b"".join(out), replaced
