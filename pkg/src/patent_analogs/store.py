"""File-backed JSON document store: one file per document, atomic replace on write."""

from __future__ import annotations

import json
import os
import re
import tempfile
import threading
from pathlib import Path
from urllib.parse import quote, unquote

from .errors import MalformedInput, NotFound, StorageCorruption

_COLLECTION = re.compile(r"[a-z_]+")


def dumps(doc) -> bytes:
    return json.dumps(doc, ensure_ascii=False, sort_keys=True, indent=1).encode("utf-8")


class DocumentStore:
    """Named collections of JSON documents under ``root``.

    Readers never take locks; writers to the same collection are serialized.
    Large non-JSON artifacts (corpora, models) live under ``root/blobs``.
    """

    def __init__(self, root):
        self.root = Path(root)
        (self.root / "docs").mkdir(parents=True, exist_ok=True)
        (self.root / "blobs").mkdir(parents=True, exist_ok=True)
        self._locks: dict[str, threading.Lock] = {}
        self._guard = threading.Lock()

    def _dir(self, collection: str) -> Path:
        if not isinstance(collection, str) or not _COLLECTION.fullmatch(collection):
            raise MalformedInput(f"collection name must match [a-z_]+, got {collection!r}")
        return self.root / "docs" / collection

    def _path(self, collection, doc_id) -> Path:
        if not doc_id:
            raise MalformedInput("document id must be non-empty")
        name = quote(str(doc_id), safe="")
        if name.startswith("."):
            name = "%2E" + name[1:]
        return self._dir(collection) / (name + ".json")

    def _lock(self, collection) -> threading.Lock:
        with self._guard:
            return self._locks.setdefault(collection, threading.Lock())

    def put(self, collection: str, doc_id: str, doc) -> None:
        path = self._path(collection, doc_id)
        data = dumps(doc)
        with self._lock(collection):
            path.parent.mkdir(parents=True, exist_ok=True)
            fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=".tmp-", suffix=".json")
            try:
                with os.fdopen(fd, "wb") as fh:
                    fh.write(data)
                    fh.flush()
                    os.fsync(fh.fileno())
                os.replace(tmp, path)
            except BaseException:
                if os.path.exists(tmp):
                    os.unlink(tmp)
                raise

    def get(self, collection: str, doc_id: str):
        path = self._path(collection, doc_id)
        try:
            raw = path.read_bytes()
        except FileNotFoundError:
            raise NotFound(f"{collection}/{doc_id} does not exist") from None
        try:
            return json.loads(raw.decode("utf-8"))
        except (UnicodeDecodeError, json.JSONDecodeError) as exc:
            raise StorageCorruption(f"{collection}/{doc_id}: {exc}") from None

    def get_bytes(self, collection: str, doc_id: str) -> bytes:
        try:
            return self._path(collection, doc_id).read_bytes()
        except FileNotFoundError:
            raise NotFound(f"{collection}/{doc_id} does not exist") from None

    def list(self, collection: str) -> list[str]:
        folder = self._dir(collection)
        if not folder.is_dir():
            return []
        return sorted(unquote(p.name[:-5]) for p in folder.glob("*.json") if not p.name.startswith(".tmp-"))

    def delete(self, collection: str, doc_id: str) -> None:
        with self._lock(collection):
            try:
                self._path(collection, doc_id).unlink()
            except FileNotFoundError:
                raise NotFound(f"{collection}/{doc_id} does not exist") from None

    def blob_path(self, name: str) -> Path:
        if not name or "/" in name or name.startswith("."):
            raise MalformedInput(f"invalid blob name {name!r}")
        return self.root / "blobs" / name


def store_put(store: DocumentStore, collection, doc_id, doc):
    store.put(collection, doc_id, doc)
    return doc


def store_get(store: DocumentStore, collection, doc_id):
    return store.get(collection, doc_id)


def store_list(store: DocumentStore, collection):
    return store.list(collection)
