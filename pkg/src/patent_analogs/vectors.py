"""Keyed word vectors: the four similarity queries and the text model format."""

from __future__ import annotations

from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import DegenerateCenter, DegenerateMean, MalformedModelFile, UnknownTerm, ZeroVector

CENTER_EPS = 1e-12


def _clamp(x: float) -> float:
    return float(min(1.0, max(-1.0, x)))


class KeyedVectors:
    """Immutable term -> vector map. Row ``i`` of ``matrix`` belongs to ``terms[i]``."""

    def __init__(self, terms: Sequence[str], matrix):
        matrix = np.array(matrix, dtype=np.float64)
        if matrix.ndim != 2 or matrix.shape[0] != len(terms) or matrix.shape[1] < 1:
            raise ValueError(f"matrix shape {matrix.shape} does not fit {len(terms)} terms")
        if len(set(terms)) != len(terms):
            raise ValueError("duplicate terms")
        if not np.isfinite(matrix).all():
            raise ValueError("vectors must be finite")
        norms = np.linalg.norm(matrix, axis=1)
        if not (norms > 0).any():
            raise ValueError("at least one vector must be nonzero")
        matrix.setflags(write=False)
        norms.setflags(write=False)
        self.terms = list(terms)
        self.matrix = matrix
        self.norms = norms
        self.index = {t: i for i, t in enumerate(self.terms)}

    @property
    def dim(self) -> int:
        return self.matrix.shape[1]

    def __len__(self):
        return len(self.terms)

    def __contains__(self, term):
        return term in self.index

    def _row(self, term) -> int:
        try:
            return self.index[term]
        except KeyError:
            raise UnknownTerm(term) from None

    def _nonzero_row(self, term) -> int:
        i = self._row(term)
        if self.norms[i] == 0:
            raise ZeroVector(term)
        return i

    def vector(self, term) -> np.ndarray:
        return self.matrix[self._row(term)]

    def similarity(self, a: str, b: str) -> float:
        i, j = self._nonzero_row(a), self._nonzero_row(b)
        return _clamp(self.matrix[i] @ self.matrix[j] / (self.norms[i] * self.norms[j]))

    def most_similar(self, term: str, k: int = 10) -> list[tuple[str, float]]:
        if k < 1:
            raise ValueError("k must be >= 1")
        q = self._nonzero_row(term)
        live = self.norms > 0
        scores = np.full(len(self.terms), -np.inf)
        scores[live] = self.matrix[live] @ self.matrix[q] / (self.norms[live] * self.norms[q])
        ranked = sorted((i for i in range(len(self.terms)) if i != q and live[i]),
                        key=lambda i: (-scores[i], self.terms[i]))
        return [(self.terms[i], _clamp(scores[i])) for i in ranked[:k]]

    def cluster_center(self, terms: Sequence[str]) -> np.ndarray:
        if not terms:
            raise ValueError("cluster needs at least one term")
        rows = [self._nonzero_row(t) for t in terms]
        unit = self.matrix[rows] / self.norms[rows, None]
        mean = unit.mean(axis=0)
        norm = np.linalg.norm(mean)
        if norm < CENTER_EPS:
            raise DegenerateCenter(f"members cancel out (mean norm {norm:.3g})")
        return mean / norm

    def n_similarity(self, set_a: Sequence[str], set_b: Sequence[str]) -> float:
        """Cosine between the raw (un-normalized) mean vectors of two term lists."""
        if not set_a or not set_b:
            raise ValueError("both term sets must be non-empty")
        mean_a = self.matrix[[self._row(t) for t in set_a]].mean(axis=0)
        mean_b = self.matrix[[self._row(t) for t in set_b]].mean(axis=0)
        na, nb = np.linalg.norm(mean_a), np.linalg.norm(mean_b)
        if na == 0 or nb == 0:
            raise DegenerateMean("a term set has a zero mean vector")
        return _clamp(mean_a @ mean_b / (na * nb))

    def save(self, path):
        lines = [f"{len(self.terms)} {self.dim}\n"]
        for term, row in zip(self.terms, self.matrix):
            lines.append(term + " " + " ".join(f"{x:.9g}" for x in row) + "\n")
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.writelines(lines)

    @classmethod
    def load(cls, path) -> "KeyedVectors":
        lines = Path(path).read_text(encoding="utf-8").splitlines()
        if not lines:
            raise MalformedModelFile(f"{path}: empty file")
        try:
            n, d = (int(x) for x in lines[0].split())
        except ValueError:
            raise MalformedModelFile(f"{path}: header must be '<terms> <dim>'") from None
        body = [line for line in lines[1:] if line.strip()]
        if len(body) != n:
            raise MalformedModelFile(f"{path}: header announces {n} terms, found {len(body)}")
        terms, rows = [], []
        for lineno, line in enumerate(body, 2):
            parts = line.split()
            if len(parts) != d + 1:
                raise MalformedModelFile(f"{path}:{lineno}: expected {d} coordinates")
            try:
                rows.append([float(x) for x in parts[1:]])
            except ValueError:
                raise MalformedModelFile(f"{path}:{lineno}: non-numeric coordinate") from None
            terms.append(parts[0])
        if len(set(terms)) != len(terms):
            raise MalformedModelFile(f"{path}: duplicate terms")
        try:
            return cls(terms, np.array(rows).reshape(n, d))
        except ValueError as exc:
            raise MalformedModelFile(f"{path}: {exc}") from None


def similarity(model: KeyedVectors, a, b):
    return model.similarity(a, b)


def most_similar(model: KeyedVectors, term, k=10):
    return model.most_similar(term, k)


def cluster_center(model: KeyedVectors, terms):
    return model.cluster_center(terms)


def n_similarity(model: KeyedVectors, set_a, set_b):
    return model.n_similarity(set_a, set_b)


def save_model(model: KeyedVectors, path):
    model.save(path)


def load_model(path) -> KeyedVectors:
    return KeyedVectors.load(path)
