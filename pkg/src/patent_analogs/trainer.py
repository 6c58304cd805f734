"""Skip-gram with negative sampling over a normalized corpus."""

from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass

import numpy as np
from numba import njit

from .clp import NormalizedCorpus
from .errors import DimensionMismatch, DomainError, EmptyVocabulary
from .vectors import KeyedVectors

log = logging.getLogger(__name__)

LR_FLOOR = 1e-4
MAX_RESAMPLE = 100


@dataclass(frozen=True)
class TrainingConfig:
    dim: int = 100
    window: int = 5
    negatives: int = 5
    epochs: int = 5
    lr0: float = 0.025
    min_count: int = 5
    subsample: float = 1e-3
    noise_power: float = 0.75
    seed: int = 1
    workers: int = 1

    def __post_init__(self):
        for name in ("dim", "window", "negatives", "epochs", "min_count", "workers"):
            if int(getattr(self, name)) < 1:
                raise ValueError(f"{name} must be >= 1")
        if not self.lr0 > 0:
            raise ValueError("lr0 must be positive")
        if not 0 <= self.subsample <= 1:
            raise ValueError("subsample must lie in [0, 1]")
        if not -(2**63) <= self.seed < 2**64:
            raise ValueError("seed must fit in 64 bits")

    def to_json(self):
        return asdict(self)


class Vocabulary:
    """Terms above ``min_count`` indexed by descending count, ties by term."""

    def __init__(self, counts: dict[str, int], min_count: int = 1, noise_power: float = 0.75):
        kept = sorted(((t, c) for t, c in counts.items() if c >= min_count), key=lambda tc: (-tc[1], tc[0]))
        if not kept:
            raise EmptyVocabulary(f"no term occurs at least {min_count} times")
        self.terms = [t for t, _ in kept]
        self.counts = np.array([c for _, c in kept], dtype=np.int64)
        self.index = {t: i for i, t in enumerate(self.terms)}
        weights = self.counts.astype(np.float64) ** noise_power
        self.noise_probs = weights / weights.sum()
        self._noise_cdf = np.cumsum(self.noise_probs)

    def __len__(self):
        return len(self.terms)

    def __contains__(self, term):
        return term in self.index

    @property
    def entries(self) -> dict[str, tuple[int, int]]:
        return {t: (i, int(c)) for i, (t, c) in enumerate(zip(self.terms, self.counts))}

    def sample_noise(self, rng: np.random.Generator, size=None):
        idx = np.searchsorted(self._noise_cdf, rng.random(size), side="right")
        return np.minimum(idx, len(self.terms) - 1)


def build_vocab(corpus: NormalizedCorpus, cfg: TrainingConfig) -> Vocabulary:
    return Vocabulary(corpus.vocab_counts, cfg.min_count, cfg.noise_power)


def subsample_keep_prob(f: float, t: float) -> float:
    if not 0 < f <= 1:
        raise DomainError(f"relative frequency must lie in (0, 1], got {f}")
    if t == 0:
        return 1.0
    return min(1.0, math.sqrt(t / f))


def sigmoid(x: float) -> float:
    if x < -700:
        return 0.0
    return 1.0 / (1.0 + math.exp(-x))


def learning_rate(lr0: float, words_done: int, total_words: int) -> float:
    return lr0 * max(LR_FLOOR, 1.0 - words_done / max(total_words, 1))


def _check_dims(v_w, u_pos, u_negs):
    v_w, u_pos, u_negs = (np.asarray(a, dtype=np.float64) for a in (v_w, u_pos, u_negs))
    if u_negs.ndim == 1 and u_negs.size == 0:
        u_negs = u_negs.reshape(0, *v_w.shape)
    if v_w.ndim != 1 or u_pos.shape != v_w.shape or u_negs.ndim != 2 or u_negs.shape[1:] != v_w.shape:
        raise DimensionMismatch(f"shapes {v_w.shape}, {u_pos.shape}, {u_negs.shape} are inconsistent")
    return v_w, u_pos, u_negs


def sgns_loss(v_w, u_pos, u_negs) -> float:
    """-log s(u_pos.v) - sum log s(-u_neg.v), with s the logistic function."""
    v_w, u_pos, u_negs = _check_dims(v_w, u_pos, u_negs)
    return float(np.logaddexp(0.0, -(u_pos @ v_w)) + np.logaddexp(0.0, u_negs @ v_w).sum())


def sgns_gradients(v_w, u_pos, u_negs):
    """Analytic gradients of :func:`sgns_loss` w.r.t. ``v_w``, ``u_pos`` and each ``u_neg``."""
    v_w, u_pos, u_negs = _check_dims(v_w, u_pos, u_negs)
    g_pos = sigmoid(float(u_pos @ v_w)) - 1.0
    g_neg = np.array([sigmoid(float(s)) for s in u_negs @ v_w])
    d_v = g_pos * u_pos + g_neg @ u_negs
    return d_v, g_pos * v_w, np.outer(g_neg, v_w)


_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)


@njit(cache=True)
def _uniform(state):
    # splitmix64; state is a 1-element uint64 array owned by one worker
    state[0] += _GOLDEN
    z = state[0]
    z = (z ^ (z >> np.uint64(30))) * _MIX1
    z = (z ^ (z >> np.uint64(27))) * _MIX2
    z = z ^ (z >> np.uint64(31))
    return float(z >> np.uint64(11)) * (1.0 / 9007199254740992.0)


@njit(cache=True)
def _sigmoid(x):
    if x < -700.0:
        return 0.0
    return 1.0 / (1.0 + math.exp(-x))


@njit(cache=True)
def _noise_index(cdf, state):
    r = np.searchsorted(cdf, _uniform(state), side="right")
    return min(r, cdf.shape[0] - 1)


@njit(cache=True)
def _noise_draws(cdf, state, n):
    out = np.empty(n, dtype=np.int64)
    for i in range(n):
        out[i] = _noise_index(cdf, state)
    return out


@njit(cache=True, nogil=True)
def _sgd_pair(v, u, w, outputs, labels, n_out, lr, e):
    """One SGNS step for input ``w``; outputs[0] is the positive word."""
    d = v.shape[1]
    for k in range(d):
        e[k] = 0.0
    for m in range(n_out):
        o = outputs[m]
        dot = 0.0
        for k in range(d):
            dot += u[o, k] * v[w, k]
        g = _sigmoid(dot) - labels[m]
        for k in range(d):
            e[k] += g * u[o, k]
            u[o, k] -= lr * g * v[w, k]
    for k in range(d):
        v[w, k] -= lr * e[k]


@njit(cache=True, nogil=True)
def _train_chunk(ids, offsets, lrs, v, u, cdf, keep, window, negatives, state):
    outputs = np.empty(negatives + 1, dtype=np.int64)
    labels = np.zeros(negatives + 1)
    labels[0] = 1.0
    e = np.empty(v.shape[1])
    kept = np.empty(ids.shape[0], dtype=np.int64)
    for s in range(offsets.shape[0] - 1):
        lr = lrs[s]
        n = 0
        for p in range(offsets[s], offsets[s + 1]):
            w = ids[p]
            if keep[w] >= 1.0 or _uniform(state) < keep[w]:
                kept[n] = w
                n += 1
        for i in range(n):
            b = 1 + int(_uniform(state) * window)
            if b > window:
                b = window
            for j in range(max(0, i - b), min(n, i + b + 1)):
                if j == i:
                    continue
                target = kept[j]
                outputs[0] = target
                n_out = 1
                for _ in range(negatives):
                    for _attempt in range(MAX_RESAMPLE):
                        r = _noise_index(cdf, state)
                        if r != target:
                            outputs[n_out] = r
                            n_out += 1
                            break
                _sgd_pair(v, u, kept[i], outputs, labels, n_out, lr, e)


def _flatten(sentences, vocab):
    ids, offsets = [], [0]
    for sentence in sentences:
        ids.extend(vocab.index[t] for t in sentence if t in vocab.index)
        offsets.append(len(ids))
    return np.array(ids, dtype=np.int64), np.array(offsets, dtype=np.int64)


def _schedule(offsets, lr0, words_before, total_words, stride=1):
    """Per-sentence learning rate from the words read before each sentence."""
    done = words_before + stride * offsets[:-1]
    return lr0 * np.maximum(LR_FLOOR, 1.0 - done / max(total_words, 1))


def train(corpus: NormalizedCorpus, cfg: TrainingConfig = TrainingConfig()) -> KeyedVectors:
    """Train input vectors; ``workers > 1`` trades determinism for unsynchronized parallel updates."""
    vocab = build_vocab(corpus, cfg)
    total = int(vocab.counts.sum())
    total_words = cfg.epochs * total
    freqs = vocab.counts / total
    keep = np.array([subsample_keep_prob(f, cfg.subsample) for f in freqs])

    rng = np.random.default_rng(cfg.seed % 2**64)
    d = cfg.dim
    v = rng.uniform(-0.5 / d, 0.5 / d, size=(len(vocab), d))
    u = np.zeros((len(vocab), d))
    seeds = np.random.SeedSequence(cfg.seed % 2**64).generate_state(cfg.workers, dtype=np.uint64)
    states = [np.array([s], dtype=np.uint64) for s in seeds]
    chunks = [_flatten(corpus.sentences[k::cfg.workers], vocab) for k in range(cfg.workers)]
    log.info("training %d-dim vectors for %d terms, %d epochs, %d worker(s)", d, len(vocab), cfg.epochs, cfg.workers)

    for epoch in range(cfg.epochs):
        base = epoch * total
        if cfg.workers == 1:
            ids, offsets = chunks[0]
            _train_chunk(ids, offsets, _schedule(offsets, cfg.lr0, base, total_words), v, u,
                         vocab._noise_cdf, keep, cfg.window, cfg.negatives, states[0])
            continue
        with ThreadPoolExecutor(cfg.workers) as pool:
            jobs = [pool.submit(_train_chunk, ids, offsets,
                                _schedule(offsets, cfg.lr0, base, total_words, cfg.workers),
                                v, u, vocab._noise_cdf, keep, cfg.window, cfg.negatives, state)
                    for (ids, offsets), state in zip(chunks, states)]
            for job in jobs:
                job.result()
    return KeyedVectors(vocab.terms, v)
