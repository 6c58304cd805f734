"""Brute-force recomputations in plain Python, independent of numpy paths."""

import math


def dot(x, y):
    return math.fsum(a * b for a, b in zip(x, y))


def norm(x):
    return math.sqrt(dot(x, x))


def cosine(x, y):
    return dot(x, y) / (norm(x) * norm(y))


def mean(rows):
    n = len(rows)
    return [math.fsum(col) / n for col in zip(*rows)]


def n_similarity(vectors, set_a, set_b):
    return cosine(mean([vectors[t] for t in set_a]), mean([vectors[t] for t in set_b]))


def most_similar(vectors, term, k):
    scored = [(cosine(vectors[term], v), t) for t, v in vectors.items() if t != term]
    scored.sort(key=lambda st: (-st[0], st[1]))
    return [(t, s) for s, t in scored[:k]]


def cluster_center(vectors, terms):
    units = [[x / norm(vectors[t]) for x in vectors[t]] for t in terms]
    m = mean(units)
    return [x / norm(m) for x in m]
