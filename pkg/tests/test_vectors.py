import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from patent_analogs.errors import DegenerateCenter, DegenerateMean, MalformedModelFile, UnknownTerm, ZeroVector
from patent_analogs.vectors import KeyedVectors, load_model, save_model

import oracles


def kv(**rows):
    return KeyedVectors(list(rows), list(rows.values()))


def random_model(rng, n=None, d=None):
    n = n or int(rng.integers(2, 21))
    d = d or int(rng.integers(1, 17))
    return KeyedVectors([f"t{i}" for i in range(n)], rng.normal(size=(n, d)))


def as_dict(model):
    return {t: model.matrix[i].tolist() for i, t in enumerate(model.terms)}


class TestConstruction:
    def test_rejects_duplicates_nonfinite_allzero(self):
        with pytest.raises(ValueError):
            KeyedVectors(["a", "a"], [[1.0], [2.0]])
        with pytest.raises(ValueError):
            KeyedVectors(["a"], [[np.nan]])
        with pytest.raises(ValueError):
            KeyedVectors(["a", "b"], [[0.0], [0.0]])

    def test_immutable(self):
        m = kv(a=[1.0, 0.0])
        with pytest.raises(ValueError):
            m.matrix[0, 0] = 2.0


class TestSimilarity:
    def test_examples(self):
        m = kv(x=[1.0, 0.0], y=[0.0, 1.0], z=[-1.0, 0.0])
        assert m.similarity("x", "x") == 1.0
        assert m.similarity("x", "y") == 0.0
        assert m.similarity("x", "z") == -1.0

    def test_errors(self):
        m = kv(x=[1.0, 0.0], o=[0.0, 0.0])
        with pytest.raises(UnknownTerm):
            m.similarity("x", "nope")
        with pytest.raises(ZeroVector):
            m.similarity("x", "o")

    def test_self_similarity_clamped(self):
        m = kv(a=[0.1, 0.7, 1e-3], b=[3.0, 1.0, 2.0])
        assert m.similarity("a", "a") <= 1.0
        assert m.similarity("a", "b") == m.similarity("b", "a")

    def test_scale_invariance(self):
        rng = np.random.default_rng(3)
        m = random_model(rng, 6, 5)
        scaled = m.matrix.copy()
        scaled[2] *= 7.5
        s = KeyedVectors(m.terms, scaled)
        for t in m.terms:
            assert abs(m.similarity("t2", t) - s.similarity("t2", t)) < 1e-9


class TestMostSimilar:
    def test_two_terms(self):
        m = kv(a=[1.0, 0.0], b=[0.5, 0.5])
        assert [t for t, _ in m.most_similar("a", 10)] == ["b"]

    def test_matches_brute_force(self):
        m = kv(a=[1.0, 0.2], b=[0.9, 0.1], c=[-1.0, 0.3], d=[0.2, 1.0])
        expected = oracles.most_similar(as_dict(m), "a", 3)
        got = m.most_similar("a", 3)
        assert [t for t, _ in got] == [t for t, _ in expected] == ["b", "d", "c"]
        assert [s for _, s in got] == pytest.approx([s for _, s in expected], abs=1e-12)

    def test_identical_vectors_tie_lexicographic(self):
        m = kv(q=[1.0, 1.0], zz=[2.0, 0.0], bb=[2.0, 0.0], aa=[0.0, 3.0])
        got = m.most_similar("zz", 3)
        assert got[0] == ("bb", 1.0)
        assert [t for t, _ in m.most_similar("q", 3)] == ["aa", "bb", "zz"]

    def test_full_listing(self):
        m = random_model(np.random.default_rng(5), 9, 4)
        hits = m.most_similar("t0", len(m) - 1)
        assert sorted(t for t, _ in hits) == sorted(m.terms[1:])

    def test_unknown(self):
        with pytest.raises(UnknownTerm):
            kv(a=[1.0]).most_similar("b", 1)


class TestClusterCenter:
    def test_singleton(self):
        m = kv(w=[3.0, 4.0])
        np.testing.assert_allclose(m.cluster_center(["w"]), [0.6, 0.8])

    def test_identical(self):
        m = kv(a=[3.0, 4.0], b=[3.0, 4.0])
        np.testing.assert_allclose(m.cluster_center(["a", "b"]), [0.6, 0.8])

    def test_cancellation(self):
        m = kv(x=[1.0, 0.0], y=[-1.0, 0.0])
        with pytest.raises(DegenerateCenter):
            m.cluster_center(["x", "y"])

    def test_uses_unit_members(self):
        m = kv(a=[10.0, 0.0], b=[0.0, 1.0])
        np.testing.assert_allclose(m.cluster_center(["a", "b"]), [2**-0.5, 2**-0.5])


class TestNSimilarity:
    def test_same_set(self):
        m = random_model(np.random.default_rng(1), 5, 3)
        assert m.n_similarity(["t0", "t3"], ["t0", "t3"]) == pytest.approx(1.0, abs=1e-15)

    def test_singletons_reduce_to_similarity(self):
        m = random_model(np.random.default_rng(2), 5, 3)
        assert m.n_similarity(["t1"], ["t4"]) == pytest.approx(m.similarity("t1", "t4"), abs=1e-15)

    def test_raw_means_with_multiplicity(self):
        m = kv(a=[10.0, 0.0], b=[0.0, 1.0], c=[1.0, 1.0])
        assert m.n_similarity(["a", "b"], ["c"]) == pytest.approx(oracles.cosine([5.0, 0.5], [1.0, 1.0]))
        assert m.n_similarity(["b", "b", "a"], ["c"]) == pytest.approx(oracles.cosine([10 / 3, 2 / 3], [1, 1]))

    @pytest.mark.parametrize("seed", range(20))
    def test_random_matches_oracle(self, seed):
        rng = np.random.default_rng(seed)
        m = random_model(rng, 5)
        a, b = list(rng.choice(m.terms, 3)), list(rng.choice(m.terms, 3))
        assert abs(m.n_similarity(a, b) - oracles.n_similarity(as_dict(m), a, b)) < 1e-9

    def test_disjoint_copies(self):
        m = kv(a=[1.0, 2.0], b=[1.0, 2.0], c=[0.0, 1.0])
        assert m.n_similarity(["a", "a"], ["b"]) == pytest.approx(1.0)

    def test_errors(self):
        m = kv(a=[1.0, 0.0], b=[-1.0, 0.0], c=[0.0, 1.0])
        with pytest.raises(DegenerateMean):
            m.n_similarity(["a", "b"], ["c"])
        with pytest.raises(UnknownTerm):
            m.n_similarity(["a"], ["zzz"])

    def test_common_scale_invariance(self):
        rng = np.random.default_rng(4)
        m = random_model(rng, 7, 5)
        s = KeyedVectors(m.terms, m.matrix * 3.25)
        a, b = ["t0", "t1", "t1"], ["t4", "t6"]
        assert abs(m.n_similarity(a, b) - s.n_similarity(a, b)) < 1e-9


@settings(max_examples=60)
@given(arrays(np.float64, (6, 3), elements=st.floats(-1e3, 1e3)),
       st.lists(st.integers(0, 5), min_size=1, max_size=4), st.lists(st.integers(0, 5), min_size=1, max_size=4))
def test_symmetry_and_range(matrix, ia, ib):
    if not (np.linalg.norm(matrix, axis=1) > 0).any():
        return
    m = KeyedVectors([f"t{i}" for i in range(6)], matrix)
    a, b = [f"t{i}" for i in ia], [f"t{i}" for i in ib]
    try:
        s = m.n_similarity(a, b)
    except DegenerateMean:
        return
    assert s == m.n_similarity(b, a)
    assert -1.0 <= s <= 1.0
    if m.norms[ia[0]] > 0 and m.norms[ib[0]] > 0:
        x = m.similarity(a[0], b[0])
        assert x == m.similarity(b[0], a[0]) and -1.0 <= x <= 1.0


class TestModelFile:
    def test_round_trip(self, tmp_path):
        m = random_model(np.random.default_rng(0), 10, 8)
        save_model(m, tmp_path / "m.txt")
        back = load_model(tmp_path / "m.txt")
        assert back.terms == m.terms
        np.testing.assert_allclose(back.matrix, m.matrix, rtol=1e-6)

    def test_format(self, tmp_path):
        save_model(kv(нейронна_мережа=[0.5, -1.0 / 3]), tmp_path / "m.txt")
        assert (tmp_path / "m.txt").read_bytes().decode() == "1 2\nнейронна_мережа 0.5 -0.333333333\n"

    @pytest.mark.parametrize("content", [
        "2 3\na 1 2 3\nb 1 2 3\nc 1 2 3\n",
        "2 3\na 1 2 3\n",
        "2 2\na 1 2\na 3 4\n",
        "1 2\na 1 x\n",
        "1 2\na 1\n",
        "one two\n",
        "",
    ])
    def test_malformed(self, tmp_path, content):
        (tmp_path / "m.txt").write_text(content, encoding="utf-8")
        with pytest.raises(MalformedModelFile):
            load_model(tmp_path / "m.txt")
