import json
import math
import random

import httpx
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from ragocl.errors import DimensionMismatch, EncoderNotFitted, ProviderUnavailable, ZeroVector
from ragocl.vectorizers import (
    CachedEmbedder,
    EmbeddingCache,
    EmbeddingProviderSpec,
    HashingEmbedder,
    RemoteDenseProvider,
    RemoteSparseEncoder,
    TfidfSparseEncoder,
    cosine_similarity,
    euclidean_distance,
    make_dense_provider,
    sparse_dot,
)

finite = st.floats(-1e3, 1e3, allow_nan=False, allow_infinity=False)
vectors = st.integers(1, 8).flatmap(lambda n: st.tuples(st.lists(finite, min_size=n, max_size=n),
                                                         st.lists(finite, min_size=n, max_size=n)))


def nonzero(v):
    return np.linalg.norm(v) > 1e-6


def test_cosine_examples():
    v = np.array([0.3, -1.2, 4.0])
    assert cosine_similarity(v, v) == pytest.approx(1.0, abs=1e-9)
    assert cosine_similarity([1, 0], [0, 1]) == 0.0
    assert cosine_similarity([1, 1], [1, 0]) == pytest.approx(1 / math.sqrt(2), abs=1e-4)


def test_cosine_errors():
    with pytest.raises(ZeroVector):
        cosine_similarity([0, 0], [1, 0])
    with pytest.raises(DimensionMismatch):
        cosine_similarity([1, 0], [1, 0, 0])


def test_euclidean_examples():
    assert euclidean_distance([0, 0], [3, 4]) == 5.0
    assert euclidean_distance([1.5, 2], [1.5, 2]) == 0.0
    with pytest.raises(DimensionMismatch):
        euclidean_distance([1], [1, 2])


def test_sparse_dot():
    assert sparse_dot({"a": 1.0}, {"b": 2.0}) == 0.0
    assert sparse_dot({"a": 1.0, "b": 2.0}, {"b": 3.0, "c": 5.0}) == 6.0


@given(vectors)
def test_symmetry(uv):
    u, v = map(np.array, uv)
    assert euclidean_distance(u, v) == euclidean_distance(v, u)
    if nonzero(u) and nonzero(v):
        assert cosine_similarity(u, v) == pytest.approx(cosine_similarity(v, u), abs=1e-12)
        assert -1.0 <= cosine_similarity(u, v) <= 1.0


@given(vectors, st.floats(1e-3, 1e3))
def test_cosine_scale_invariance(uv, alpha):
    u, v = map(np.array, uv)
    if nonzero(u) and nonzero(v):
        assert cosine_similarity(alpha * u, v) == pytest.approx(cosine_similarity(u, v), abs=1e-9)


@given(st.dictionaries(st.sampled_from("abcdef"), st.floats(0.01, 10)),
       st.dictionaries(st.sampled_from("abcdef"), st.floats(0.01, 10)))
def test_sparse_dot_symmetry(a, b):
    assert sparse_dot(a, b) == pytest.approx(sparse_dot(b, a))
    assert sparse_dot(a, b) >= 0


def test_triangle_inequality_spot_checks():
    rng = np.random.default_rng(3)
    for _ in range(200):
        a, b, c = rng.normal(size=(3, 5))
        assert euclidean_distance(a, c) <= euclidean_distance(a, b) + euclidean_distance(b, c) + 1e-12


def test_hashing_embedder_contract():
    emb = HashingEmbedder()
    a1, a2 = emb.embed(["a", "a"])
    assert np.array_equal(a1, a2)
    for text in ["a", "context Person inv: self.age >= 0", "->", "ÄÖÜ ß"]:
        (v,) = emb.embed([text])
        assert v.shape == (256,)
        assert np.linalg.norm(v) == pytest.approx(1.0, abs=1e-9)
    assert not np.any(emb.embed([""])[0])
    with pytest.raises(ValueError):
        emb.embed([])


def test_hashing_embedder_stable_across_instances():
    # blake2b, not the salted builtin hash()
    assert np.array_equal(HashingEmbedder().embed(["class Book"])[0], HashingEmbedder().embed(["class Book"])[0])


def test_hashing_embedder_one_token_change_alters_vector():
    rng = random.Random(11)
    vocab = [f"tok{i}" for i in range(500)]
    emb = HashingEmbedder()
    for _ in range(100):
        words = rng.sample(vocab, 30)
        changed = list(words)
        changed[rng.randrange(30)] = "replacement"
        a, b = emb.embed([" ".join(words), " ".join(changed)])
        assert not np.allclose(a, b)


def test_hashing_embedder_disjoint_texts_near_orthogonal():
    rng = random.Random(0)
    vocab = [f"w{i}" for i in range(400)]
    emb = HashingEmbedder()
    sims = []
    for _ in range(200):
        words = rng.sample(vocab, 16)
        a, b = emb.embed([" ".join(words[:8]), " ".join(words[8:])])
        sims.append(abs(cosine_similarity(a, b)))
    assert sum(sims) / len(sims) < 0.05


def test_tfidf_surrogate_formula():
    enc = TfidfSparseEncoder().fit(["x y", "y"])
    (vec,) = enc.encode(["x"])
    assert vec == {"x": pytest.approx(math.log((2 - 1 + 0.5) / (1 + 0.5) + 1))}
    assert enc.encode(["unknown words only"]) == [{}]
    assert enc.encode(["x x y"]) == enc.encode(["x x y"])
    (vec,) = enc.encode(["x x y"])
    assert vec["x"] == pytest.approx(2 * math.log(2))
    assert vec["y"] == pytest.approx(math.log(0.5 / 2.5 + 1))
    assert all(w > 0 for w in vec.values())


def test_tfidf_not_fitted():
    with pytest.raises(EncoderNotFitted):
        TfidfSparseEncoder().encode(["x"])


def _mock_client(handler):
    return httpx.Client(transport=httpx.MockTransport(handler))


def test_remote_dense_round_trip():
    seen = {}

    def handler(request):
        seen["body"] = json.loads(request.content)
        seen["auth"] = request.headers.get("authorization")
        return httpx.Response(200, json={"vectors": [[1.0, 2.0, 3.0] for _ in seen["body"]["texts"]]})

    prov = RemoteDenseProvider("http://enc.local/embed", dim=3, token="tkn", client=_mock_client(handler))
    out = prov.embed(["a", "b"])
    assert seen["body"] == {"texts": ["a", "b"]}
    assert seen["auth"] == "Bearer tkn"
    # passed through, not normalized
    assert out[0].tolist() == [1.0, 2.0, 3.0]


def test_remote_dense_dimension_mismatch():
    client = _mock_client(lambda r: httpx.Response(200, json={"vectors": [[0.0] * 512]}))
    with pytest.raises(DimensionMismatch):
        RemoteDenseProvider("http://enc.local/embed", dim=768, client=client).embed(["a"])


@pytest.mark.parametrize("response", [httpx.Response(500), httpx.Response(200, json={"nope": 1}),
                                      httpx.Response(200, json={"vectors": []})])
def test_remote_dense_unavailable(response):
    client = _mock_client(lambda r: response)
    with pytest.raises(ProviderUnavailable):
        RemoteDenseProvider("http://enc.local/embed", dim=2, client=client).embed(["a"])


def test_remote_dense_transport_error():
    def handler(request):
        raise httpx.ConnectError("refused", request=request)

    with pytest.raises(ProviderUnavailable):
        RemoteDenseProvider("http://enc.local/embed", dim=2, client=_mock_client(handler)).embed(["a"])


def test_remote_sparse_drops_non_positive():
    client = _mock_client(lambda r: httpx.Response(200, json={"vectors": [{"a": 1.5, "b": 0, "c": -1}]}))
    assert RemoteSparseEncoder("http://enc.local/sparse", client=client).encode(["q"]) == [{"a": 1.5}]


def test_provider_spec_validation():
    with pytest.raises(ValueError):
        EmbeddingProviderSpec(kind="remote", endpoint="not a url")
    with pytest.raises(ValueError):
        EmbeddingProviderSpec(dim=0)
    EmbeddingProviderSpec(kind="remote", endpoint="https://host:8080/embed", dim=768)


class CountingEmbedder(HashingEmbedder):
    def __init__(self):
        super().__init__(16)
        self.calls = []

    def embed(self, texts):
        self.calls.append(list(texts))
        return super().embed(texts)


def test_cache_embeds_each_text_once(tmp_path):
    inner = CountingEmbedder()
    cached = CachedEmbedder(inner, EmbeddingCache(tmp_path / "cache.jsonl"))
    first = cached.embed(["a", "b", "a"])
    second = cached.embed(["b", "c"])
    assert inner.calls == [["a", "b"], ["c"]]
    assert np.array_equal(first[1], second[0])

    reloaded = CachedEmbedder(CountingEmbedder(), EmbeddingCache(tmp_path / "cache.jsonl"))
    assert np.array_equal(reloaded.embed(["a"])[0], first[0])
    assert reloaded.inner.calls == []


def test_persistent_cache_factory(tmp_path):
    spec = EmbeddingProviderSpec(dim=32, cache_policy="persistent", cache_path=str(tmp_path / "c.jsonl"))
    prov = make_dense_provider(spec)
    prov.embed(["hello world"])
    assert len(EmbeddingCache(tmp_path / "c.jsonl")) == 1
