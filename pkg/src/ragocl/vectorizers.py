"""Dense/sparse text representations behind provider contracts, plus similarity math.

Two deterministic surrogates let everything run offline:

* :class:`HashingEmbedder` feature-hashes unigrams and bigrams into a signed,
  tf-weighted, L2-normalized vector.
* :class:`TfidfSparseEncoder` weights corpus-known terms by
  ``tf * ln((N - df + 0.5) / (df + 0.5) + 1)``.

Real BERT/SPLADE encoders are reached over HTTP with :class:`RemoteDenseProvider`
and :class:`RemoteSparseEncoder`.
"""

from __future__ import annotations

import hashlib
import json
import math
import threading
from collections import Counter
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Literal, Mapping, Protocol, Sequence
from urllib.parse import urlparse

import httpx
import numpy as np

from ragocl.errors import (
    DimensionMismatch,
    EncoderNotFitted,
    ProviderUnavailable,
    ZeroVector,
)
from ragocl.text import tokenize

DenseVector = np.ndarray
SparseVector = dict[str, float]


class DenseProvider(Protocol):
    provider_id: str
    dim: int

    def embed(self, texts: Sequence[str]) -> list[DenseVector]: ...


class SparseEncoder(Protocol):
    encoder_id: str

    def encode(self, texts: Sequence[str]) -> list[SparseVector]: ...


@dataclass(frozen=True)
class EmbeddingProviderSpec:
    kind: Literal["remote", "deterministic-surrogate"] = "deterministic-surrogate"
    endpoint: str | None = None
    dim: int = 256
    cache_policy: Literal["none", "persistent"] = "none"
    cache_path: str | None = None
    token: str | None = None
    timeout_s: float = 30.0

    def __post_init__(self):
        if self.kind not in ("remote", "deterministic-surrogate"):
            raise ValueError(f"unknown provider kind {self.kind!r}")
        if self.dim < 1:
            raise ValueError("dim must be positive")
        if self.kind == "remote" and not _valid_url(self.endpoint):
            raise ValueError(f"remote provider needs a valid http(s) endpoint, got {self.endpoint!r}")
        if self.cache_policy not in ("none", "persistent"):
            raise ValueError(f"unknown cache policy {self.cache_policy!r}")
        if self.cache_policy == "persistent" and not self.cache_path:
            raise ValueError("persistent cache needs cache_path")


def _valid_url(url: str | None) -> bool:
    if not url:
        return False
    parsed = urlparse(url)
    return parsed.scheme in ("http", "https") and bool(parsed.netloc)


# --------------------------------------------------------------------------- math


def _as_array(v) -> np.ndarray:
    return np.asarray(v, dtype=np.float64)


def cosine_similarity(u, v) -> float:
    u, v = _as_array(u), _as_array(v)
    if u.shape != v.shape:
        raise DimensionMismatch(f"cannot compare vectors of shape {u.shape} and {v.shape}")
    nu, nv = np.linalg.norm(u), np.linalg.norm(v)
    if nu == 0.0 or nv == 0.0:
        raise ZeroVector("cosine similarity is undefined for an all-zero vector")
    return float(np.clip(np.dot(u, v) / (nu * nv), -1.0, 1.0))


def euclidean_distance(u, v) -> float:
    u, v = _as_array(u), _as_array(v)
    if u.shape != v.shape:
        raise DimensionMismatch(f"cannot compare vectors of shape {u.shape} and {v.shape}")
    return float(np.sqrt(np.sum((u - v) ** 2)))


def sparse_dot(a: Mapping[str, float], b: Mapping[str, float]) -> float:
    if len(b) < len(a):
        a, b = b, a
    return math.fsum(w * b[t] for t, w in a.items() if t in b)


# --------------------------------------------------------------------- dense


def _features(text: str) -> list[str]:
    toks = tokenize(text)
    if not toks:
        # punctuation-only text (e.g. "->"): fall back to its characters
        toks = [ch for ch in text if not ch.isspace()]
    return toks + [f"{a} {b}" for a, b in zip(toks, toks[1:])]


class HashingEmbedder:
    """Signed feature hashing of token unigrams+bigrams, tf weighted, L2 normalized."""

    def __init__(self, dim: int = 256):
        if dim < 1:
            raise ValueError("dim must be positive")
        self.dim = dim
        self.provider_id = f"hashing-{dim}"

    def _vector(self, text: str) -> np.ndarray:
        vec = np.zeros(self.dim, dtype=np.float64)
        for feat, tf in Counter(_features(text)).items():
            h = int.from_bytes(hashlib.blake2b(feat.encode("utf-8"), digest_size=8).digest(), "big")
            sign = 1.0 if (h >> 63) & 1 else -1.0
            vec[h % self.dim] += sign * tf
        norm = np.linalg.norm(vec)
        return vec / norm if norm > 0 else vec

    def embed(self, texts: Sequence[str]) -> list[DenseVector]:
        if not texts:
            raise ValueError("embed needs at least one text")
        return [self._vector(t) for t in texts]


class _RemoteBase:
    def __init__(self, endpoint: str, token: str | None = None, timeout_s: float = 30.0,
                 client: httpx.Client | None = None):
        if not _valid_url(endpoint):
            raise ValueError(f"invalid endpoint {endpoint!r}")
        self.endpoint = endpoint
        headers = {"Authorization": f"Bearer {token}"} if token else {}
        self._client = client or httpx.Client(timeout=timeout_s)
        self._headers = headers

    def _post(self, texts: Sequence[str]) -> list:
        try:
            resp = self._client.post(self.endpoint, json={"texts": list(texts)}, headers=self._headers)
            resp.raise_for_status()
            vectors = resp.json()["vectors"]
        except (httpx.HTTPError, ValueError, KeyError, TypeError) as exc:
            raise ProviderUnavailable(f"{self.endpoint}: {exc}") from exc
        if not isinstance(vectors, list) or len(vectors) != len(texts):
            raise ProviderUnavailable(f"{self.endpoint}: expected {len(texts)} vectors")
        return vectors


class RemoteDenseProvider(_RemoteBase):
    """POST ``{texts}`` -> ``{vectors: [[number]]}``; vectors pass through unmodified."""

    def __init__(self, endpoint: str, dim: int, **kwargs):
        super().__init__(endpoint, **kwargs)
        self.dim = dim
        self.provider_id = f"remote:{endpoint}"

    def embed(self, texts: Sequence[str]) -> list[DenseVector]:
        if not texts:
            raise ValueError("embed needs at least one text")
        out = []
        for raw in self._post(texts):
            vec = np.asarray(raw, dtype=np.float64)
            if vec.ndim != 1 or vec.shape[0] != self.dim:
                raise DimensionMismatch(f"provider returned dim {vec.shape[-1] if vec.ndim else 0}, expected {self.dim}")
            if not np.all(np.isfinite(vec)):
                raise ProviderUnavailable("provider returned non-finite components")
            out.append(vec)
        return out


class EmbeddingCache:
    """Thread-safe ``(provider id, text) -> vector`` cache, optionally backed by a JSON-lines file."""

    def __init__(self, path: str | Path | None = None):
        self._data: dict[tuple[str, str], np.ndarray] = {}
        self._lock = threading.Lock()
        self.path = Path(path) if path else None
        if self.path and self.path.exists():
            with open(self.path, encoding="utf-8") as fh:
                for line in fh:
                    try:
                        row = json.loads(line)
                    except json.JSONDecodeError:
                        continue  # torn final line from an interrupted run
                    self._data[(row["p"], row["t"])] = np.asarray(row["v"], dtype=np.float64)

    def __len__(self) -> int:
        return len(self._data)

    def get(self, provider_id: str, text: str) -> np.ndarray | None:
        return self._data.get((provider_id, text))

    def put_many(self, provider_id: str, items: Iterable[tuple[str, np.ndarray]]) -> None:
        with self._lock:
            fresh = [(t, v) for t, v in items if (provider_id, t) not in self._data]
            for text, vec in fresh:
                self._data[(provider_id, text)] = vec
            if self.path and fresh:
                with open(self.path, "a", encoding="utf-8") as fh:
                    for text, vec in fresh:
                        fh.write(json.dumps({"p": provider_id, "t": text, "v": vec.tolist()}) + "\n")


class CachedEmbedder:
    """Wrap a dense provider so repeated texts are embedded once."""

    def __init__(self, inner: DenseProvider, cache: EmbeddingCache | None = None):
        self.inner = inner
        self.cache = cache if cache is not None else EmbeddingCache()
        self.provider_id = inner.provider_id
        self.dim = inner.dim

    def embed(self, texts: Sequence[str]) -> list[DenseVector]:
        if not texts:
            raise ValueError("embed needs at least one text")
        missing = list(dict.fromkeys(t for t in texts if self.cache.get(self.provider_id, t) is None))
        if missing:
            self.cache.put_many(self.provider_id, zip(missing, self.inner.embed(missing)))
        return [self.cache.get(self.provider_id, t) for t in texts]


# -------------------------------------------------------------------- sparse


class TfidfSparseEncoder:
    """Corpus-fitted tf-idf stand-in for a learned sparse encoder."""

    def __init__(self):
        self.encoder_id = "tfidf-surrogate"
        self._idf: dict[str, float] | None = None
        self.n_docs = 0

    @property
    def fitted(self) -> bool:
        return self._idf is not None

    def fit(self, corpus: Iterable[str]) -> "TfidfSparseEncoder":
        if self.fitted:
            raise RuntimeError("encoder is immutable once fitted")
        df: Counter[str] = Counter()
        n = 0
        for doc in corpus:
            n += 1
            df.update(set(tokenize(doc)))
        self.n_docs = n
        self._idf = {t: math.log((n - d + 0.5) / (d + 0.5) + 1.0) for t, d in df.items()}
        return self

    def idf(self, term: str) -> float:
        if self._idf is None:
            raise EncoderNotFitted("fit the encoder on a corpus first")
        return self._idf.get(term, 0.0)

    def encode(self, texts: Sequence[str]) -> list[SparseVector]:
        if self._idf is None:
            raise EncoderNotFitted("fit the encoder on a corpus first")
        out: list[SparseVector] = []
        for text in texts:
            weights = {}
            for term, tf in Counter(tokenize(text)).items():
                idf = self._idf.get(term)
                if idf is not None and tf * idf > 0:
                    weights[term] = tf * idf
            out.append(weights)
        return out


class RemoteSparseEncoder(_RemoteBase):
    """POST ``{texts}`` -> ``{vectors: [{term: weight}]}``; non-positive weights are dropped."""

    def __init__(self, endpoint: str, **kwargs):
        super().__init__(endpoint, **kwargs)
        self.encoder_id = f"remote:{endpoint}"

    def encode(self, texts: Sequence[str]) -> list[SparseVector]:
        out = []
        for raw in self._post(texts):
            if not isinstance(raw, dict):
                raise ProviderUnavailable("sparse vector must be a term->weight object")
            vec = {}
            for term, w in raw.items():
                w = float(w)
                if not math.isfinite(w):
                    raise ProviderUnavailable(f"non-finite weight for term {term!r}")
                if w > 0:
                    vec[str(term)] = w
            out.append(vec)
        return out


def make_dense_provider(spec: EmbeddingProviderSpec, client: httpx.Client | None = None) -> DenseProvider:
    if spec.kind == "remote":
        inner: DenseProvider = RemoteDenseProvider(spec.endpoint, spec.dim, token=spec.token,
                                                   timeout_s=spec.timeout_s, client=client)
    else:
        inner = HashingEmbedder(spec.dim)
    cache = EmbeddingCache(spec.cache_path if spec.cache_policy == "persistent" else None)
    return CachedEmbedder(inner, cache)
