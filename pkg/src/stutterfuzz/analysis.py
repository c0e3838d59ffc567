"""Transcript comparison: embeddings, cosine scores, and word error rates.

The built-in embedder hashes character trigrams into a fixed-width term
frequency vector. It is deliberately cheap and dependency free; anything
smarter can be plugged in over HTTP and degraded away from at runtime.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Protocol, Sequence

import numpy as np

from .errors import (
    DimensionMismatchError,
    EmptyReferenceError,
    ProviderUnavailableError,
    TooFewResultsError,
)
from .textnorm import normalize_text, tokenize

log = logging.getLogger(__name__)

EMBED_DIM = 512

_FNV_OFFSET = 0xCBF29CE484222325
_FNV_PRIME = 0x100000001B3
_FNV_MASK = 0xFFFFFFFFFFFFFFFF


def _fnv1a(data: bytes) -> int:
    h = _FNV_OFFSET
    for b in data:
        h = ((h ^ b) * _FNV_PRIME) & _FNV_MASK
    return h


class Embedder(Protocol):
    @property
    def dim(self) -> int: ...

    @property
    def provider_id(self) -> str: ...

    def embed(self, text: str) -> np.ndarray: ...


class TrigramEmbedder:
    """Hashed character-trigram TF vectors, L2 normalized."""

    provider_id = "trigram-v1"

    def __init__(self, dim: int = EMBED_DIM):
        if dim < 1:
            raise DimensionMismatchError(f"embedding dim must be positive, got {dim}")
        self._dim = dim

    @property
    def dim(self) -> int:
        return self._dim

    def embed(self, text: str) -> np.ndarray:
        vec = np.zeros(self._dim, dtype=np.float64)
        norm = normalize_text(text)
        if not norm:
            return vec
        padded = f" {norm} "
        for i in range(len(padded) - 2):
            tri = padded[i : i + 3]
            vec[_fnv1a(tri.encode("utf-8")) % self._dim] += 1.0
        length = float(np.linalg.norm(vec))
        if length > 0.0:
            vec /= length
        return vec


def cosine_similarity(u: np.ndarray, v: np.ndarray) -> float:
    if u.shape != v.shape:
        raise DimensionMismatchError(f"shape mismatch {u.shape} vs {v.shape}")
    nu = float(np.linalg.norm(u))
    nv = float(np.linalg.norm(v))
    if nu == 0.0 or nv == 0.0:
        return 0.0
    return float(np.dot(u, v) / (nu * nv))


def text_similarity(a: str, b: str, embedder: Embedder | None = None) -> float:
    emb = embedder if embedder is not None else TrigramEmbedder()
    return cosine_similarity(emb.embed(a), emb.embed(b))


def mean_pairwise_cosine(vectors: Sequence[np.ndarray]) -> float:
    """Mean cosine over all ordered pairs of distinct vectors."""
    k = len(vectors)
    if k < 2:
        raise TooFewResultsError(f"need at least 2 vectors, got {k}")
    dim = vectors[0].shape
    for v in vectors[1:]:
        if v.shape != dim:
            raise DimensionMismatchError(f"shape mismatch {dim} vs {v.shape}")
    total = 0.0
    for i in range(k):
        for j in range(k):
            if i != j:
                total += cosine_similarity(vectors[i], vectors[j])
    return total / (k * k - k)


def consensus_score(texts: Sequence[str], embedder: Embedder | None = None) -> float:
    emb = embedder if embedder is not None else TrigramEmbedder()
    return mean_pairwise_cosine([emb.embed(t) for t in texts])


# ---------------------------------------------------------------- word metrics

@dataclass(frozen=True)
class AlignmentCounts:
    hits: int = 0
    substitutions: int = 0
    deletions: int = 0
    insertions: int = 0

    def __add__(self, other: "AlignmentCounts") -> "AlignmentCounts":
        return AlignmentCounts(
            self.hits + other.hits,
            self.substitutions + other.substitutions,
            self.deletions + other.deletions,
            self.insertions + other.insertions,
        )

    @property
    def n(self) -> int:
        """Reference length."""
        return self.hits + self.substitutions + self.deletions

    @property
    def p(self) -> int:
        """Hypothesis length."""
        return self.hits + self.substitutions + self.insertions


_HIT, _SUB, _INS, _DEL = 0, 1, 2, 3


def align_words(reference: Sequence[str], hypothesis: Sequence[str]) -> AlignmentCounts:
    """Levenshtein alignment at word level, unit costs.

    Ambiguous tracebacks resolve hit, then substitution, then insertion,
    then deletion, so counts are reproducible across runs.
    """
    nr, nh = len(reference), len(hypothesis)
    dist = np.zeros((nr + 1, nh + 1), dtype=np.int64)
    dist[:, 0] = np.arange(nr + 1)
    dist[0, :] = np.arange(nh + 1)
    for i in range(1, nr + 1):
        for j in range(1, nh + 1):
            same = reference[i - 1] == hypothesis[j - 1]
            dist[i, j] = min(
                dist[i - 1, j - 1] + (0 if same else 1),
                dist[i, j - 1] + 1,
                dist[i - 1, j] + 1,
            )
    counts = [0, 0, 0, 0]
    i, j = nr, nh
    while i > 0 or j > 0:
        if i > 0 and j > 0 and reference[i - 1] == hypothesis[j - 1] and dist[i, j] == dist[i - 1, j - 1]:
            counts[_HIT] += 1
            i, j = i - 1, j - 1
        elif i > 0 and j > 0 and dist[i, j] == dist[i - 1, j - 1] + 1:
            counts[_SUB] += 1
            i, j = i - 1, j - 1
        elif j > 0 and dist[i, j] == dist[i, j - 1] + 1:
            counts[_INS] += 1
            j -= 1
        else:
            counts[_DEL] += 1
            i -= 1
    return AlignmentCounts(counts[_HIT], counts[_SUB], counts[_DEL], counts[_INS])


def count_errors(reference: str, hypothesis: str) -> AlignmentCounts:
    return align_words(tokenize(reference), tokenize(hypothesis))


def wer(counts: AlignmentCounts) -> float:
    if counts.n == 0:
        raise EmptyReferenceError("word error rate undefined for empty reference")
    return (counts.substitutions + counts.deletions + counts.insertions) / counts.n


def mer(counts: AlignmentCounts) -> float:
    errors = counts.substitutions + counts.deletions + counts.insertions
    denom = counts.hits + errors
    if denom == 0:
        raise EmptyReferenceError("match error rate undefined for two empty texts")
    return errors / denom


def wil(counts: AlignmentCounts) -> float:
    if counts.n == 0:
        raise EmptyReferenceError("word information lost undefined for empty reference")
    if counts.p == 0:
        return 1.0
    return 1.0 - (counts.hits * counts.hits) / (counts.n * counts.p)


@dataclass(frozen=True)
class ErrorRates:
    wer: float
    mer: float
    wil: float
    counts: AlignmentCounts


def error_rates(reference: str, hypothesis: str) -> ErrorRates:
    counts = count_errors(reference, hypothesis)
    return ErrorRates(wer=wer(counts), mer=mer(counts), wil=wil(counts), counts=counts)


# ---------------------------------------------------------------- providers

class HttpEmbedder:
    """Client for an embedding service speaking a tiny JSON protocol.

    `GET <base>/info` reports the vector width; `POST <base>/embed` with
    `{"text": ...}` answers `{"vector": [...]}`.
    """

    def __init__(self, base_url: str, timeout_s: float = 5.0):
        # Deferred import keeps requests out of offline code paths.
        import requests

        self._requests = requests
        self._base = base_url.rstrip("/")
        self._timeout = timeout_s
        self.provider_id = f"http:{self._base}"
        try:
            resp = requests.get(f"{self._base}/info", timeout=timeout_s)
            resp.raise_for_status()
            self._dim = int(resp.json()["dim"])
        except Exception as exc:
            raise ProviderUnavailableError(f"embedding service handshake failed: {exc}") from exc
        if self._dim < 1:
            raise ProviderUnavailableError(f"service reports dim {self._dim}")

    @property
    def dim(self) -> int:
        return self._dim

    def embed(self, text: str) -> np.ndarray:
        try:
            resp = self._requests.post(
                f"{self._base}/embed", json={"text": text}, timeout=self._timeout
            )
            resp.raise_for_status()
            vec = np.asarray(resp.json()["vector"], dtype=np.float64)
        except Exception as exc:
            raise ProviderUnavailableError(f"embedding request failed: {exc}") from exc
        if vec.shape != (self._dim,):
            raise DimensionMismatchError(
                f"service returned shape {vec.shape}, expected ({self._dim},)"
            )
        return vec


class ResilientEmbedder:
    """Primary embedder with a permanent local fallback.

    The first provider failure flips every later call to the fallback;
    scores stay comparable because one provider serves a whole batch.
    """

    def __init__(self, primary: Embedder, fallback: Embedder | None = None):
        self._primary = primary
        self._fallback = fallback if fallback is not None else TrigramEmbedder()
        self._degraded = False

    @property
    def degraded(self) -> bool:
        return self._degraded

    @property
    def provider_id(self) -> str:
        return self._fallback.provider_id if self._degraded else self._primary.provider_id

    @property
    def dim(self) -> int:
        return self._fallback.dim if self._degraded else self._primary.dim

    def embed(self, text: str) -> np.ndarray:
        if not self._degraded:
            try:
                return self._primary.embed(text)
            except ProviderUnavailableError as exc:
                log.warning("embedding provider lost, using fallback: %s", exc)
                self._degraded = True
        return self._fallback.embed(text)

    def embed_all(self, texts: Sequence[str]) -> list[np.ndarray]:
        """Embed a batch with one provider throughout.

        If the provider dies mid-batch the finished prefix is re-embedded
        with the fallback so the batch stays internally comparable.
        """
        out: list[np.ndarray] = []
        was_degraded = self._degraded
        for text in texts:
            out.append(self.embed(text))
            if self._degraded and not was_degraded:
                out = [self._fallback.embed(t) for t in texts[: len(out) - 1]] + out[-1:]
                was_degraded = True
        return out
