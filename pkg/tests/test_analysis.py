import json
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from stutterfuzz.analysis import (
    AlignmentCounts,
    HttpEmbedder,
    ResilientEmbedder,
    TrigramEmbedder,
    align_words,
    consensus_score,
    cosine_similarity,
    count_errors,
    error_rates,
    mean_pairwise_cosine,
    mer,
    text_similarity,
    wer,
    wil,
)
from stutterfuzz.errors import (
    DimensionMismatchError,
    EmptyReferenceError,
    ProviderUnavailableError,
    TooFewResultsError,
)


def _brute_levenshtein(a, b):
    prev = list(range(len(b) + 1))
    for i, x in enumerate(a, 1):
        cur = [i]
        for j, y in enumerate(b, 1):
            cur.append(min(prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (x != y)))
        prev = cur
    return prev[-1]


# ---------------------------------------------------------------- word metrics

def test_substitution_example():
    c = count_errors("she never spoke", "she neverso spoke")
    assert c == AlignmentCounts(hits=2, substitutions=1, deletions=0, insertions=0)
    assert wer(c) == pytest.approx(1 / 3)
    assert mer(c) == pytest.approx(1 / 3)
    assert wil(c) == pytest.approx(5 / 9)


def test_insertion_example():
    c = count_errors("we can convert a type", "we can convert i a type")
    assert c == AlignmentCounts(hits=5, substitutions=0, deletions=0, insertions=1)
    assert wer(c) == pytest.approx(1 / 5)
    assert mer(c) == pytest.approx(1 / 6)
    assert wil(c) == pytest.approx(1 / 6)


def test_identical_texts_zero_rates():
    r = error_rates("together they had five sons", "together they had five sons")
    assert (r.wer, r.mer, r.wil) == (0.0, 0.0, 0.0)
    assert r.counts.hits == 5


def test_traceback_prefers_hit_over_substitution():
    # "a b" vs "b" could read as S+D; the hit on "b" must win
    c = align_words(["a", "b"], ["b"])
    assert c == AlignmentCounts(hits=1, substitutions=0, deletions=1, insertions=0)


def test_empty_hypothesis_all_deleted():
    c = count_errors("a b c", "")
    assert c.deletions == 3 and c.p == 0
    assert wer(c) == 1.0
    assert mer(c) == 1.0
    assert wil(c) == 1.0  # no hypothesis carries no information


def test_empty_reference_raises():
    c = count_errors("", "hello")
    with pytest.raises(EmptyReferenceError):
        wer(c)
    with pytest.raises(EmptyReferenceError):
        wil(c)
    with pytest.raises(EmptyReferenceError):
        mer(count_errors("", ""))


_TOKENS = st.lists(st.sampled_from("abcdef"), max_size=8)


@given(ref=_TOKENS, hyp=_TOKENS)
@settings(max_examples=200)
def test_alignment_identities(ref, hyp):
    c = align_words(ref, hyp)
    assert c.n == len(ref)
    assert c.p == len(hyp)
    assert c.substitutions + c.deletions + c.insertions == _brute_levenshtein(ref, hyp)


@given(ref=st.lists(st.sampled_from("abcdef"), min_size=1, max_size=8), hyp=_TOKENS)
@settings(max_examples=200)
def test_rate_bounds(ref, hyp):
    c = align_words(ref, hyp)
    assert wer(c) >= mer(c)
    assert 0.0 <= mer(c) <= 1.0
    assert 0.0 <= wil(c) <= 1.0


def test_counts_pool_by_addition():
    a = count_errors("she never spoke", "she neverso spoke")
    b = count_errors("we can convert a type", "we can convert i a type")
    pooled = a + b
    assert pooled.n == a.n + b.n
    assert wer(pooled) == pytest.approx(2 / 8)


# ---------------------------------------------------------------- embeddings

def test_embedding_shape_and_norm():
    emb = TrigramEmbedder()
    v = emb.embed("the cat sat")
    assert v.shape == (512,)
    assert np.linalg.norm(v) == pytest.approx(1.0)


def test_embedding_empty_text_is_zero():
    assert not TrigramEmbedder().embed("").any()


def test_embedding_ignores_case_and_punctuation():
    emb = TrigramEmbedder()
    np.testing.assert_array_equal(emb.embed("The  CAT, sat!"), emb.embed("the cat sat"))


def test_similarity_orders_related_above_unrelated():
    near = text_similarity("the cat sat", "the cat sat on")
    far = text_similarity("the cat sat", "quartz vex")
    assert near > far
    assert text_similarity("the cat sat", "the cat sat") == pytest.approx(1.0)


def test_cosine_zero_vector_scores_zero():
    z = np.zeros(8)
    v = np.ones(8)
    assert cosine_similarity(z, v) == 0.0
    assert cosine_similarity(z, z) == 0.0


def test_cosine_shape_mismatch():
    with pytest.raises(DimensionMismatchError):
        cosine_similarity(np.ones(4), np.ones(5))


def test_embedder_rejects_bad_dim():
    with pytest.raises(DimensionMismatchError):
        TrigramEmbedder(dim=0)


def test_mean_pairwise_identical_vectors():
    v = np.array([1.0, 0.0])
    for k in (2, 3, 5):
        assert mean_pairwise_cosine([v] * k) == pytest.approx(1.0, abs=1e-9)


def test_mean_pairwise_frozen_example():
    e1 = np.array([1.0, 0.0])
    e3 = np.array([0.0, 1.0])
    assert mean_pairwise_cosine([e1, e1, e3]) == pytest.approx(1 / 3, abs=1e-9)


def test_mean_pairwise_needs_two():
    with pytest.raises(TooFewResultsError):
        mean_pairwise_cosine([np.ones(3)])
    with pytest.raises(DimensionMismatchError):
        mean_pairwise_cosine([np.ones(3), np.ones(4)])


def test_consensus_score_identical_texts():
    assert consensus_score(["same words", "same words"]) == pytest.approx(1.0)


# ---------------------------------------------------------------- http provider

class _EmbedHandler(BaseHTTPRequestHandler):
    info_dim = 4
    vector_dim = 4

    def _send(self, doc: dict):
        body = json.dumps(doc).encode()
        self.send_response(200)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(body)))
        self.end_headers()
        self.wfile.write(body)

    def do_GET(self):
        if self.path == "/info":
            self._send({"dim": self.info_dim})
        else:
            self.send_error(404)

    def do_POST(self):
        length = int(self.headers.get("Content-Length", 0))
        doc = json.loads(self.rfile.read(length))
        vec = [float(len(doc["text"]))] + [0.0] * (self.vector_dim - 1)
        self._send({"vector": vec})

    def log_message(self, *args):
        pass


@pytest.fixture()
def embed_server():
    servers = []

    def start(**attrs):
        handler = type("Handler", (_EmbedHandler,), attrs)
        srv = ThreadingHTTPServer(("127.0.0.1", 0), handler)
        threading.Thread(target=srv.serve_forever, daemon=True).start()
        servers.append(srv)
        return f"http://127.0.0.1:{srv.server_address[1]}"

    yield start
    for srv in servers:
        srv.shutdown()
        srv.server_close()


def test_http_embedder_happy_path(embed_server):
    emb = HttpEmbedder(embed_server())
    assert emb.dim == 4
    assert emb.provider_id.startswith("http:")
    v = emb.embed("hello")
    assert v.shape == (4,)
    assert v[0] == 5.0


def test_http_embedder_wrong_width(embed_server):
    emb = HttpEmbedder(embed_server(vector_dim=3))
    with pytest.raises(DimensionMismatchError):
        emb.embed("hello")


def test_http_embedder_bad_advertised_dim(embed_server):
    with pytest.raises(ProviderUnavailableError):
        HttpEmbedder(embed_server(info_dim=0))


def test_http_embedder_dead_endpoint():
    with pytest.raises(ProviderUnavailableError):
        HttpEmbedder("http://127.0.0.1:1", timeout_s=0.2)


# ---------------------------------------------------------------- degradation

class _FlakyPrimary:
    """Serves a recognizable constant vector, then dies on demand."""

    provider_id = "flaky"
    dim = 512

    def __init__(self, fail_after: int):
        self.calls = 0
        self.fail_after = fail_after

    def embed(self, text: str) -> np.ndarray:
        self.calls += 1
        if self.calls > self.fail_after:
            raise ProviderUnavailableError("provider gone")
        v = np.zeros(self.dim)
        v[0] = 1.0
        return v


def test_resilient_uses_primary_until_failure():
    primary = _FlakyPrimary(fail_after=1)
    emb = ResilientEmbedder(primary)
    first = emb.embed("one")
    assert first[0] == 1.0 and not emb.degraded
    second = emb.embed("two")
    assert emb.degraded
    np.testing.assert_array_equal(second, TrigramEmbedder().embed("two"))
    # the flip is permanent even though the primary would work again
    primary.fail_after = 100
    np.testing.assert_array_equal(emb.embed("three"), TrigramEmbedder().embed("three"))
    assert emb.provider_id == "trigram-v1"


def test_embed_all_reembeds_finished_prefix():
    emb = ResilientEmbedder(_FlakyPrimary(fail_after=2))
    texts = ["alpha", "beta", "gamma", "delta"]
    vectors = emb.embed_all(texts)
    reference = TrigramEmbedder()
    for text, vec in zip(texts, vectors):
        np.testing.assert_array_equal(vec, reference.embed(text))


def test_embed_all_clean_batch_stays_primary():
    emb = ResilientEmbedder(_FlakyPrimary(fail_after=100))
    vectors = emb.embed_all(["a", "b"])
    assert all(v[0] == 1.0 for v in vectors)
    assert not emb.degraded
