import json
import threading
import time
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer

import numpy as np
import pytest

from claimrank.errors import AuthError, DimensionMismatchError, ProviderError, ValidationError
from claimrank.providers import (
    HashTransport,
    HttpTransport,
    LookupTransport,
    ProviderConfig,
    TransientProviderError,
    embed_batch,
    embed_corpus,
)


def mock_cfg(**kw):
    base = dict(provider_id="mock", kind="hash", dim=4, backoff_seconds=0.0)
    base.update(kw)
    return ProviderConfig(**base)


class Fixed:
    """Returns a constant 4-dim vector per text, plus the text index in slot 0."""

    def __init__(self):
        self.calls = []

    def __call__(self, texts):
        self.calls.append(list(texts))
        return [[float(len(t)), 1.0, 2.0, 3.0] for t in texts]


class Flaky:
    def __init__(self, failures):
        self.failures = failures
        self.attempts = 0

    def __call__(self, texts):
        self.attempts += 1
        if self.attempts <= self.failures:
            raise TransientProviderError("HTTP 503")
        return [[1.0, 0.0] for _ in texts]


def test_embed_batch_order_and_dim():
    vecs = embed_batch(mock_cfg(), ["a", "bb", "ccc"], Fixed())
    assert [v[0] for v in vecs] == [1.0, 2.0, 3.0]
    assert all(len(v) == 4 for v in vecs)


def test_retry_then_success():
    sleeps = []
    flaky = Flaky(2)
    vecs = embed_batch(mock_cfg(retry_limit=3, backoff_seconds=0.5), ["x"], flaky, sleep=sleeps.append)
    assert vecs == [[1.0, 0.0]]
    assert flaky.attempts == 3
    assert sleeps == [0.5, 1.0]  # exponential backoff


def test_retries_exhausted():
    with pytest.raises(ProviderError) as info:
        embed_batch(mock_cfg(retry_limit=2), ["x"], Flaky(5), batch_index=7, sleep=lambda s: None)
    assert info.value.batch_index == 7 and info.value.provider_id == "mock"
    assert "3 attempts" in str(info.value)


def test_non_retryable_error_not_retried():
    calls = []

    def broken(texts):
        calls.append(1)
        raise ProviderError("HTTP 400", "mock")

    with pytest.raises(ProviderError, match="batch=0"):
        embed_batch(mock_cfg(), ["x"], broken)
    assert len(calls) == 1


def test_dimension_mismatch_within_batch():
    with pytest.raises(DimensionMismatchError):
        embed_batch(mock_cfg(), ["a", "b"], lambda texts: [[1, 2, 3, 4], [1, 2, 3, 4, 5]])


def test_embed_batch_rejects_empty_input():
    with pytest.raises(ValidationError):
        embed_batch(mock_cfg(), [], Fixed())
    with pytest.raises(ValidationError):
        embed_batch(mock_cfg(), ["a", ""], Fixed())


def test_embed_corpus_batching():
    t = Fixed()
    items = [(f"id{i}", "x" * (i + 1)) for i in range(100)]
    m = embed_corpus(mock_cfg(batch_size=32, max_parallel_requests=1), items, t)
    assert len(t.calls) == 4 and [len(c) for c in t.calls] == [32, 32, 32, 4]
    assert m.n == 100 and m.ids == tuple(i for i, _ in items)
    assert np.all(np.abs(np.linalg.norm(m.rows, axis=1) - 1) <= 1e-5)


def test_embed_corpus_empty():
    m = embed_corpus(mock_cfg(), [], Fixed())
    assert m.n == 0


class SlowShuffled:
    """Finishes batches in a scrambled order to expose ordering bugs."""

    def __init__(self):
        self.inner = HashTransport(16)

    def __call__(self, texts):
        time.sleep((hash(texts[0]) % 5) * 0.002)
        return self.inner(texts)


def test_embed_corpus_deterministic_under_parallelism():
    items = [(f"id{i}", f"text number {i} about vaccines") for i in range(90)]
    serial = embed_corpus(mock_cfg(dim=16, batch_size=7, max_parallel_requests=1), items, SlowShuffled())
    parallel = embed_corpus(mock_cfg(dim=16, batch_size=7, max_parallel_requests=8), items, SlowShuffled())
    again = embed_corpus(mock_cfg(dim=16, batch_size=7, max_parallel_requests=8), items, SlowShuffled())
    assert serial == parallel == again
    assert serial.rows.tobytes() == parallel.rows.tobytes()


def test_embed_corpus_error_names_id_range():
    def fail_second_batch(texts):
        if texts[0] == "t3":
            raise ProviderError("HTTP 400", "mock")
        return [[1.0, 0.0]] * len(texts)

    items = [(f"id{i}", f"t{i}") for i in range(6)]
    with pytest.raises(ProviderError, match=r"ids='id3'..'id5'"):
        embed_corpus(mock_cfg(batch_size=3, max_parallel_requests=1), items, fail_second_batch)


def test_embed_corpus_zero_vectors_become_zero_rows():
    m = embed_corpus(mock_cfg(), [("a", "x"), ("b", "y")], lambda texts: [[0.0, 0.0] if t == "y" else [2.0, 0.0] for t in texts])
    assert m.zero_rows.tolist() == [False, True]


def test_hash_transport_is_deterministic_and_token_sensitive():
    t = HashTransport(32)
    a, b, c = t(["vaccines cause autism", "Vaccines cause AUTISM", "moon landing hoax"])
    assert a == b
    cos = lambda x, y: np.dot(x, y) / np.linalg.norm(x) / np.linalg.norm(y)  # noqa: E731
    assert cos(a, t(["vaccines cause harm"])[0]) > cos(a, c)


def test_lookup_transport_unknown_text():
    with pytest.raises(ProviderError):
        LookupTransport({"a": [1.0]})(["b"])


def test_config_validation():
    with pytest.raises(ValidationError):
        ProviderConfig("p", kind="hash", batch_size=0)
    with pytest.raises(ValidationError):
        ProviderConfig("p", kind="hash", max_parallel_requests=0)
    with pytest.raises(ValidationError):
        ProviderConfig("p", kind="http")  # no endpoint


# --- HTTP wire protocol against a local server -----------------------------


class EmbeddingsHandler(BaseHTTPRequestHandler):
    script: list = []  # statuses to return before succeeding
    seen: list = []

    def log_message(self, *args):
        pass

    def do_POST(self):
        body = json.loads(self.rfile.read(int(self.headers["Content-Length"])))
        type(self).seen.append({"auth": self.headers.get("Authorization"), "body": body})
        if type(self).script:
            status = type(self).script.pop(0)
            self.send_response(status)
            self.end_headers()
            return
        # reversed order on purpose: client must sort by index
        data = [{"index": i, "embedding": [float(len(t)), float(i), 1.0]} for i, t in enumerate(body["input"])][::-1]
        payload = json.dumps({"data": data, "model": body["model"]}).encode()
        self.send_response(200)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(payload)))
        self.end_headers()
        self.wfile.write(payload)


@pytest.fixture
def server():
    EmbeddingsHandler.script = []
    EmbeddingsHandler.seen = []
    httpd = ThreadingHTTPServer(("127.0.0.1", 0), EmbeddingsHandler)
    thread = threading.Thread(target=httpd.serve_forever, daemon=True)
    thread.start()
    yield f"http://127.0.0.1:{httpd.server_address[1]}/v1/embeddings"
    httpd.shutdown()


def http_cfg(url, **kw):
    base = dict(provider_id="remote", endpoint_url=url, model_name="text-embedding-3-large",
                api_key_env_var="CLAIMRANK_TEST_KEY", backoff_seconds=0.0, timeout_seconds=5)
    base.update(kw)
    return ProviderConfig(**base)


def test_http_protocol(server, monkeypatch):
    monkeypatch.setenv("CLAIMRANK_TEST_KEY", "sekret")
    cfg = http_cfg(server)
    vecs = embed_batch(cfg, ["a", "bbb"], HttpTransport(cfg))
    assert vecs == [[1.0, 0.0, 1.0], [3.0, 1.0, 1.0]]
    req = EmbeddingsHandler.seen[0]
    assert req["auth"] == "Bearer sekret"
    assert req["body"] == {"model": "text-embedding-3-large", "input": ["a", "bbb"]}


def test_http_retries_503(server, monkeypatch):
    monkeypatch.setenv("CLAIMRANK_TEST_KEY", "k")
    EmbeddingsHandler.script = [503, 429]
    cfg = http_cfg(server, retry_limit=3)
    assert len(embed_batch(cfg, ["x"], HttpTransport(cfg))) == 1
    assert len(EmbeddingsHandler.seen) == 3


def test_http_400_is_fatal(server, monkeypatch):
    monkeypatch.setenv("CLAIMRANK_TEST_KEY", "k")
    EmbeddingsHandler.script = [400]
    cfg = http_cfg(server)
    with pytest.raises(ProviderError, match="HTTP 400"):
        embed_batch(cfg, ["x"], HttpTransport(cfg))
    assert len(EmbeddingsHandler.seen) == 1


def test_http_401_is_auth_error(server, monkeypatch):
    monkeypatch.setenv("CLAIMRANK_TEST_KEY", "wrong")
    EmbeddingsHandler.script = [401]
    cfg = http_cfg(server)
    with pytest.raises(AuthError, match="CLAIMRANK_TEST_KEY"):
        embed_batch(cfg, ["x"], HttpTransport(cfg))


def test_missing_api_key_names_variable(server, monkeypatch):
    monkeypatch.delenv("CLAIMRANK_TEST_KEY", raising=False)
    with pytest.raises(AuthError, match="CLAIMRANK_TEST_KEY"):
        HttpTransport(http_cfg(server))


def test_http_embed_corpus_parallel(server, monkeypatch):
    monkeypatch.setenv("CLAIMRANK_TEST_KEY", "k")
    cfg = http_cfg(server, batch_size=3, max_parallel_requests=4)
    items = [(f"id{i}", "y" * (i + 1)) for i in range(10)]
    m = embed_corpus(cfg, items, HttpTransport(cfg))
    assert m.n == 10 and len(EmbeddingsHandler.seen) == 4


def test_connection_refused_is_transient():
    cfg = http_cfg("http://127.0.0.1:9/none", api_key_env_var="", retry_limit=1, timeout_seconds=1)
    with pytest.raises(ProviderError, match="2 attempts"):
        embed_batch(cfg, ["x"], HttpTransport(cfg))
