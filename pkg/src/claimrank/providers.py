"""Embedding providers: the HTTP embeddings-API client and deterministic local mocks.

Every provider is reduced to a *transport*, a callable taking a list of
texts and returning one vector per text.  Retries, batching and
concurrency are handled once, in :func:`embed_batch` and
:func:`embed_corpus`, so mocks and real services share the same code path.

Wire protocol::

    POST {endpoint_url}
    Authorization: Bearer $API_KEY
    {"model": model_name, "input": [texts]}
    -> {"data": [{"index": 0, "embedding": [floats]}, ...]}
"""

from __future__ import annotations

import hashlib
import logging
import os
import re
import time
from collections.abc import Callable, Mapping, Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import httpx
import numpy as np

from claimrank.corpus import TextMode
from claimrank.embedding import EmbeddingMatrix
from claimrank.errors import AuthError, DimensionMismatchError, DuplicateIdError, ProviderError, ValidationError

log = logging.getLogger(__name__)

Vector = list[float]
Transport = Callable[[list[str]], Sequence[Sequence[float]]]

RETRYABLE_STATUS = frozenset({408, 409, 425, 429, 500, 502, 503, 504})


class TransientProviderError(ProviderError):
    """A failure worth retrying (timeouts, 429, 5xx)."""


@dataclass(frozen=True)
class ProviderConfig:
    provider_id: str
    endpoint_url: str = ""
    model_name: str = ""
    api_key_env_var: str = ""
    batch_size: int = 32
    max_parallel_requests: int = 4
    retry_limit: int = 3
    query_prompt: str | None = None
    text_mode: TextMode = "english"
    kind: str = "http"  # "http" or "hash" (offline deterministic mock)
    dim: int = 64  # only used by the hash mock
    backoff_seconds: float = 0.5
    timeout_seconds: float = 60.0
    max_chars: int = 8000

    def __post_init__(self) -> None:
        if not self.provider_id:
            raise ValidationError("provider_id must be non-empty")
        if self.batch_size < 1:
            raise ValidationError("batch_size must be >= 1")
        if self.max_parallel_requests < 1:
            raise ValidationError("max_parallel_requests must be >= 1")
        if self.retry_limit < 0:
            raise ValidationError("retry_limit must be >= 0")
        if self.kind not in ("http", "hash"):
            raise ValidationError(f"unknown provider kind {self.kind!r}")
        if self.kind == "http" and not self.endpoint_url:
            raise ValidationError(f"provider {self.provider_id!r} needs an endpoint_url")


# --- transports ------------------------------------------------------------


class HttpTransport:
    """Client for the common ``/embeddings`` JSON shape."""

    def __init__(self, cfg: ProviderConfig, client: httpx.Client | None = None):
        self.cfg = cfg
        self._client = client or httpx.Client(timeout=cfg.timeout_seconds)
        self._headers = {"Content-Type": "application/json"}
        if cfg.api_key_env_var:
            key = os.environ.get(cfg.api_key_env_var)
            if not key:
                raise AuthError(
                    f"environment variable {cfg.api_key_env_var} is not set", provider_id=cfg.provider_id
                )
            self._headers["Authorization"] = f"Bearer {key}"

    def __call__(self, texts: list[str]) -> list[Vector]:
        cfg = self.cfg
        try:
            resp = self._client.post(
                cfg.endpoint_url, json={"model": cfg.model_name, "input": texts}, headers=self._headers
            )
        except httpx.TransportError as exc:
            raise TransientProviderError(f"transport error: {exc}", cfg.provider_id) from exc
        if resp.status_code in (401, 403):
            raise AuthError(
                f"HTTP {resp.status_code}: credentials from {cfg.api_key_env_var or '<none>'} rejected",
                cfg.provider_id,
            )
        if resp.status_code in RETRYABLE_STATUS:
            raise TransientProviderError(f"HTTP {resp.status_code}", cfg.provider_id)
        if resp.status_code >= 400:
            raise ProviderError(f"HTTP {resp.status_code}: {resp.text[:200]}", cfg.provider_id)
        try:
            data = resp.json()["data"]
            by_index = {int(item["index"]): item["embedding"] for item in data}
        except (ValueError, KeyError, TypeError) as exc:
            raise ProviderError(f"malformed response: {exc}", cfg.provider_id) from exc
        if sorted(by_index) != list(range(len(texts))):
            raise ProviderError(
                f"response indices {sorted(by_index)[:5]}... do not cover 0..{len(texts) - 1}", cfg.provider_id
            )
        return [by_index[i] for i in range(len(texts))]

    def close(self) -> None:
        self._client.close()


_TOKEN = re.compile(r"\w+", re.UNICODE)


class HashTransport:
    """Offline bag-of-words embedder: each lower-cased token maps to a seeded
    Gaussian direction. Texts sharing words get similar vectors, which is
    enough for demos and end-to-end tests.
    """

    def __init__(self, dim: int = 64):
        if dim < 1:
            raise ValidationError("dim must be >= 1")
        self.dim = dim
        self.calls = 0

    def _token_vector(self, token: str) -> np.ndarray:
        seed = int.from_bytes(hashlib.blake2b(token.encode("utf-8"), digest_size=8).digest(), "little")
        return np.random.default_rng(seed).standard_normal(self.dim)

    def __call__(self, texts: list[str]) -> list[Vector]:
        self.calls += 1
        out = []
        for text in texts:
            v = np.zeros(self.dim)
            for tok in _TOKEN.findall(text.lower()):
                v += self._token_vector(tok)
            out.append(v.tolist())
        return out


class LookupTransport:
    """Returns pre-planted vectors keyed by exact input text. Mainly for tests."""

    def __init__(self, table: Mapping[str, Sequence[float]]):
        self.table = dict(table)
        self.calls = 0

    def __call__(self, texts: list[str]) -> list[Vector]:
        self.calls += 1
        try:
            return [list(self.table[t]) for t in texts]
        except KeyError as exc:
            raise ProviderError(f"no planted vector for text {exc.args[0][:40]!r}") from None


def make_transport(cfg: ProviderConfig) -> Transport:
    if cfg.kind == "hash":
        return HashTransport(cfg.dim)
    return HttpTransport(cfg)


# --- batching and retries --------------------------------------------------


def embed_batch(
    cfg: ProviderConfig,
    texts: list[str],
    transport: Transport | None = None,
    *,
    batch_index: int = 0,
    sleep: Callable[[float], None] = time.sleep,
) -> list[Vector]:
    """Embed one batch, retrying transient failures with exponential backoff.

    At most ``1 + cfg.retry_limit`` attempts are made.
    """
    if not texts:
        raise ValidationError("embed_batch needs at least one text")
    if any(not t for t in texts):
        raise ValidationError("embed_batch got an empty text")
    transport = transport or make_transport(cfg)
    attempt = 0
    while True:
        try:
            vectors = transport(list(texts))
            break
        except TransientProviderError as exc:
            if attempt >= cfg.retry_limit:
                raise ProviderError(
                    f"giving up after {attempt + 1} attempts ({exc})", cfg.provider_id, batch_index
                ) from exc
            delay = cfg.backoff_seconds * 2**attempt
            log.warning("provider %s batch %d: %s; retry in %.2fs", cfg.provider_id, batch_index, exc, delay)
            sleep(delay)
            attempt += 1
        except ProviderError as exc:
            if exc.batch_index is None:
                exc.batch_index = batch_index
                exc.args = (f"{exc.args[0]} batch={batch_index}",)
            raise
    if len(vectors) != len(texts):
        raise ProviderError(f"got {len(vectors)} vectors for {len(texts)} texts", cfg.provider_id, batch_index)
    dims = {len(v) for v in vectors}
    if len(dims) != 1:
        raise DimensionMismatchError(
            f"provider {cfg.provider_id} returned dimensions {sorted(dims)} in batch {batch_index}"
        )
    return [list(map(float, v)) for v in vectors]


def embed_corpus(
    cfg: ProviderConfig,
    items: Sequence[tuple[str, str]],
    transport: Transport | None = None,
    *,
    model_id: str | None = None,
    sleep: Callable[[float], None] = time.sleep,
) -> EmbeddingMatrix:
    """Embed ``(id, text)`` items into a normalized matrix, rows in input order.

    Batches run on up to ``max_parallel_requests`` threads; results are
    placed by batch index so the output does not depend on completion order.
    """
    ids = [i for i, _ in items]
    if len(set(ids)) != len(ids):
        raise DuplicateIdError("embed_corpus item ids must be unique")
    model_id = model_id or cfg.provider_id
    if not items:
        return EmbeddingMatrix.from_vectors(model_id, [], [])
    transport = transport or make_transport(cfg)
    texts = [t for _, t in items]
    starts = list(range(0, len(texts), cfg.batch_size))

    def run(b: int) -> list[Vector]:
        lo = starts[b]
        hi = min(lo + cfg.batch_size, len(texts))
        try:
            return embed_batch(cfg, texts[lo:hi], transport, batch_index=b, sleep=sleep)
        except ProviderError as exc:
            exc.args = (f"{exc.args[0]} ids={ids[lo]!r}..{ids[hi - 1]!r}",)
            raise
        except DimensionMismatchError as exc:
            raise DimensionMismatchError(f"{exc} (ids {ids[lo]!r}..{ids[hi - 1]!r})") from exc

    workers = min(cfg.max_parallel_requests, len(starts))
    if workers == 1:
        batches = [run(b) for b in range(len(starts))]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            batches = list(pool.map(run, range(len(starts))))

    dims = {len(batch[0]) for batch in batches}
    if len(dims) != 1:
        raise DimensionMismatchError(f"provider {cfg.provider_id} returned dimensions {sorted(dims)} across batches")
    vectors = np.asarray([v for batch in batches for v in batch], dtype=np.float64)
    zero = int((np.linalg.norm(vectors, axis=1) < 1e-12).sum())
    if zero:
        log.warning("provider %s: %d zero-norm embeddings stored as zero rows", cfg.provider_id, zero)
    return EmbeddingMatrix.from_vectors(model_id, ids, vectors)
