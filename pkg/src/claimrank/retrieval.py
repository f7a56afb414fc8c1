"""Exact cosine top-k search and TREC-style run files.

Search is a full scan: a float32 matrix product over all candidates picks
everything within a rounding margin of the k-th best score, and those few
survivors are rescored row by row in float64.  The final order is
``(score desc, factcheck_id asc)``, so identical vectors are ranked by id and
the result never depends on row order in the matrix.
"""

from __future__ import annotations

import logging
import math
from collections.abc import Collection, Iterable, Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Literal

import numpy as np

from claimrank.corpus import FactCheck, Post
from claimrank.embedding import EmbeddingMatrix
from claimrank.errors import DimensionMismatchError, EmptyCandidateSetError, ParseError, ValidationError

log = logging.getLogger(__name__)

Scenario = Literal["monolingual", "crosslingual"]
SCENARIOS: tuple[Scenario, ...] = ("monolingual", "crosslingual")

# Bytes of float32 scores materialized per query chunk.
_SCORE_BUDGET = 128 * 1024 * 1024


@dataclass(frozen=True)
class RankedEntry:
    factcheck_id: str
    score: float
    rank: int


@dataclass(frozen=True)
class QueryVector:
    post_id: str
    vector: np.ndarray


@dataclass(frozen=True)
class RetrievalConfig:
    k: int = 10
    scenario: Scenario = "monolingual"

    def __post_init__(self) -> None:
        if self.k < 1:
            raise ValidationError("k must be >= 1")
        if self.scenario not in SCENARIOS:
            raise ValidationError(f"unknown scenario {self.scenario!r}")


@dataclass
class RankedRun:
    """Ranked fact-check lists for every post of one system."""

    run_tag: str
    scenario: Scenario
    lists: dict[str, list[RankedEntry]]
    warnings: list[str] = field(default_factory=list)

    def ids(self, post_id: str, depth: int | None = None) -> list[str]:
        entries = self.lists.get(post_id, [])
        return [e.factcheck_id for e in entries[:depth]]

    def __post_init__(self) -> None:
        for post_id, entries in self.lists.items():
            ids = [e.factcheck_id for e in entries]
            if len(set(ids)) != len(ids):
                raise ValidationError(f"duplicate fact-check in list for post {post_id!r}")


def cosine_similarity(a: Sequence[float] | np.ndarray, b: Sequence[float] | np.ndarray) -> float:
    """Cosine of the angle between ``a`` and ``b``; 0.0 if either is a zero vector."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise DimensionMismatchError(f"shapes {a.shape} and {b.shape} differ")
    na = float(np.linalg.norm(a))
    nb = float(np.linalg.norm(b))
    if na < 1e-12 or nb < 1e-12:
        return 0.0
    return float(np.clip(np.dot(a, b) / (na * nb), -1.0, 1.0))


def _unit_queries(queries: np.ndarray) -> np.ndarray:
    q = np.asarray(queries, dtype=np.float64)
    norms = np.linalg.norm(q, axis=1, keepdims=True)
    return np.where(norms < 1e-12, 0.0, q / np.where(norms < 1e-12, 1.0, norms))


class Searcher:
    """Exact top-k search over a fixed candidate subset of an embedding matrix.

    Build one per candidate pool (e.g. per language) and reuse it for all
    queries against that pool.
    """

    def __init__(self, matrix: EmbeddingMatrix, candidates: np.ndarray | None = None):
        self.matrix = matrix
        if candidates is None:
            self.candidates = np.arange(matrix.n)
            self.rows = matrix.rows
        else:
            self.candidates = np.unique(np.asarray(candidates, dtype=np.int64))
            self.rows = matrix.rows[self.candidates]
        if len(self.candidates) == 0:
            raise EmptyCandidateSetError(f"no candidates in matrix {matrix.model_id!r}")
        ids = [matrix.ids[i] for i in self.candidates]
        self.ids = ids
        order = sorted(range(len(ids)), key=ids.__getitem__)
        self.id_rank = np.empty(len(ids), dtype=np.int64)
        self.id_rank[order] = np.arange(len(ids))
        # float32 dot products of unit vectors err by at most ~E * 2**-24;
        # twice that bounds a miss of any true top-k member.
        self.margin = (matrix.dim + 2) * 2.0**-23
        if matrix.normalized:
            # unit rows up to float32 rounding: dot and cosine agree to ~1e-7
            self.inv_norm = None
            self.margin += 1e-6
        else:
            sq = np.einsum("ij,ij->i", self.rows, self.rows, dtype=np.float64)
            self.inv_norm = np.where(sq > 0, 1.0 / np.sqrt(np.where(sq > 0, sq, 1.0)), 0.0).astype(np.float32)
            self.margin *= 2

    def __len__(self) -> int:
        return len(self.candidates)

    def _finalize(self, q64: np.ndarray, local: np.ndarray, k: int) -> list[RankedEntry]:
        rows = self.rows[local].astype(np.float64)
        norms = np.sqrt((rows * rows).sum(axis=1))
        dots = (rows * q64).sum(axis=1)
        exact = np.divide(dots, norms, out=np.zeros_like(dots), where=norms >= 1e-12)
        np.clip(exact, -1.0, 1.0, out=exact)
        order = np.lexsort((self.id_rank[local], -exact))[:k]
        return [
            RankedEntry(self.ids[local[j]], float(exact[j]), r)
            for r, j in enumerate(order, start=1)
        ]

    def search(self, queries: np.ndarray, k: int) -> list[list[RankedEntry]]:
        """Top-k lists for each row of ``queries`` (shape ``m x E``)."""
        if k < 1:
            raise ValidationError("k must be >= 1")
        queries = np.atleast_2d(np.asarray(queries))
        if queries.shape[1] != self.matrix.dim:
            raise DimensionMismatchError(f"query dim {queries.shape[1]} != matrix dim {self.matrix.dim}")
        q64 = _unit_queries(queries)
        n = len(self.candidates)
        if n <= k:
            everything = np.arange(n)
            return [self._finalize(q, everything, k) for q in q64]

        q32 = q64.astype(np.float32)
        chunk = max(1, _SCORE_BUDGET // (4 * n))
        out: list[list[RankedEntry]] = []
        for lo in range(0, len(q32), chunk):
            scores = q32[lo : lo + chunk] @ self.rows.T
            if self.inv_norm is not None:
                scores *= self.inv_norm
            kth = np.partition(scores, n - k, axis=1)[:, n - k]
            keep = scores >= (kth - self.margin)[:, None]
            for i in range(scores.shape[0]):
                local = np.flatnonzero(keep[i])
                out.append(self._finalize(q64[lo + i], local, k))
        return out


def top_k(
    query: QueryVector | np.ndarray,
    matrix: EmbeddingMatrix,
    k: int,
    candidate_filter: Collection[str] | None = None,
) -> list[RankedEntry]:
    """The ``min(k, |candidates|)`` fact-checks most cosine-similar to ``query``."""
    vector = query.vector if isinstance(query, QueryVector) else query
    vector = np.asarray(vector)
    if vector.ndim != 1 or vector.shape[0] != matrix.dim:
        raise DimensionMismatchError(f"query shape {vector.shape} vs matrix dim {matrix.dim}")
    candidates = None
    if candidate_filter is not None:
        candidates = np.array(
            [matrix.index_of(i) for i in candidate_filter if i in matrix], dtype=np.int64
        )
    return Searcher(matrix, candidates).search(vector[None, :], k)[0]


def retrieve_run(
    queries: Sequence[QueryVector],
    posts: Iterable[Post],
    matrix: EmbeddingMatrix,
    factchecks: Iterable[FactCheck],
    cfg: RetrievalConfig,
    run_tag: str | None = None,
    workers: int = 1,
) -> RankedRun:
    """Rank fact-checks for every query post.

    Monolingual runs only consider fact-checks in the post's language; posts
    whose language has no fact-checks get an empty list and a warning.
    """
    lang_of = {p.id: p.language for p in posts}
    fcs = list(factchecks)
    missing = [f.id for f in fcs if f.id not in matrix]
    if missing:
        raise ValidationError(f"{len(missing)} fact-checks missing from matrix, e.g. {missing[0]!r}")
    unknown = [q.post_id for q in queries if q.post_id not in lang_of]
    if unknown:
        raise ValidationError(f"query post {unknown[0]!r} is not in the corpus")

    groups: dict[str | None, list[QueryVector]] = {}
    if cfg.scenario == "monolingual":
        for q in queries:
            groups.setdefault(lang_of[q.post_id], []).append(q)
    else:
        groups[None] = list(queries)

    pools: dict[str | None, np.ndarray] = {}
    for lang in groups:
        pools[lang] = np.array(
            [matrix.index_of(f.id) for f in fcs if lang is None or f.language == lang], dtype=np.int64
        )

    def run_group(lang: str | None) -> tuple[dict[str, list[RankedEntry]], list[str]]:
        members = groups[lang]
        if len(pools[lang]) == 0:
            msg = f"no {lang} fact-checks; {len(members)} posts get empty lists"
            log.warning(msg)
            return {q.post_id: [] for q in members}, [msg]
        pool = None if len(pools[lang]) == matrix.n else pools[lang]
        searcher = Searcher(matrix, pool)
        stacked = np.stack([np.asarray(q.vector) for q in members])
        result = searcher.search(stacked, cfg.k)
        return {q.post_id: entries for q, entries in zip(members, result)}, []

    keys = sorted(groups, key=lambda g: "" if g is None else g)
    if workers > 1 and len(keys) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(run_group, keys))
    else:
        results = [run_group(g) for g in keys]

    lists: dict[str, list[RankedEntry]] = {}
    warnings: list[str] = []
    for part, warn in results:
        lists.update(part)
        warnings.extend(warn)
    lists = dict(sorted(lists.items()))
    return RankedRun(run_tag or matrix.model_id, cfg.scenario, lists, warnings)


def queries_from_matrix(matrix: EmbeddingMatrix, post_ids: Iterable[str] | None = None) -> list[QueryVector]:
    ids = matrix.ids if post_ids is None else list(post_ids)
    return [QueryVector(i, matrix.vector(i)) for i in ids]


# --- run files -------------------------------------------------------------


def format_run(run: RankedRun) -> str:
    lines = []
    for post_id in sorted(run.lists):
        for e in run.lists[post_id]:
            for token in (post_id, e.factcheck_id, run.run_tag):
                if not token or any(c.isspace() for c in token):
                    raise ValidationError(f"run-file token {token!r} is empty or contains whitespace")
            lines.append(f"{post_id} Q0 {e.factcheck_id} {e.rank} {e.score:.6f} {run.run_tag}\n")
    return "".join(lines)


def write_run(run: RankedRun, path: str | Path) -> None:
    """``post_id Q0 factcheck_id rank score run_tag`` per line, grouped by post."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(format_run(run), encoding="utf-8")


def read_run(path: str | Path, scenario: Scenario = "crosslingual", run_tag: str | None = None) -> RankedRun:
    path = Path(path)
    lists: dict[str, list[RankedEntry]] = {}
    tags: set[str] = set()
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            parts = line.split()
            if len(parts) != 6 or parts[1] != "Q0":
                raise ParseError(str(path), line_no, "expected 'post_id Q0 factcheck_id rank score run_tag'")
            post_id, _, fc_id, rank, score, tag = parts
            try:
                entry = RankedEntry(fc_id, float(score), int(rank))
            except ValueError:
                raise ParseError(str(path), line_no, "rank must be int and score float") from None
            if not math.isfinite(entry.score):
                raise ParseError(str(path), line_no, "score must be finite")
            lists.setdefault(post_id, []).append(entry)
            tags.add(tag)
    if len(tags) > 1:
        raise ValidationError(f"{path}: mixed run tags {sorted(tags)}")
    for post_id, entries in lists.items():
        entries.sort(key=lambda e: e.rank)
        if [e.rank for e in entries] != list(range(1, len(entries) + 1)):
            raise ValidationError(f"{path}: ranks for post {post_id!r} are not 1..{len(entries)}")
    tag = run_tag or (tags.pop() if tags else path.stem)
    return RankedRun(tag, scenario, lists)
