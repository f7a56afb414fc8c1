"""Planted corpora with known answers, for tests and demos.

Embeddings are built from orthogonal directions so that the rank of every
gold fact-check is exact by construction:

* post ``i`` points along its own axis plus a shared per-language axis;
* ten "distractor" fact-checks per language lie almost on the language axis
  and score about 0.89 against every post of that language;
* filler fact-checks live on private axes and score exactly 0;
* gold fact-checks either equal the post vector (rank 1) or lie between the
  distractors and the filler (rank 11, one place past the top ten).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from claimrank.corpus import AssemblyConfig, FactCheck, PairSet, Post, assemble_factcheck_text, query_text
from claimrank.embedding import EmbeddingMatrix

DISTRACTORS_PER_LANGUAGE = 10


@dataclass
class PlantedCorpus:
    posts: list[Post]
    factchecks: list[FactCheck]
    pairs: PairSet
    post_matrix: EmbeddingMatrix
    factcheck_matrix: EmbeddingMatrix

    def lookup_table(self, cfg: AssemblyConfig | None = None) -> dict[str, list[float]]:
        """Assembled text -> planted vector, for a text-keyed mock provider."""
        cfg = cfg or AssemblyConfig()
        table = {query_text(p, cfg): self.post_matrix.vector(p.id).tolist() for p in self.posts}
        for f in self.factchecks:
            table[assemble_factcheck_text(f, cfg)] = self.factcheck_matrix.vector(f.id).tolist()
        return table


def planted_corpus(
    languages: tuple[str, ...] = ("fra", "spa", "deu"),
    posts_per_language: int = 20,
    n_factchecks: int = 300,
    gold_rank: int = 1,
    multi_gold_every: int = 5,
    seed: int = 0,
    model_id: str = "planted",
) -> PlantedCorpus:
    """Build a corpus whose golds sit exactly at ``gold_rank`` (1 or 11).

    Every ``multi_gold_every``-th post gets a second gold fact-check.  Rows
    are shuffled with ``seed`` so ids carry no positional hint.
    """
    if gold_rank not in (1, DISTRACTORS_PER_LANGUAGE + 1):
        raise ValueError("gold_rank must be 1 or 11")
    rng = np.random.default_rng(seed)
    n_posts = len(languages) * posts_per_language
    post_lang = [languages[i // posts_per_language] for i in range(n_posts)]
    gold_count = [2 if multi_gold_every and i % multi_gold_every == multi_gold_every - 1 else 1 for i in range(n_posts)]
    n_gold = sum(gold_count)
    n_distractor = DISTRACTORS_PER_LANGUAGE * len(languages)
    n_filler = n_factchecks - n_gold - n_distractor
    if n_filler < 0:
        raise ValueError(f"n_factchecks={n_factchecks} too small for {n_gold} golds + {n_distractor} distractors")

    # axes: [posts | languages | one private axis per fact-check]
    lang_axis = {lang: n_posts + j for j, lang in enumerate(languages)}
    dim = n_posts + len(languages) + n_factchecks
    private = iter(range(n_posts + len(languages), dim))

    post_vecs = np.zeros((n_posts, dim))
    for i in range(n_posts):
        post_vecs[i, i] = 1.0
        post_vecs[i, lang_axis[post_lang[i]]] = 2.0

    fc_vecs: list[np.ndarray] = []
    fc_lang: list[str] = []
    fc_role: list[str] = []
    pairs_idx: list[tuple[int, int]] = []
    for i in range(n_posts):
        for _ in range(gold_count[i]):
            v = np.zeros(dim)
            if gold_rank == 1:
                v[:] = post_vecs[i]
            else:
                v[i] = 1.0
                v[next(private)] = 1.0
            pairs_idx.append((i, len(fc_vecs)))
            fc_vecs.append(v)
            fc_lang.append(post_lang[i])
            fc_role.append("gold")
    for lang in languages:
        for _ in range(DISTRACTORS_PER_LANGUAGE):
            v = np.zeros(dim)
            v[lang_axis[lang]] = 1.0
            v[next(private)] = 0.1
            fc_vecs.append(v)
            fc_lang.append(lang)
            fc_role.append("distractor")
    for j in range(n_filler):
        v = np.zeros(dim)
        v[next(private)] = 1.0
        fc_vecs.append(v)
        fc_lang.append(languages[j % len(languages)])
        fc_role.append("filler")

    post_perm = rng.permutation(n_posts)
    fc_perm = rng.permutation(n_factchecks)
    post_ids = [f"p{post_perm[i]:04d}" for i in range(n_posts)]
    fc_ids = [f"fc{fc_perm[j]:05d}" for j in range(n_factchecks)]

    posts = [
        Post(post_ids[i], post_lang[i], text_original=f"original {post_ids[i]}", text_english=f"post {post_ids[i]}")
        for i in range(n_posts)
    ]
    fcs = [
        FactCheck(
            fc_ids[j],
            fc_lang[j],
            claim_original=f"claim {fc_ids[j]}",
            claim_english=f"{fc_role[j]} claim {fc_ids[j]}",
            title_english=f"title {fc_ids[j]}",
        )
        for j in range(n_factchecks)
    ]

    post_order = np.argsort(post_ids)
    fc_order = rng.permutation(n_factchecks)
    post_matrix = EmbeddingMatrix.from_vectors(model_id, [post_ids[i] for i in post_order], post_vecs[post_order])
    fc_arr = np.stack(fc_vecs)
    fc_matrix = EmbeddingMatrix.from_vectors(model_id, [fc_ids[j] for j in fc_order], fc_arr[fc_order])
    pairs = PairSet(tuple((post_ids[i], fc_ids[j]) for i, j in pairs_idx))
    return PlantedCorpus(posts, fcs, pairs, post_matrix, fc_matrix)
