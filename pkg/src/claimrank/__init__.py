"""Zero-shot retrieval of previously fact-checked claims for social-media posts."""

from claimrank.corpus import (
    AssemblyConfig,
    FactCheck,
    OcrBlock,
    PairSet,
    Post,
    apply_query_prompt,
    assemble_factcheck_text,
    assemble_post_text,
    corpus_stats,
    load_corpus,
    query_text,
    truncate_text,
)
from claimrank.embedding import EmbeddingMatrix, l2_normalize, load_matrix, save_matrix
from claimrank.evaluation import (
    EvalReport,
    evaluate,
    macro_average,
    missed_pairs,
    rank_histogram,
    relative_difference,
    strict_success_at_k,
    success_at_k,
)
from claimrank.fusion import FusionSpec, fuse_run, fuse_three, fuse_two
from claimrank.providers import ProviderConfig, embed_batch, embed_corpus
from claimrank.retrieval import (
    QueryVector,
    RankedEntry,
    RankedRun,
    RetrievalConfig,
    cosine_similarity,
    queries_from_matrix,
    read_run,
    retrieve_run,
    top_k,
    write_run,
)
from claimrank.selection import DevScoreTable, SelectionPlan, apply_plan, select_best

__version__ = "0.1.0"
