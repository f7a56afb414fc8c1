"""
Retrieval on a corpus with known answers
========================================

A planted corpus has embeddings built so that every gold fact-check sits at
a known rank. We push it through the same steps a real run uses: assemble
texts, embed them with a (mock) provider, search, and score.
"""

from claimrank.corpus import AssemblyConfig, assemble_factcheck_text, corpus_stats, query_text
from claimrank.evaluation import evaluate
from claimrank.providers import LookupTransport, ProviderConfig, embed_corpus
from claimrank.retrieval import RetrievalConfig, queries_from_matrix, retrieve_run
from claimrank.synthetic import planted_corpus

planted = planted_corpus(languages=("fra", "spa", "deu"), posts_per_language=20, n_factchecks=300)
for lang, s in corpus_stats(planted.posts, planted.pairs).items():
    print(f"{lang}: {s.post_count} posts, {s.pair_count} pairs")

# The lookup transport answers with the planted vector for each exact text,
# standing in for an HTTP embeddings service.
acfg = AssemblyConfig()
transport = LookupTransport(planted.lookup_table(acfg))
provider = ProviderConfig(provider_id="mock", kind="hash", batch_size=16, max_parallel_requests=4)
post_m = embed_corpus(provider, [(p.id, query_text(p, acfg)) for p in planted.posts], transport)
fc_m = embed_corpus(provider, [(f.id, assemble_factcheck_text(f, acfg)) for f in planted.factchecks], transport)
print(f"embedded {post_m.n} posts and {fc_m.n} fact-checks in {transport.calls} provider calls")

for scenario in ("monolingual", "crosslingual"):
    run = retrieve_run(queries_from_matrix(post_m), planted.posts, fc_m, planted.factchecks, RetrievalConfig(10, scenario))
    rep = evaluate(run, planted.pairs, planted.posts, 10)
    print(f"\n{scenario}: macro S@10 = {rep.macro_success_at_k:.3f}")
    for lang, r in rep.per_language.items():
        print(f"  {lang:<4} S@10={r.success_at_k:.3f} strict={r.strict_success_at_k:.3f}")

# Now move each gold one place past the cut-off: every pair lands in "11+".
hard = planted_corpus(gold_rank=11)
run = retrieve_run(
    queries_from_matrix(hard.post_matrix), hard.posts, hard.factcheck_matrix, hard.factchecks, RetrievalConfig(10, "monolingual")
)
rep = evaluate(run, hard.pairs, hard.posts, 10)
print(f"\ngolds at rank 11: macro S@10 = {rep.macro_success_at_k:.3f}, histogram = {rep.histogram.counts}")
