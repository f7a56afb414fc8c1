"""
The command-line pipeline end to end
====================================

Writes a small corpus and a config file to a temporary directory, then
drives every subcommand in order with the offline hash provider. The same
commands run from a shell as ``claimrank <command> --config pipeline.ini``.
"""

import json
import tempfile
from pathlib import Path

from claimrank.cli import main
from claimrank.corpus import FactCheck, PairSet, Post, save_corpus

work = Path(tempfile.mkdtemp(prefix="claimrank-demo-"))
posts = [
    Post("p1", "eng", text_english="5G towers spread the virus"),
    Post("p2", "eng", text_english="drinking hot water cures covid"),
    Post("p3", "fra", text_english="the moon landing was filmed in a studio"),
]
fcs = [
    FactCheck("f1", "eng", claim_english="5G towers do not spread the virus", title_english="5G and covid"),
    FactCheck("f2", "eng", claim_english="hot water does not cure covid"),
    FactCheck("f3", "eng", claim_english="vaccines are safe"),
    FactCheck("f4", "fra", claim_english="the moon landing was real, not filmed in a studio"),
    FactCheck("f5", "fra", claim_english="the earth is round"),
]
save_corpus(posts, fcs, PairSet((("p1", "f1"), ("p2", "f2"), ("p3", "f4"))), work / "data")
(work / "pipeline.ini").write_text(
    """\
[corpus]
posts = data/posts.jsonl
factchecks = data/factchecks.jsonl
pairs = data/pairs.jsonl

[retrieval]
k = 10
scenario = mono

[provider words]
kind = hash
dim = 128

[provider words-small]
kind = hash
dim = 16

[fusion words+words-small]
models = words, words-small
"""
)
cfg = ["--config", str(work / "pipeline.ini")]

main(["ingest", *cfg])
for provider in ("words", "words-small"):
    main(["embed", *cfg, "--provider", provider])
    main(["retrieve", *cfg, "--provider", provider])
main(["fuse", *cfg, "--spec", "words+words-small"])
main(["evaluate", *cfg, "--run", str(work / "out/runs/words+words-small.monolingual.run"), "--compare-k", "1"])

(work / "dev.csv").write_text("candidate,eng,fra\nwords,0.9,0.8\nwords-small,0.7,0.9\nwords+words-small,0.9,0.85\n")
main(["select", *cfg, "--scores", str(work / "dev.csv")])
# eng is a tie between words and the fusion; the single model wins it.
main(["predict", *cfg])
print(json.loads((work / "out/submission.monolingual.json").read_text()))
