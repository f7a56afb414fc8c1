"""
Choosing a model per language
=============================

Given dev-set S@10 for each candidate (single models and their fusions),
pick the best candidate per language. Ties within 1e-9 go to the candidate
with fewer models, then to the configured tie-break order. Languages that
were never scored fall back to the candidate with the best macro average.
"""

from claimrank.selection import DevScoreTable, apply_plan, select_best

langs = ["eng", "fra", "deu", "por", "spa", "tha", "msa", "ara"]
rows = {
    "gpt": [0.85, 0.92, 0.70, 0.83, 0.89, 0.98, 0.88, 0.82],
    "mistral": [0.84, 0.90, 0.80, 0.82, 0.90, 0.98, 0.88, 0.81],
    "nv-embed": [0.87, 0.95, 0.89, 0.88, 0.92, 0.95, 0.90, 0.86],
    "gpt+mistral": [0.83, 0.90, 0.75, 0.81, 0.89, 0.95, 0.88, 0.79],
    "gpt+nv-embed": [0.87, 0.95, 0.88, 0.87, 0.92, 0.95, 0.90, 0.87],
    "mistral+nv-embed": [0.87, 0.95, 0.88, 0.87, 0.92, 0.98, 0.89, 0.86],
    "gpt+mistral+nv-embed": [0.87, 0.93, 0.84, 0.86, 0.92, 0.98, 0.90, 0.86],
}
table = DevScoreTable({tag: dict(zip(langs, r)) for tag, r in rows.items()})
for tag in table.candidates:
    print(f"{tag:<22} avg {table.macro(tag):.4f}")

plan = select_best(table, tie_break=["nv-embed", "gpt+nv-embed", "mistral+nv-embed"])
print()
for lang in langs + ["pol", "tur"]:
    print(f"{lang:<4} -> {apply_plan(plan, lang)}")
