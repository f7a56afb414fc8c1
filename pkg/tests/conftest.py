import json
from pathlib import Path

import pytest


def write_jsonl(path: Path, rows) -> Path:
    with open(path, "w", encoding="utf-8") as fh:
        for row in rows:
            fh.write(json.dumps(row, ensure_ascii=False) + "\n")
    return path


@pytest.fixture
def small_corpus_files(tmp_path):
    """3 posts, 5 fact-checks, 3 gold pairs."""
    posts = [
        {"id": "p1", "language": "fra", "text_original": "Bonjour", "text_english": "Hello",
         "ocr": [{"text_original": "affiche", "text_english": "poster", "detected_language": "fra"}],
         "verdict": "False information", "timestamps": [1600000000]},
        {"id": "p2", "language": "fra", "text_english": "Vaccines contain chips"},
        {"id": "p3", "language": "spa", "text_original": "", "text_english": "", "ocr": [{"text_english": "only ocr"}]},
    ]
    fcs = [
        {"id": f"f{i}", "language": "fra" if i <= 3 else "spa", "claim_english": f"claim {i}",
         "claim_original": f"affirmation {i}", "title_english": f"title {i}" if i % 2 else ""}
        for i in range(1, 6)
    ]
    pairs = [{"post_id": "p1", "factcheck_id": "f1"}, {"post_id": "p2", "factcheck_id": "f2"},
             {"post_id": "p3", "factcheck_id": "f4"}]
    return (
        write_jsonl(tmp_path / "posts.jsonl", posts),
        write_jsonl(tmp_path / "factchecks.jsonl", fcs),
        write_jsonl(tmp_path / "pairs.jsonl", pairs),
    )
