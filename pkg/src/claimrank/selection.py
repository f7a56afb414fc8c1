"""Per-language choice of the model or fusion with the best dev-set score.

Ties (within ``TIE_TOLERANCE``) go to the candidate with fewer models, then to
the earlier entry in the caller's ``tie_break`` list.  Languages absent from
the dev table fall back to the candidate with the best macro average.
"""

from __future__ import annotations

import csv
import json
import math
from collections.abc import Mapping, Sequence
from dataclasses import dataclass
from pathlib import Path

from claimrank.errors import EmptyTableError, ValidationError

TIE_TOLERANCE = 1e-9


def constituents(tag: str) -> list[str]:
    return tag.split("+")


@dataclass(frozen=True)
class DevScoreTable:
    rows: dict[str, dict[str, float]]

    def __post_init__(self) -> None:
        langs = None
        for tag, row in self.rows.items():
            for lang, score in row.items():
                if not 0.0 <= score <= 1.0:
                    raise ValidationError(f"score {score} for {tag}/{lang} outside [0, 1]")
            if langs is None:
                langs = set(row)
            elif set(row) != langs:
                raise ValidationError(f"row {tag!r} covers languages {sorted(row)}, expected {sorted(langs)}")

    @property
    def languages(self) -> list[str]:
        return list(next(iter(self.rows.values()))) if self.rows else []

    @property
    def candidates(self) -> list[str]:
        return list(self.rows)

    def macro(self, tag: str) -> float:
        row = self.rows[tag]
        return math.fsum(row.values()) / len(row)


@dataclass(frozen=True)
class SelectionPlan:
    per_language: dict[str, str]
    default_tag: str

    def to_dict(self) -> dict:
        return {"per_language": dict(self.per_language), "default": self.default_tag}

    @classmethod
    def from_dict(cls, d: Mapping) -> SelectionPlan:
        return cls(dict(d["per_language"]), d["default"])


def _argmax(scores: Mapping[str, float], tie_break: Sequence[str]) -> str:
    position = {t: i for i, t in enumerate(tie_break)}
    best = max(scores.values())
    tied = [t for t, s in scores.items() if best - s <= TIE_TOLERANCE]
    return min(tied, key=lambda t: (len(constituents(t)), position.get(t, len(position)), t))


def select_best(table: DevScoreTable, tie_break: Sequence[str] = ()) -> SelectionPlan:
    if not table.rows or not table.languages:
        raise EmptyTableError("dev score table is empty")
    unknown = [t for t in tie_break if t not in table.rows]
    if unknown:
        raise ValidationError(f"tie_break names unknown candidates {unknown}")
    per_language = {
        lang: _argmax({tag: row[lang] for tag, row in table.rows.items()}, tie_break)
        for lang in table.languages
    }
    default = _argmax({tag: table.macro(tag) for tag in table.rows}, tie_break)
    return SelectionPlan(per_language, default)


def apply_plan(plan: SelectionPlan, language: str) -> str:
    return plan.per_language.get(language, plan.default_tag)


def read_score_table(path: str | Path) -> DevScoreTable:
    """CSV with header ``candidate,<lang1>,<lang2>,...`` and one row per candidate.

    An ``avg`` column, if present, is ignored (it is recomputed).
    """
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if not header or header[0].strip() != "candidate" or len(header) < 2:
            raise EmptyTableError(f"{path}: expected header 'candidate,<lang>,...'")
        langs = [h.strip() for h in header[1:]]
        rows: dict[str, dict[str, float]] = {}
        for line_no, rec in enumerate(reader, start=2):
            if not rec or not any(c.strip() for c in rec):
                continue
            if len(rec) != len(header):
                raise ValidationError(f"{path}:{line_no}: expected {len(header)} columns")
            tag = rec[0].strip()
            if tag in rows:
                raise ValidationError(f"{path}:{line_no}: duplicate candidate {tag!r}")
            try:
                rows[tag] = {l: float(v) for l, v in zip(langs, rec[1:]) if l != "avg"}
            except ValueError:
                raise ValidationError(f"{path}:{line_no}: non-numeric score") from None
    if not rows:
        raise EmptyTableError(f"{path}: no candidate rows")
    return DevScoreTable(rows)


def write_plan(plan: SelectionPlan, path: str | Path) -> None:
    Path(path).write_text(json.dumps(plan.to_dict(), indent=2, sort_keys=True) + "\n", encoding="utf-8")


def read_plan(path: str | Path) -> SelectionPlan:
    return SelectionPlan.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))
