"""Posts, fact-checks and gold pairs, plus the rules that turn them into embedding inputs.

Input files are JSONL (UTF-8, one object per line):

- posts.jsonl: ``{"id", "language", "text_original", "text_english",
  "ocr": [{"text_original", "text_english", "detected_language"}],
  "verdict", "timestamps"}``
- factchecks.jsonl: ``{"id", "language", "claim_original", "claim_english",
  "title_original", "title_english"}``
- pairs.jsonl: ``{"post_id", "factcheck_id"}``

Missing optional fields default to empty.
"""

from __future__ import annotations

import json
from collections import Counter
from collections.abc import Iterable, Iterator
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Literal

from claimrank.errors import (
    AssemblyEmptyError,
    DanglingReferenceError,
    DuplicateIdError,
    ParseError,
    ValidationError,
)

TextMode = Literal["english", "original"]

DEFAULT_QUERY_PROMPT = "Given a post, retrieve claims that verify the post"
DEFAULT_MAX_CHARS = 8000


@dataclass(frozen=True)
class OcrBlock:
    text_original: str = ""
    text_english: str = ""
    detected_language: str | None = None


@dataclass(frozen=True)
class Post:
    id: str
    language: str
    text_original: str = ""
    text_english: str = ""
    ocr_blocks: tuple[OcrBlock, ...] = ()
    verdict: str | None = None
    timestamps: tuple[int, ...] = ()

    def validate(self) -> None:
        if not self.id:
            raise ValidationError("post id must be non-empty")
        if not (self.text_original or self.text_english or self.ocr_blocks):
            raise ValidationError(f"post {self.id!r} has no text and no OCR")


@dataclass(frozen=True)
class FactCheck:
    id: str
    language: str
    claim_original: str = ""
    claim_english: str = ""
    title_original: str = ""
    title_english: str = ""

    def validate(self) -> None:
        if not self.id:
            raise ValidationError("fact-check id must be non-empty")
        if not (self.claim_original or self.claim_english):
            raise ValidationError(f"fact-check {self.id!r} has no claim text")


@dataclass(frozen=True)
class PairSet:
    """Gold (post_id, factcheck_id) links. Ordering follows insertion."""

    pairs: tuple[tuple[str, str], ...] = ()

    def __post_init__(self) -> None:
        if len(set(self.pairs)) != len(self.pairs):
            dup = next(p for p, c in Counter(self.pairs).items() if c > 1)
            raise DuplicateIdError(f"duplicate pair {dup}")

    def __len__(self) -> int:
        return len(self.pairs)

    def __iter__(self) -> Iterator[tuple[str, str]]:
        return iter(self.pairs)

    def by_post(self) -> dict[str, set[str]]:
        out: dict[str, set[str]] = {}
        for post_id, fc_id in self.pairs:
            out.setdefault(post_id, set()).add(fc_id)
        return out


@dataclass(frozen=True)
class AssemblyConfig:
    text_mode: TextMode = "english"
    query_prompt: str | None = None
    separator: str = "\n"
    max_chars: int = DEFAULT_MAX_CHARS

    def __post_init__(self) -> None:
        if self.max_chars < 1:
            raise ValidationError("max_chars must be >= 1")
        if not self.separator:
            raise ValidationError("separator must be non-empty")
        if self.text_mode not in ("english", "original"):
            raise ValidationError(f"unknown text_mode {self.text_mode!r}")


def truncate_text(text: str, max_chars: int) -> str:
    """Keep at most ``max_chars`` characters (code points, so never mid-character)."""
    if max_chars < 1:
        raise ValidationError("max_chars must be >= 1")
    return text if len(text) <= max_chars else text[:max_chars]


def _pick(original: str, english: str, mode: TextMode) -> str:
    return english if mode == "english" else original


def _join(parts: Iterable[str], separator: str) -> str:
    return separator.join(p for p in parts if p)


def assemble_post_text(post: Post, cfg: AssemblyConfig) -> str:
    """Post text followed by every OCR block's text, in the configured language mode.

    All OCR blocks are kept regardless of their detected language.
    """
    parts = [_pick(post.text_original, post.text_english, cfg.text_mode)]
    parts += [_pick(b.text_original, b.text_english, cfg.text_mode) for b in post.ocr_blocks]
    text = _join(parts, cfg.separator)
    if not text:
        raise AssemblyEmptyError(f"post {post.id!r} has no {cfg.text_mode} text")
    return truncate_text(text, cfg.max_chars)


def assemble_factcheck_text(fc: FactCheck, cfg: AssemblyConfig) -> str:
    parts = [
        _pick(fc.title_original, fc.title_english, cfg.text_mode),
        _pick(fc.claim_original, fc.claim_english, cfg.text_mode),
    ]
    text = _join(parts, cfg.separator)
    if not text:
        raise AssemblyEmptyError(f"fact-check {fc.id!r} has no {cfg.text_mode} text")
    return truncate_text(text, cfg.max_chars)


def apply_query_prompt(text: str, prompt: str, separator: str = "\n") -> str:
    """Prefix a query (post) text with an instruction prompt. Never used on documents."""
    if not prompt:
        raise ValidationError("prompt must be non-empty")
    return prompt + separator + text


def query_text(post: Post, cfg: AssemblyConfig) -> str:
    """Assembled post text with the configured prompt, if any.

    Truncation applies to the post body; the prompt is added afterwards so
    it can never be cut off.
    """
    text = assemble_post_text(post, cfg)
    if cfg.query_prompt:
        text = apply_query_prompt(text, cfg.query_prompt, cfg.separator)
    return text


# --- loading ---------------------------------------------------------------


def _iter_jsonl(path: Path) -> Iterator[tuple[int, dict[str, Any]]]:
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            if line_no == 1 and line.startswith("\ufeff"):
                raise ParseError(str(path), line_no, "byte-order mark not allowed")
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ParseError(str(path), line_no, f"invalid JSON: {exc.msg}") from None
            if not isinstance(obj, dict):
                raise ParseError(str(path), line_no, "expected a JSON object")
            yield line_no, obj


def _str(obj: dict[str, Any], key: str, path: Path, line_no: int, required: bool = False) -> str:
    value = obj.get(key)
    if value is None:
        if required:
            raise ParseError(str(path), line_no, f"missing field {key!r}")
        return ""
    if not isinstance(value, str):
        raise ParseError(str(path), line_no, f"field {key!r} must be a string")
    return value


def _parse_post(obj: dict[str, Any], path: Path, line_no: int) -> Post:
    s = lambda key, required=False: _str(obj, key, path, line_no, required)  # noqa: E731
    blocks = []
    for raw in obj.get("ocr") or []:
        if not isinstance(raw, dict):
            raise ParseError(str(path), line_no, "ocr entries must be objects")
        original = raw.get("text_original") or ""
        english = raw.get("text_english") or ""
        if not (original or english):
            continue
        blocks.append(OcrBlock(original, english, raw.get("detected_language")))
    timestamps = obj.get("timestamps") or []
    if not all(isinstance(t, int) for t in timestamps):
        raise ParseError(str(path), line_no, "timestamps must be integers")
    try:
        post = Post(
            id=s("id", True),
            language=s("language", True),
            text_original=s("text_original"),
            text_english=s("text_english"),
            ocr_blocks=tuple(blocks),
            verdict=obj.get("verdict") or None,
            timestamps=tuple(timestamps),
        )
        post.validate()
        return post
    except ValidationError as exc:
        raise ParseError(str(path), line_no, str(exc)) from None


def _parse_factcheck(obj: dict[str, Any], path: Path, line_no: int) -> FactCheck:
    s = lambda key, required=False: _str(obj, key, path, line_no, required)  # noqa: E731
    try:
        fc = FactCheck(
            id=s("id", True),
            language=s("language", True),
            claim_original=s("claim_original"),
            claim_english=s("claim_english"),
            title_original=s("title_original"),
            title_english=s("title_english"),
        )
        fc.validate()
        return fc
    except ValidationError as exc:
        raise ParseError(str(path), line_no, str(exc)) from None


def _check_unique(ids: Iterable[str], what: str) -> set[str]:
    seen: set[str] = set()
    for i in ids:
        if i in seen:
            raise DuplicateIdError(f"duplicate {what} id {i!r}")
        seen.add(i)
    return seen


def validate_pairs(pairs: PairSet, post_ids: set[str], factcheck_ids: set[str]) -> None:
    for post_id, fc_id in pairs:
        if post_id not in post_ids:
            raise DanglingReferenceError(f"pair ({post_id}, {fc_id}) cites unknown post {post_id!r}")
        if fc_id not in factcheck_ids:
            raise DanglingReferenceError(f"pair ({post_id}, {fc_id}) cites unknown fact-check {fc_id!r}")


def load_posts(path: str | Path) -> list[Post]:
    path = Path(path)
    posts = [_parse_post(obj, path, n) for n, obj in _iter_jsonl(path)]
    _check_unique((p.id for p in posts), "post")
    return posts


def load_factchecks(path: str | Path) -> list[FactCheck]:
    path = Path(path)
    fcs = [_parse_factcheck(obj, path, n) for n, obj in _iter_jsonl(path)]
    _check_unique((f.id for f in fcs), "fact-check")
    return fcs


def load_pairs(path: str | Path) -> PairSet:
    path = Path(path)
    pairs = []
    for n, obj in _iter_jsonl(path):
        pairs.append((_str(obj, "post_id", path, n, True), _str(obj, "factcheck_id", path, n, True)))
    return PairSet(tuple(pairs))


def load_corpus(
    posts_path: str | Path,
    factchecks_path: str | Path,
    pairs_path: str | Path | None = None,
) -> tuple[list[Post], list[FactCheck], PairSet | None]:
    posts = load_posts(posts_path)
    fcs = load_factchecks(factchecks_path)
    pairs = None
    if pairs_path is not None:
        pairs = load_pairs(pairs_path)
        validate_pairs(pairs, {p.id for p in posts}, {f.id for f in fcs})
    return posts, fcs, pairs


def _dump_jsonl(path: str | Path, rows: Iterable[dict[str, Any]]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for row in rows:
            fh.write(json.dumps(row, ensure_ascii=False) + "\n")


def save_corpus(
    posts: Iterable[Post],
    factchecks: Iterable[FactCheck],
    pairs: PairSet | None,
    directory: str | Path,
) -> dict[str, Path]:
    """Write ``posts.jsonl``, ``factchecks.jsonl`` and (optionally) ``pairs.jsonl``."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    paths = {"posts": directory / "posts.jsonl", "factchecks": directory / "factchecks.jsonl"}
    _dump_jsonl(
        paths["posts"],
        (
            {
                "id": p.id,
                "language": p.language,
                "text_original": p.text_original,
                "text_english": p.text_english,
                "ocr": [
                    {
                        "text_original": b.text_original,
                        "text_english": b.text_english,
                        "detected_language": b.detected_language,
                    }
                    for b in p.ocr_blocks
                ],
                "verdict": p.verdict,
                "timestamps": list(p.timestamps),
            }
            for p in posts
        ),
    )
    _dump_jsonl(
        paths["factchecks"],
        (
            {
                "id": f.id,
                "language": f.language,
                "claim_original": f.claim_original,
                "claim_english": f.claim_english,
                "title_original": f.title_original,
                "title_english": f.title_english,
            }
            for f in factchecks
        ),
    )
    if pairs is not None:
        paths["pairs"] = directory / "pairs.jsonl"
        _dump_jsonl(paths["pairs"], ({"post_id": p, "factcheck_id": f} for p, f in pairs))
    return paths


@dataclass
class LanguageStats:
    post_count: int = 0
    pair_count: int = 0


def corpus_stats(posts: Iterable[Post], pairs: PairSet | None) -> dict[str, LanguageStats]:
    """Post and gold-pair counts per post language, sorted by language code."""
    stats: dict[str, LanguageStats] = {}
    lang_of: dict[str, str] = {}
    for p in posts:
        stats.setdefault(p.language, LanguageStats()).post_count += 1
        lang_of[p.id] = p.language
    for post_id, _ in pairs or ():
        stats[lang_of[post_id]].pair_count += 1
    return dict(sorted(stats.items()))


@dataclass
class Corpus:
    """Convenience bundle of a loaded corpus with id lookups."""

    posts: list[Post]
    factchecks: list[FactCheck]
    pairs: PairSet | None = None
    _post_by_id: dict[str, Post] = field(init=False, repr=False)

    def __post_init__(self) -> None:
        self._post_by_id = {p.id: p for p in self.posts}

    def post(self, post_id: str) -> Post:
        return self._post_by_id[post_id]

    def language_of(self, post_id: str) -> str:
        return self._post_by_id[post_id].language
