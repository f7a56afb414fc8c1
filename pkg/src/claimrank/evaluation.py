"""Success-at-K metrics, rank histograms and missed-pair reports.

``success_at_k`` is post-level: a post counts once if any of its gold
fact-checks is in the top k.  ``strict_success_at_k`` requires all of them.
``missed_pairs`` counts individual gold pairs instead of posts.  Posts with
no gold pairs are never part of a denominator.
"""

from __future__ import annotations

import csv
import json
import math
from collections.abc import Iterable, Mapping
from dataclasses import dataclass
from pathlib import Path

from claimrank.corpus import PairSet, Post
from claimrank.errors import EmptyInputError, NoGoldPostsError
from claimrank.retrieval import RankedRun

HISTOGRAM_DEPTH = 10
OVERFLOW_BIN = "11+"
HISTOGRAM_BINS: tuple[str, ...] = tuple(str(i) for i in range(1, HISTOGRAM_DEPTH + 1)) + (OVERFLOW_BIN,)
CROSSLINGUAL_GROUP = "all"


@dataclass
class RankHistogram:
    counts: dict[str, int]
    total_pairs: int

    def fraction(self, bin_: str) -> float:
        return self.counts[bin_] / self.total_pairs if self.total_pairs else 0.0


@dataclass
class MissedReport:
    missed_pairs: int
    hit_pairs: int
    total_pairs: int

    @property
    def missed_rate(self) -> float:
        return self.missed_pairs / self.total_pairs if self.total_pairs else 0.0

    @property
    def hit_rate(self) -> float:
        return self.hit_pairs / self.total_pairs if self.total_pairs else 0.0


@dataclass
class LanguageResult:
    posts: int
    pairs: int
    success_at_k: float
    strict_success_at_k: float


@dataclass
class EvalReport:
    run_tag: str
    k: int
    per_language: dict[str, LanguageResult]
    macro_success_at_k: float
    histogram: RankHistogram
    missed: MissedReport

    def to_dict(self) -> dict:
        return {
            "run_tag": self.run_tag,
            "k": self.k,
            "per_language": {
                lang: {
                    "posts": r.posts,
                    "pairs": r.pairs,
                    "s_at_k": r.success_at_k,
                    "strict_s_at_k": r.strict_success_at_k,
                }
                for lang, r in self.per_language.items()
            },
            "macro_s_at_k": self.macro_success_at_k,
            "histogram": dict(self.histogram.counts),
            "missed": {
                "missed": self.missed.missed_pairs,
                "hit": self.missed.hit_pairs,
                "total": self.missed.total_pairs,
            },
        }

    @classmethod
    def from_dict(cls, d: Mapping) -> EvalReport:
        hist = {b: int(d["histogram"].get(b, 0)) for b in HISTOGRAM_BINS}
        m = d["missed"]
        return cls(
            run_tag=d["run_tag"],
            k=int(d["k"]),
            per_language={
                lang: LanguageResult(int(v["posts"]), int(v["pairs"]), float(v["s_at_k"]), float(v["strict_s_at_k"]))
                for lang, v in d["per_language"].items()
            },
            macro_success_at_k=float(d["macro_s_at_k"]),
            histogram=RankHistogram(hist, sum(hist.values())),
            missed=MissedReport(int(m["missed"]), int(m["hit"]), int(m["total"])),
        )


def _gold_posts(gold: PairSet, post_ids: Iterable[str] | None) -> dict[str, set[str]]:
    by_post = gold.by_post()
    if post_ids is not None:
        wanted = set(post_ids)
        by_post = {p: g for p, g in by_post.items() if p in wanted}
    if not by_post:
        raise NoGoldPostsError("no posts with gold pairs to evaluate")
    return by_post


def success_at_k(run: RankedRun, gold: PairSet, k: int, post_ids: Iterable[str] | None = None) -> float:
    """Fraction of gold-annotated posts with at least one gold id in the top ``k``.

    Posts missing from the run count as misses.  ``post_ids`` restricts the
    evaluation to a subset (e.g. one language).
    """
    by_post = _gold_posts(gold, post_ids)
    hits = sum(1 for p, golds in by_post.items() if golds.intersection(run.ids(p, k)))
    return hits / len(by_post)


def strict_success_at_k(run: RankedRun, gold: PairSet, k: int, post_ids: Iterable[str] | None = None) -> float:
    """Fraction of gold-annotated posts whose entire gold set lies in the top ``k``."""
    by_post = _gold_posts(gold, post_ids)
    hits = sum(1 for p, golds in by_post.items() if golds.issubset(run.ids(p, k)))
    return hits / len(by_post)


def macro_average(per_language_scores: Mapping[str, float]) -> float:
    """Unweighted mean over languages."""
    if not per_language_scores:
        raise EmptyInputError("macro_average of an empty mapping")
    return math.fsum(per_language_scores.values()) / len(per_language_scores)


def relative_difference(s_at_k: float, s_at_k2: float) -> float:
    """Percent change from ``s_at_k`` to ``s_at_k2``, e.g. S@10 -> S@5."""
    if s_at_k == 0:
        raise ZeroDivisionError("reference score is zero")
    return (s_at_k2 - s_at_k) / s_at_k * 100.0


def rank_histogram(run: RankedRun, gold: PairSet) -> RankHistogram:
    counts = dict.fromkeys(HISTOGRAM_BINS, 0)
    positions: dict[str, dict[str, int]] = {}
    for post_id, fc_id in gold:
        if post_id not in positions:
            positions[post_id] = {e.factcheck_id: e.rank for e in run.lists.get(post_id, [])}
        rank = positions[post_id].get(fc_id)
        counts[str(rank) if rank is not None and rank <= HISTOGRAM_DEPTH else OVERFLOW_BIN] += 1
    return RankHistogram(counts, len(gold))


def missed_pairs(run: RankedRun, gold: PairSet, k: int = 10) -> MissedReport:
    """Pair-level hit/miss counts for a top-``k`` cut."""
    tops: dict[str, set[str]] = {}
    hit = 0
    for post_id, fc_id in gold:
        if post_id not in tops:
            tops[post_id] = set(run.ids(post_id, k))
        hit += fc_id in tops[post_id]
    return MissedReport(len(gold) - hit, hit, len(gold))


def missed_report_from_counts(missed: int, total: int) -> MissedReport:
    return MissedReport(missed, total - missed, total)


def evaluate(run: RankedRun, gold: PairSet, posts: Iterable[Post], k: int = 10) -> EvalReport:
    """Per-language and macro S@k, strict S@k, rank histogram and missed pairs.

    Cross-lingual runs are reported as a single group named ``"all"``.
    """
    lang_of = {p.id: p.language for p in posts}
    by_post = gold.by_post()
    groups: dict[str, list[str]] = {}
    for post_id in by_post:
        group = CROSSLINGUAL_GROUP if run.scenario == "crosslingual" else lang_of[post_id]
        groups.setdefault(group, []).append(post_id)
    if not groups:
        raise NoGoldPostsError("no posts with gold pairs to evaluate")

    per_language: dict[str, LanguageResult] = {}
    for group in sorted(groups):
        members = groups[group]
        per_language[group] = LanguageResult(
            posts=len(members),
            pairs=sum(len(by_post[p]) for p in members),
            success_at_k=success_at_k(run, gold, k, members),
            strict_success_at_k=strict_success_at_k(run, gold, k, members),
        )
    return EvalReport(
        run_tag=run.run_tag,
        k=k,
        per_language=per_language,
        macro_success_at_k=macro_average({g: r.success_at_k for g, r in per_language.items()}),
        histogram=rank_histogram(run, gold),
        missed=missed_pairs(run, gold, k),
    )


def write_report(report: EvalReport, path: str | Path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(report.to_dict(), indent=2, sort_keys=False) + "\n", encoding="utf-8")


def read_report(path: str | Path) -> EvalReport:
    return EvalReport.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


def write_language_table(reports: Iterable[EvalReport], path: str | Path) -> None:
    """One CSV row per (run, language) for plotting per-language comparisons."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["run_tag", "k", "language", "posts", "pairs", "s_at_k", "strict_s_at_k"])
        for rep in reports:
            for lang, r in rep.per_language.items():
                w.writerow([rep.run_tag, rep.k, lang, r.posts, r.pairs, f"{r.success_at_k:.6f}", f"{r.strict_success_at_k:.6f}"])


def compare_depths(at_k: EvalReport, at_k2: EvalReport) -> dict[str, dict[str, float]]:
    """Per-language S@k, S@k2 and their percent difference (plus ``"avg"``)."""
    out = {}
    for lang, r in at_k.per_language.items():
        other = at_k2.per_language[lang].success_at_k
        out[lang] = {
            f"s_at_{at_k.k}": r.success_at_k,
            f"s_at_{at_k2.k}": other,
            "dif_percent": relative_difference(r.success_at_k, other) if r.success_at_k else math.nan,
        }
    a, b = at_k.macro_success_at_k, at_k2.macro_success_at_k
    dif = relative_difference(a, b) if a else math.nan
    out["avg"] = {f"s_at_{at_k.k}": a, f"s_at_{at_k2.k}": b, "dif_percent": dif}
    return out
