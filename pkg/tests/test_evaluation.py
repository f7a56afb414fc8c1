import json

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from claimrank.corpus import PairSet, Post
from claimrank.errors import EmptyInputError, NoGoldPostsError
from claimrank.evaluation import (
    HISTOGRAM_BINS,
    compare_depths,
    evaluate,
    macro_average,
    missed_pairs,
    missed_report_from_counts,
    rank_histogram,
    read_report,
    relative_difference,
    strict_success_at_k,
    success_at_k,
    write_language_table,
    write_report,
)
from claimrank.retrieval import RankedEntry, RankedRun

from test_corpus import DEV_COUNTS, dev_like_corpus


def run_from(lists, scenario="monolingual", tag="m"):
    return RankedRun(tag, scenario, {p: [RankedEntry(f, 1 / r, r) for r, f in enumerate(ids, 1)] for p, ids in lists.items()})


def filler(n, prefix="x"):
    return [f"{prefix}{i}" for i in range(n)]


def test_one_hit_one_miss():
    run = run_from({"p1": ["g1"] + filler(14), "p2": filler(10) + ["g2"] + filler(4, "y")})
    gold = PairSet((("p1", "g1"), ("p2", "g2")))
    assert success_at_k(run, gold, 10) == 0.5
    assert success_at_k(run, gold, 11) == 1.0


def test_perfect_and_missing_posts():
    gold = PairSet((("p1", "g1"), ("p2", "g2")))
    assert success_at_k(run_from({"p1": ["g1"], "p2": ["g2"]}), gold, 10) == 1.0
    assert success_at_k(run_from({"p1": ["g1"]}), gold, 10) == 0.5  # absent post = miss


def test_no_gold_posts():
    with pytest.raises(NoGoldPostsError):
        success_at_k(run_from({}), PairSet(), 10)


def test_strict_contrast():
    run = run_from({"p": ["x0", "x1", "g1"] + filler(8, "y") + ["g2"]})
    gold = PairSet((("p", "g1"), ("p", "g2")))
    assert success_at_k(run, gold, 10) == 1.0
    assert strict_success_at_k(run, gold, 10) == 0.0


def random_fixture(seed, n_posts=50, multi=True):
    rng = np.random.default_rng(seed)
    lists, pairs = {}, []
    for i in range(n_posts):
        pid = f"p{i}"
        ranked = [f"f{j}" for j in rng.permutation(40)[:int(rng.integers(0, 25))]]
        lists[pid] = ranked
        n_gold = int(rng.integers(1, 4)) if multi else 1
        for g in rng.choice(40, size=n_gold, replace=False):
            pairs.append((pid, f"f{g}"))
    return run_from(lists), PairSet(tuple(pairs)), lists


@pytest.mark.parametrize("seed", range(10))
def test_against_membership_oracles(seed):
    run, gold, lists = random_fixture(seed)
    golds = {}
    for p, f in gold:
        golds.setdefault(p, []).append(f)
    for k in (1, 5, 10, 20):
        any_hits = sum(1 for p, gs in golds.items() if any(g in lists[p][:k] for g in gs))
        all_hits = sum(1 for p, gs in golds.items() if all(g in lists[p][:k] for g in gs))
        assert success_at_k(run, gold, k) == any_hits / len(golds)
        assert strict_success_at_k(run, gold, k) == all_hits / len(golds)
    # histogram by index scan
    bins = dict.fromkeys(HISTOGRAM_BINS, 0)
    for p, f in gold:
        pos = lists[p].index(f) + 1 if f in lists[p] else None
        bins[str(pos) if pos and pos <= 10 else "11+"] += 1
    assert rank_histogram(run, gold).counts == bins


@pytest.mark.parametrize("seed", range(10))
def test_metric_relationships(seed):
    run, gold, _ = random_fixture(seed)
    for k in (1, 3, 10):
        assert strict_success_at_k(run, gold, k) <= success_at_k(run, gold, k)
        assert success_at_k(run, gold, k) <= success_at_k(run, gold, k + 1)
    hist = rank_histogram(run, gold)
    assert sum(hist.counts.values()) == hist.total_pairs == len(gold)
    rep = missed_pairs(run, gold, 10)
    assert sum(hist.counts[str(i)] for i in range(1, 11)) == rep.hit_pairs
    assert rep.missed_pairs + rep.hit_pairs == rep.total_pairs
    assert rep.missed_rate + rep.hit_rate == pytest.approx(1.0, abs=1e-9)


@pytest.mark.parametrize("seed", range(5))
def test_single_gold_metrics_coincide(seed):
    run, gold, _ = random_fixture(seed, multi=False)
    s = success_at_k(run, gold, 10)
    assert s == strict_success_at_k(run, gold, 10)
    assert abs(s - missed_pairs(run, gold, 10).hit_rate) <= 1e-9


def test_macro_average_table_rows():
    gpt = dict(zip("eng fra deu por spa tha msa ara".split(), [0.85, 0.92, 0.70, 0.83, 0.89, 0.98, 0.88, 0.82]))
    nv = dict(zip("eng fra deu por spa tha msa ara".split(), [0.87, 0.95, 0.89, 0.88, 0.92, 0.95, 0.90, 0.86]))
    assert macro_average(gpt) == pytest.approx(0.85875, abs=1e-12)
    assert round(macro_average(gpt), 2) == 0.86
    assert macro_average(nv) == pytest.approx(0.9025, abs=1e-12)
    assert round(macro_average(nv), 2) == 0.90
    assert macro_average({"x": 0.42}) == 0.42
    with pytest.raises(EmptyInputError):
        macro_average({})


@given(st.dictionaries(st.text(min_size=1, max_size=3), st.floats(0, 1), min_size=1))
def test_macro_bounds_and_permutation(scores):
    m = macro_average(scores)
    assert min(scores.values()) - 1e-12 <= m <= max(scores.values()) + 1e-12
    assert macro_average(dict(reversed(list(scores.items())))) == m


@pytest.mark.parametrize("s10,s5,dif", [(0.775, 0.672, -13.29), (0.726, 0.627, -13.64), (0.719, 0.612, -14.88)])
def test_relative_difference_table(s10, s5, dif):
    assert relative_difference(s10, s5) == pytest.approx(dif, abs=0.01)


def test_relative_difference_edges():
    assert relative_difference(0.3, 0.3) == 0.0
    with pytest.raises(ZeroDivisionError):
        relative_difference(0.0, 0.5)


def test_missed_counts():
    nv = missed_report_from_counts(160, 651)
    assert nv.hit_pairs == 491
    assert 100 * nv.missed_rate == pytest.approx(24.6, abs=0.05)
    assert 100 * nv.hit_rate == pytest.approx(75.4, abs=0.05)


def test_missed_perfect():
    run = run_from({"p": ["g"]})
    rep = missed_pairs(run, PairSet((("p", "g"),)))
    assert (rep.missed_pairs, rep.hit_rate) == (0, 1.0)


def test_histogram_absent_and_planted():
    gold = PairSet((("p", "g"), ("q", "h")))
    hist = rank_histogram(run_from({"p": ["g"], "q": ["h"]}), gold)
    assert hist.counts["1"] == 2 and sum(hist.counts.values()) == 2
    hist = rank_histogram(run_from({"p": ["x"]}), gold)
    assert hist.counts["11+"] == 2


def test_evaluate_two_languages():
    posts = [Post("a", "fra", text_english="t"), Post("b", "spa", text_english="t"), Post("c", "spa", text_english="t")]
    gold = PairSet((("a", "g"), ("b", "h"), ("c", "i"), ("c", "j")))
    run = run_from({"a": ["g"], "b": ["x"], "c": ["i"]})
    rep = evaluate(run, gold, posts, 10)
    assert list(rep.per_language) == ["fra", "spa"]
    assert rep.per_language["spa"].success_at_k == 0.5
    assert rep.per_language["spa"].strict_success_at_k == 0.0
    assert rep.per_language["spa"].pairs == 3
    assert rep.macro_success_at_k == pytest.approx((1.0 + 0.5) / 2, abs=1e-9)


def test_evaluate_crosslingual_single_group():
    posts = [Post("a", "fra", text_english="t"), Post("b", "spa", text_english="t")]
    gold = PairSet((("a", "g"), ("b", "h")))
    rep = evaluate(run_from({"a": ["g"], "b": ["x"]}, "crosslingual"), gold, posts, 10)
    assert list(rep.per_language) == ["all"]
    assert rep.macro_success_at_k == rep.per_language["all"].success_at_k == 0.5


def test_evaluate_echoes_dev_counts():
    posts, gold = dev_like_corpus()
    run = run_from({p: [f] for p, f in gold})
    rep = evaluate(run, gold, posts, 10)
    for lang, (n_posts, n_pairs) in DEV_COUNTS.items():
        assert (rep.per_language[lang].posts, rep.per_language[lang].pairs) == (n_posts, n_pairs)


def test_report_json_schema(tmp_path):
    posts = [Post("a", "fra", text_english="t")]
    gold = PairSet((("a", "g"),))
    rep = evaluate(run_from({"a": ["x", "g"]}), gold, posts, 10)
    write_report(rep, tmp_path / "r.json")
    raw = json.loads((tmp_path / "r.json").read_text())
    assert set(raw) == {"run_tag", "k", "per_language", "macro_s_at_k", "histogram", "missed"}
    assert raw["per_language"]["fra"] == {"posts": 1, "pairs": 1, "s_at_k": 1.0, "strict_s_at_k": 1.0}
    assert list(raw["histogram"]) == list(HISTOGRAM_BINS) and raw["histogram"]["2"] == 1
    assert raw["missed"] == {"missed": 0, "hit": 1, "total": 1}
    assert read_report(tmp_path / "r.json").to_dict() == raw


def test_compare_depths_and_csv(tmp_path):
    posts = [Post("a", "fra", text_english="t"), Post("b", "fra", text_english="t")]
    gold = PairSet((("a", "g"), ("b", "h")))
    run = run_from({"a": ["g"], "b": filler(7) + ["h"]})
    at10, at5 = evaluate(run, gold, posts, 10), evaluate(run, gold, posts, 5)
    table = compare_depths(at10, at5)
    assert table["fra"]["dif_percent"] == pytest.approx(-50.0)
    assert table["avg"]["s_at_10"] == 1.0 and table["avg"]["s_at_5"] == 0.5
    write_language_table([at10, at5], tmp_path / "t.csv")
    lines = (tmp_path / "t.csv").read_text().splitlines()
    assert lines[0].startswith("run_tag,k,language") and len(lines) == 3
