"""Command-line pipeline: ingest, embed, retrieve, fuse, evaluate, select, predict.

Exit codes: 0 success, 1 validation or input error, 2 provider or network error.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import logging
import sys
from pathlib import Path

from claimrank.config import SCENARIO_ALIASES, PipelineConfig, load_config
from claimrank.corpus import AssemblyConfig, assemble_factcheck_text, corpus_stats, load_corpus, query_text
from claimrank.embedding import EmbeddingMatrix, load_matrix, save_matrix
from claimrank.errors import ClaimRankError, FormatError, MissingRunError, ProviderError, ValidationError
from claimrank.evaluation import compare_depths, evaluate, write_report
from claimrank.fusion import fuse_run
from claimrank.providers import Transport, embed_corpus, make_transport
from claimrank.retrieval import RetrievalConfig, queries_from_matrix, read_run, retrieve_run, write_run
from claimrank.selection import apply_plan, read_plan, read_score_table, select_best, write_plan

log = logging.getLogger("claimrank")

EXIT_OK, EXIT_INPUT, EXIT_PROVIDER = 0, 1, 2
SUBMISSION_DEPTH = 10

# Tests and demos may inject transports by provider id (keeps mocks off the network).
TRANSPORT_OVERRIDES: dict[str, Transport] = {}


def _scenario(args: argparse.Namespace, cfg: PipelineConfig) -> str:
    return SCENARIO_ALIASES[args.scenario] if args.scenario else cfg.retrieval.scenario


def _k(args: argparse.Namespace, cfg: PipelineConfig) -> int:
    return args.k if args.k is not None else cfg.retrieval.k


def _load(cfg: PipelineConfig, with_pairs: bool = True):
    for p in (cfg.posts_path, cfg.factchecks_path) + ((cfg.pairs_path,) if with_pairs and cfg.pairs_path else ()):
        if not p.is_file():
            raise ValidationError(f"corpus file {p} does not exist")
    return load_corpus(cfg.posts_path, cfg.factchecks_path, cfg.pairs_path if with_pairs else None)


def _require_provider(args: argparse.Namespace) -> str:
    if not args.provider:
        raise ValidationError("--provider is required for this command")
    return args.provider


# --- commands --------------------------------------------------------------


def cmd_ingest(args: argparse.Namespace, cfg: PipelineConfig) -> int:
    posts, fcs, pairs = _load(cfg)
    stats = corpus_stats(posts, pairs)
    print(f"{'language':<10}{'posts':>8}{'pairs':>8}")
    for lang, s in stats.items():
        print(f"{lang:<10}{s.post_count:>8}{s.pair_count:>8}")
    print(f"{'total':<10}{len(posts):>8}{len(pairs) if pairs else 0:>8}")
    print(f"fact-checks: {len(fcs)}")
    if args.out:
        payload = {lang: {"posts": s.post_count, "pairs": s.pair_count} for lang, s in stats.items()}
        Path(args.out).write_text(json.dumps(payload, indent=2) + "\n", encoding="utf-8")
    return EXIT_OK


def _fingerprint(provider_id: str, model_name: str, items: list[tuple[str, str]]) -> str:
    h = hashlib.sha256(f"{provider_id}\0{model_name}\0".encode())
    for id_, text in items:
        h.update(id_.encode("utf-8") + b"\0" + text.encode("utf-8") + b"\0")
    return h.hexdigest()


def cmd_embed(args: argparse.Namespace, cfg: PipelineConfig) -> int:
    provider_id = _require_provider(args)
    pcfg = cfg.provider(provider_id)
    posts, fcs, _ = _load(cfg, with_pairs=False)
    acfg = AssemblyConfig(text_mode=pcfg.text_mode, query_prompt=pcfg.query_prompt, max_chars=pcfg.max_chars)
    targets = ["posts", "factchecks"] if args.target == "both" else [args.target]
    for target in targets:
        if target == "posts":
            items = [(p.id, query_text(p, acfg)) for p in posts]
        else:
            items = [(f.id, assemble_factcheck_text(f, acfg)) for f in fcs]
        path = Path(args.out) if args.out and len(targets) == 1 else cfg.embedding_path(provider_id, target)
        meta_path = path.with_name(path.name + ".meta.json")
        fingerprint = _fingerprint(provider_id, pcfg.model_name, items)
        if path.is_file() and meta_path.is_file():
            try:
                cached = load_matrix(path)
                meta = json.loads(meta_path.read_text(encoding="utf-8"))
            except (FormatError, ValueError):
                cached, meta = None, {}
            if cached is not None and meta.get("fingerprint") == fingerprint and list(cached.ids) == [i for i, _ in items]:
                print(f"{target}: cache hit {path} ({cached.n} x {cached.dim})")
                continue
        transport = TRANSPORT_OVERRIDES.get(provider_id) or make_transport(pcfg)
        matrix = embed_corpus(pcfg, items, transport, model_id=provider_id)
        save_matrix(matrix, path)
        meta_path.write_text(json.dumps({"fingerprint": fingerprint, "rows": matrix.n}) + "\n", encoding="utf-8")
        zero = int(matrix.zero_rows.sum())
        print(f"{target}: wrote {path} ({matrix.n} x {matrix.dim}, {zero} zero rows)")
    return EXIT_OK


def _load_embedding(cfg: PipelineConfig, provider_id: str, target: str) -> EmbeddingMatrix:
    path = cfg.embedding_path(provider_id, target)
    if not path.is_file():
        raise ValidationError(f"embedding file {path} missing; run 'claimrank embed --provider {provider_id}' first")
    return load_matrix(path)


def cmd_retrieve(args: argparse.Namespace, cfg: PipelineConfig) -> int:
    provider_id = _require_provider(args)
    scenario = _scenario(args, cfg)
    posts, fcs, _ = _load(cfg, with_pairs=False)
    post_m = _load_embedding(cfg, provider_id, "posts")
    fc_m = _load_embedding(cfg, provider_id, "factchecks")
    rcfg = RetrievalConfig(k=_k(args, cfg), scenario=scenario)  # type: ignore[arg-type]
    run = retrieve_run(queries_from_matrix(post_m), posts, fc_m, fcs, rcfg, run_tag=provider_id)
    out = Path(args.out) if args.out else cfg.run_path(provider_id, scenario)
    write_run(run, out)
    for w in run.warnings:
        print(f"warning: {w}", file=sys.stderr)
    print(f"wrote {out} ({len(run.lists)} posts, k={rcfg.k}, {scenario})")
    return EXIT_OK


def cmd_fuse(args: argparse.Namespace, cfg: PipelineConfig) -> int:
    if not args.spec:
        raise ValidationError("--spec is required")
    spec = cfg.fusions.get(args.spec)
    if spec is None:
        raise ValidationError(f"unknown fusion spec {args.spec!r}; configured: {sorted(cfg.fusions)}")
    scenario = _scenario(args, cfg)
    runs = {}
    for tag in spec.model_order:
        path = cfg.run_path(tag, scenario)
        if not path.is_file():
            raise MissingRunError(f"run file {path} for {tag!r} is missing")
        runs[tag] = read_run(path, scenario)  # type: ignore[arg-type]
    fused = fuse_run(spec, runs)
    out = Path(args.out) if args.out else cfg.run_path(spec.tag, scenario)
    write_run(fused, out)
    print(f"wrote {out} ({len(fused.lists)} posts, models {' > '.join(spec.model_order)})")
    return EXIT_OK


def _print_report(rep) -> None:
    print(f"run {rep.run_tag}  k={rep.k}")
    print(f"{'language':<10}{'posts':>7}{'pairs':>7}{'S@k':>9}{'strict':>9}")
    for lang, r in rep.per_language.items():
        print(f"{lang:<10}{r.posts:>7}{r.pairs:>7}{r.success_at_k:>9.3f}{r.strict_success_at_k:>9.3f}")
    print(f"{'macro':<24}{rep.macro_success_at_k:>9.3f}")
    m = rep.missed
    print(f"pairs missed {m.missed_pairs} ({100 * m.missed_rate:.1f}%), in top {rep.k} {m.hit_pairs} ({100 * m.hit_rate:.1f}%)")


def cmd_evaluate(args: argparse.Namespace, cfg: PipelineConfig) -> int:
    if not args.run:
        raise ValidationError("--run is required")
    posts, _, pairs = _load(cfg)
    if pairs is None:
        raise ValidationError("[corpus] pairs is required for evaluation")
    run_path = Path(args.run)
    if not run_path.is_file():
        raise ValidationError(f"run file {run_path} does not exist")
    scenario = _scenario(args, cfg)
    run = read_run(run_path, scenario)  # type: ignore[arg-type]
    k = _k(args, cfg)
    report = evaluate(run, pairs, posts, k)
    out = Path(args.out) if args.out else cfg.report_path(run.run_tag, scenario, k)
    write_report(report, out)
    _print_report(report)
    if args.compare_k:
        other = evaluate(run, pairs, posts, args.compare_k)
        table = compare_depths(report, other)
        cmp_path = out.with_name(out.stem + f".vs_k{args.compare_k}.json")
        cmp_path.write_text(json.dumps(table, indent=2) + "\n", encoding="utf-8")
        avg = table["avg"]
        print(f"S@{k} -> S@{args.compare_k}: {avg['dif_percent']:+.2f}% (macro)")
    print(f"wrote {out}")
    return EXIT_OK


def cmd_select(args: argparse.Namespace, cfg: PipelineConfig) -> int:
    if not args.scores:
        raise ValidationError("--scores is required")
    table = read_score_table(args.scores)
    plan = select_best(table, cfg.tie_break)
    out = Path(args.out) if args.out else cfg.output_dir / "plan.json"
    out.parent.mkdir(parents=True, exist_ok=True)
    write_plan(plan, out)
    for lang, tag in plan.per_language.items():
        print(f"{lang:<8}{tag}")
    print(f"{'default':<8}{plan.default_tag}")
    print(f"wrote {out}")
    return EXIT_OK


def cmd_predict(args: argparse.Namespace, cfg: PipelineConfig) -> int:
    scenario = _scenario(args, cfg)
    posts, _, _ = _load(cfg, with_pairs=False)
    plan = None
    if not args.provider:
        plan_path = Path(args.plan) if args.plan else cfg.output_dir / "plan.json"
        if not plan_path.is_file():
            raise ValidationError(f"plan file {plan_path} does not exist")
        plan = read_plan(plan_path)
    runs_dir = Path(args.runs) if args.runs else None
    depth = min(_k(args, cfg), SUBMISSION_DEPTH)
    cache = {}
    submission: dict[str, list[str]] = {}
    for post in sorted(posts, key=lambda p: p.id):
        tag = args.provider or apply_plan(plan, post.language)
        if tag not in cache:
            path = cfg.run_path(tag, scenario, runs_dir)
            if not path.is_file():
                raise MissingRunError(f"plan needs run {tag!r} but {path} is missing")
            cache[tag] = read_run(path, scenario)  # type: ignore[arg-type]
        submission[post.id] = cache[tag].ids(post.id, depth)
    out = Path(args.out) if args.out else cfg.output_dir / f"submission.{scenario}.json"
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(json.dumps(submission, indent=1, ensure_ascii=False) + "\n", encoding="utf-8")
    print(f"wrote {out} ({len(submission)} posts, runs used: {', '.join(sorted(cache))})")
    return EXIT_OK


COMMANDS = {
    "ingest": cmd_ingest,
    "embed": cmd_embed,
    "retrieve": cmd_retrieve,
    "fuse": cmd_fuse,
    "evaluate": cmd_evaluate,
    "select": cmd_select,
    "predict": cmd_predict,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", required=True, help="pipeline config file")
    common.add_argument("--k", type=int, help="list depth / metric cut-off")
    common.add_argument("--scenario", choices=sorted(SCENARIO_ALIASES), help="mono or cross")
    common.add_argument("--provider", help="provider id or run tag")
    common.add_argument("--out", help="output path")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="claimrank", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("ingest", parents=[common], help="validate corpus, print per-language counts")
    p = sub.add_parser("embed", parents=[common], help="embed posts and/or fact-checks")
    p.add_argument("--target", choices=["posts", "factchecks", "both"], default="both")
    sub.add_parser("retrieve", parents=[common], help="rank fact-checks for every post")
    p = sub.add_parser("fuse", parents=[common], help="fuse runs per a [fusion] spec")
    p.add_argument("--spec", help="fusion section name")
    p = sub.add_parser("evaluate", parents=[common], help="S@k report for a run file")
    p.add_argument("--run", help="run file")
    p.add_argument("--compare-k", type=int, help="also compute S@K2 and the percent difference")
    p = sub.add_parser("select", parents=[common], help="choose best candidate per language")
    p.add_argument("--scores", help="dev score CSV")
    p = sub.add_parser("predict", parents=[common], help="write the submission JSON")
    p.add_argument("--plan", help="plan JSON (default <out>/plan.json)")
    p.add_argument("--runs", help="directory with run files (default <out>/runs)")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = load_config(args.config)
        return COMMANDS[args.command](args, cfg)
    except ProviderError as exc:
        print(f"provider error: {exc}", file=sys.stderr)
        return EXIT_PROVIDER
    except (ClaimRankError, FileNotFoundError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
