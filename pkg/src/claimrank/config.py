"""Pipeline configuration: one INI-style file of flat ``[section]`` blocks with ``key = value`` lines.

Recognized sections::

    [corpus]            posts, factchecks, pairs (paths, relative to the config file)
    [output]            dir
    [retrieval]         k, scenario
    [selection]         tie_break (comma-separated candidate tags)
    [provider <id>]     kind, endpoint_url, model_name, api_key_env_var, batch_size,
                        max_parallel_requests, retry_limit, query_prompt, text_mode,
                        max_chars, dim, backoff_seconds, timeout_seconds
    [fusion <tag>]      models (comma-separated, best first), k, seed_depth

Any value can be overridden through ``CLAIMRANK_<SECTION>__<KEY>``, where the
section name is upper-cased with every non-alphanumeric character replaced
by ``_`` (``[provider nv-embed]`` -> ``CLAIMRANK_PROVIDER_NV_EMBED__BATCH_SIZE``).
"""

from __future__ import annotations

import configparser
import os
import re
from collections.abc import Mapping
from dataclasses import dataclass, field
from pathlib import Path

from claimrank.errors import ValidationError
from claimrank.fusion import FusionSpec
from claimrank.providers import ProviderConfig
from claimrank.retrieval import RetrievalConfig

ENV_PREFIX = "CLAIMRANK_"
_FIXED_SECTIONS = ("corpus", "output", "retrieval", "selection")
_INT_KEYS = {"batch_size", "max_parallel_requests", "retry_limit", "max_chars", "dim", "k", "seed_depth"}
_FLOAT_KEYS = {"backoff_seconds", "timeout_seconds"}
_PROVIDER_KEYS = {
    "kind", "endpoint_url", "model_name", "api_key_env_var", "batch_size", "max_parallel_requests",
    "retry_limit", "query_prompt", "text_mode", "max_chars", "dim", "backoff_seconds", "timeout_seconds",
}  # fmt: skip

SCENARIO_ALIASES = {"mono": "monolingual", "cross": "crosslingual", "monolingual": "monolingual", "crosslingual": "crosslingual"}


def env_key(section: str, key: str) -> str:
    return ENV_PREFIX + re.sub(r"[^0-9A-Za-z]", "_", section).upper() + "__" + key.upper()


def _split_list(value: str) -> tuple[str, ...]:
    return tuple(v.strip() for v in value.split(",") if v.strip())


@dataclass
class PipelineConfig:
    base_dir: Path
    posts_path: Path
    factchecks_path: Path
    pairs_path: Path | None
    output_dir: Path
    retrieval: RetrievalConfig
    providers: dict[str, ProviderConfig] = field(default_factory=dict)
    fusions: dict[str, FusionSpec] = field(default_factory=dict)
    tie_break: tuple[str, ...] = ()

    # --- output layout -----------------------------------------------------

    def embedding_path(self, provider_id: str, target: str) -> Path:
        return self.output_dir / "embeddings" / f"{provider_id}.{target}.crem"

    def run_path(self, tag: str, scenario: str, runs_dir: Path | None = None) -> Path:
        return (runs_dir or self.output_dir / "runs") / f"{tag}.{scenario}.run"

    def report_path(self, tag: str, scenario: str, k: int) -> Path:
        return self.output_dir / "reports" / f"{tag}.{scenario}.k{k}.json"

    def provider(self, provider_id: str) -> ProviderConfig:
        try:
            return self.providers[provider_id]
        except KeyError:
            raise ValidationError(
                f"unknown provider {provider_id!r}; configured: {sorted(self.providers)}"
            ) from None


def _apply_env(parser: configparser.ConfigParser, environ: Mapping[str, str]) -> None:
    by_env_name = {re.sub(r"[^0-9A-Za-z]", "_", s).upper(): s for s in parser.sections()}
    for s in _FIXED_SECTIONS:
        by_env_name.setdefault(s.upper(), s)
    for name, value in environ.items():
        if not name.startswith(ENV_PREFIX) or "__" not in name[len(ENV_PREFIX):]:
            continue
        sec_part, key = name[len(ENV_PREFIX):].rsplit("__", 1)
        section = by_env_name.get(sec_part)
        if section is None:
            continue
        if not parser.has_section(section):
            parser.add_section(section)
        parser.set(section, key.lower(), value)


def _typed(section: configparser.SectionProxy, allowed: set[str], where: str) -> dict:
    out: dict = {}
    for key, raw in section.items():
        if key not in allowed:
            raise ValidationError(f"unknown key {key!r} in [{where}]")
        try:
            if key in _INT_KEYS:
                out[key] = int(raw)
            elif key in _FLOAT_KEYS:
                out[key] = float(raw)
            else:
                out[key] = raw
        except ValueError:
            raise ValidationError(f"[{where}] {key} = {raw!r} is not a number") from None
    return out


def load_config(path: str | Path, environ: Mapping[str, str] | None = None) -> PipelineConfig:
    path = Path(path)
    if not path.is_file():
        raise ValidationError(f"config file {path} does not exist")
    parser = configparser.ConfigParser(interpolation=None, default_section="__defaults__")
    parser.optionxform = str.lower  # type: ignore[assignment]
    try:
        parser.read(path, encoding="utf-8")
    except configparser.Error as exc:
        raise ValidationError(f"{path}: {exc}") from None
    _apply_env(parser, os.environ if environ is None else environ)
    base = path.resolve().parent

    def resolve(p: str) -> Path:
        q = Path(p).expanduser()
        return q if q.is_absolute() else base / q

    if not parser.has_section("corpus"):
        raise ValidationError(f"{path}: missing [corpus] section")
    corpus = parser["corpus"]
    for key in ("posts", "factchecks"):
        if key not in corpus:
            raise ValidationError(f"{path}: [corpus] needs {key!r}")
    pairs = corpus.get("pairs", "").strip()

    retrieval = parser["retrieval"] if parser.has_section("retrieval") else {}
    scenario = SCENARIO_ALIASES.get(retrieval.get("scenario", "monolingual"))
    if scenario is None:
        raise ValidationError(f"unknown scenario {retrieval.get('scenario')!r}")
    try:
        k = int(retrieval.get("k", "10"))
    except ValueError:
        raise ValidationError("[retrieval] k must be an integer") from None

    providers: dict[str, ProviderConfig] = {}
    fusions: dict[str, FusionSpec] = {}
    for section in parser.sections():
        kind, _, name = section.partition(" ")
        name = name.strip()
        if kind == "provider":
            if not name:
                raise ValidationError("[provider] sections need an id: [provider <id>]")
            if name in providers:
                raise ValidationError(f"duplicate provider {name!r}")
            values = _typed(parser[section], _PROVIDER_KEYS, section)
            if values.get("query_prompt") == "":
                values["query_prompt"] = None
            providers[name] = ProviderConfig(provider_id=name, **values)
        elif kind == "fusion":
            if not name:
                raise ValidationError("[fusion] sections need a tag: [fusion <tag>]")
            values = _typed(parser[section], {"models", "k", "seed_depth"}, section)
            if "models" not in values:
                raise ValidationError(f"[{section}] needs 'models'")
            fusions[name] = FusionSpec(
                _split_list(values["models"]), k=values.get("k", k), seed_depth=values.get("seed_depth"), name=name
            )
        elif section not in _FIXED_SECTIONS:
            raise ValidationError(f"{path}: unknown section [{section}]")

    output = parser["output"].get("dir", "out") if parser.has_section("output") else "out"
    selection = parser["selection"] if parser.has_section("selection") else {}
    return PipelineConfig(
        base_dir=base,
        posts_path=resolve(corpus["posts"]),
        factchecks_path=resolve(corpus["factchecks"]),
        pairs_path=resolve(pairs) if pairs else None,
        output_dir=resolve(output),
        retrieval=RetrievalConfig(k=k, scenario=scenario),  # type: ignore[arg-type]
        providers=providers,
        fusions=fusions,
        tie_break=_split_list(selection.get("tie_break", "")),
    )
