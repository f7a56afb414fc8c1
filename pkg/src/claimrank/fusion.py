"""Rank-only fusion of two or three model runs.

Two phases, models visited best-first in round-robin order:

1. seed: each model contributes its next not-yet-emitted id from its own
   top ``seed_depth`` (5 for two models, 3 for three) until every seed
   slice is used up;
2. fill: the same round-robin continues over positions ``seed_depth + 1``
   onward until ``k`` ids are emitted or all lists are exhausted.

Duplicates are skipped, so a shared id costs its model a turn's worth of
depth but never a slot in the output.  Fused scores are ``1 / rank``.
"""

from __future__ import annotations

from collections.abc import Mapping, Sequence
from dataclasses import dataclass

from claimrank.errors import EmptyInputError, MissingRunError, PostCoverageMismatchError, ValidationError
from claimrank.retrieval import RankedEntry, RankedRun

DEFAULT_SEED_DEPTH = {2: 5, 3: 3}


def default_seed_depth(n_models: int, k: int = 10) -> int:
    return DEFAULT_SEED_DEPTH.get(n_models, max(1, k // n_models))


@dataclass(frozen=True)
class FusionSpec:
    model_order: tuple[str, ...]
    k: int = 10
    seed_depth: int | None = None
    name: str | None = None

    def __post_init__(self) -> None:
        order = tuple(self.model_order)
        object.__setattr__(self, "model_order", order)
        if len(order) not in (2, 3):
            raise ValidationError(f"fusion needs 2 or 3 models, got {len(order)}")
        if len(set(order)) != len(order):
            raise ValidationError(f"duplicate model in fusion order {order}")
        if self.k < 1:
            raise ValidationError("k must be >= 1")
        if self.seed_depth is None:
            object.__setattr__(self, "seed_depth", default_seed_depth(len(order), self.k))
        if self.seed_depth < 1 or self.seed_depth * len(order) > 2 * self.k:
            raise ValidationError(f"seed_depth {self.seed_depth} invalid for {len(order)} models and k={self.k}")

    @property
    def tag(self) -> str:
        """Candidate tag: explicit name, else model tags sorted and joined by '+'."""
        return self.name or "+".join(sorted(self.model_order))


def _ids(run: Sequence[RankedEntry] | Sequence[str]) -> list[str]:
    return [e.factcheck_id if isinstance(e, RankedEntry) else e for e in run]


def fuse_lists(runs: Sequence[Sequence[RankedEntry] | Sequence[str]], k: int = 10, seed_depth: int | None = None) -> list[RankedEntry]:
    """Fuse best-first ranked lists; see the module docstring for the procedure."""
    if k < 1:
        raise ValidationError("k must be >= 1")
    lists = [_ids(r) for r in runs]
    if not any(lists):
        raise EmptyInputError("all input lists are empty")
    depth = seed_depth if seed_depth is not None else default_seed_depth(len(lists), k)

    emitted: list[str] = []
    seen: set[str] = set()
    cursors = [0] * len(lists)

    def sweep(limit: int | None) -> None:
        active = True
        while active and len(emitted) < k:
            active = False
            for m, ids in enumerate(lists):
                end = len(ids) if limit is None else min(limit, len(ids))
                c = cursors[m]
                while c < end and ids[c] in seen:
                    c += 1
                if c < end:
                    seen.add(ids[c])
                    emitted.append(ids[c])
                    c += 1
                    active = True
                cursors[m] = c
                if len(emitted) == k:
                    return

    sweep(depth)
    # Fill restarts every model at its first position past the seed slice.
    for m in range(len(cursors)):
        cursors[m] = max(cursors[m], depth)
    sweep(None)
    return [RankedEntry(fc, 1.0 / r, r) for r, fc in enumerate(emitted, start=1)]


def fuse_two(run_a, run_b, k: int = 10, seed_depth: int = 5) -> list[RankedEntry]:
    """Fuse two lists, ``run_a`` from the better model."""
    return fuse_lists([run_a, run_b], k, seed_depth)


def fuse_three(run_a, run_b, run_c, k: int = 10, seed_depth: int = 3) -> list[RankedEntry]:
    return fuse_lists([run_a, run_b, run_c], k, seed_depth)


def fuse_run(spec: FusionSpec, runs: Mapping[str, RankedRun]) -> RankedRun:
    missing = [t for t in spec.model_order if t not in runs]
    if missing:
        raise MissingRunError(f"fusion {spec.tag!r} needs runs {missing}")
    selected = [runs[t] for t in spec.model_order]
    posts = set(selected[0].lists)
    scenarios = {r.scenario for r in selected}
    for tag, r in zip(spec.model_order, selected):
        if set(r.lists) != posts:
            diff = sorted(posts.symmetric_difference(r.lists))
            raise PostCoverageMismatchError(f"run {tag!r} covers different posts, e.g. {diff[:3]}")
    if len(scenarios) != 1:
        raise PostCoverageMismatchError(f"runs mix scenarios {sorted(scenarios)}")

    lists: dict[str, list[RankedEntry]] = {}
    for post_id in sorted(posts):
        per_model = [r.lists[post_id] for r in selected]
        lists[post_id] = fuse_lists(per_model, spec.k, spec.seed_depth) if any(per_model) else []
    return RankedRun(spec.tag, scenarios.pop(), lists)
