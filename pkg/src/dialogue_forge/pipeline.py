"""End-to-end offline pipeline: generate, score, route, ingest.

Artifacts land in an output directory: candidates.ndjson and scored.ndjson
are rewritten deterministically each run; decisions.ndjson only ever grows.
Re-running with identical inputs reproduces the first two byte for byte and
ingests nothing new.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

from .content_store import Cohort
from .genpipe import (
    BatchFailure,
    Candidate,
    GenConstraints,
    GeneratorClient,
    assemble_prompt,
    regenerate,
    run_batch,
)
from .moderation import ContentItem, ModerationStore, ScoredCandidate
from .timeutil import Clock
from .validator import JudgeClient, ValidatorConfig, score_and_route

CANDIDATES_FILE = "candidates.ndjson"
SCORED_FILE = "scored.ndjson"
DECISIONS_FILE = "decisions.ndjson"
FAILURES_FILE = "failures.ndjson"


@dataclass(frozen=True)
class PipelineResult:
    generated: int
    auto_passed: int
    flagged: int
    ingested: int
    skipped_existing: int
    regenerated: int
    failures: tuple[BatchFailure, ...]


def build_spec(candidate: Candidate, cohort: Cohort, constraints: GenConstraints):
    return assemble_prompt(
        candidate.slot,
        cohort.profile(candidate.child_id),
        cohort.book(candidate.book_id),
        candidate.slot.objective,
        constraints,
        cohort,
    )


def score_candidate(
    candidate: Candidate,
    cohort: Cohort,
    judge: JudgeClient,
    config: ValidatorConfig,
    constraints: GenConstraints,
) -> ScoredCandidate:
    spec = build_spec(candidate, cohort, constraints)
    rubric, violations, verdict = score_and_route(candidate, spec, judge, config)
    return ScoredCandidate(
        candidate=candidate,
        rubric=rubric,
        violations=tuple(violations),
        verdict=verdict,
        judge_identity=judge.identity(),
    )


def _write_ndjson(path: Path, rows: list[dict]) -> None:
    with path.open("w", encoding="utf-8") as fh:
        for row in rows:
            fh.write(json.dumps(row, sort_keys=True, ensure_ascii=False) + "\n")


def process_regen_orders(
    store: ModerationStore,
    cohort: Cohort,
    generator: GeneratorClient,
    judge: JudgeClient,
    config: ValidatorConfig,
    constraints: GenConstraints = GenConstraints(),
    clock: Clock | None = None,
) -> list[ContentItem]:
    """Fulfil pending regeneration orders: new candidate at seed+1, scored and
    ingested with lineage back to the source candidate."""
    produced: list[ContentItem] = []
    for order in store.pending_regen_orders():
        new_candidate, spec = regenerate(
            order.item.candidate, cohort, generator, order.note, constraints, clock
        )
        if store.has(new_candidate.id):
            continue
        rubric, violations, verdict = score_and_route(new_candidate, spec, judge, config)
        scored = ScoredCandidate(
            candidate=new_candidate,
            rubric=rubric,
            violations=tuple(violations),
            verdict=verdict,
            judge_identity=judge.identity(),
        )
        produced.append(store.ingest(scored, regen_of=order.item.candidate.id))
    return produced


def run_pipeline(
    cohort: Cohort,
    scripts: list,
    out_dir: Path | str,
    generator: GeneratorClient,
    judge: JudgeClient,
    seed: int,
    config: ValidatorConfig | None = None,
    constraints: GenConstraints = GenConstraints(),
    clock: Clock | None = None,
    store: ModerationStore | None = None,
) -> PipelineResult:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    config = config or ValidatorConfig.default()

    batch = run_batch(cohort, scripts, generator, seed, constraints, clock=clock)
    _write_ndjson(out / CANDIDATES_FILE, [c.to_dict() for c in batch.candidates])
    if batch.failures:
        _write_ndjson(out / FAILURES_FILE, [f.to_dict() for f in batch.failures])

    scored = [score_candidate(c, cohort, judge, config, constraints) for c in batch.candidates]
    _write_ndjson(out / SCORED_FILE, [s.to_dict() for s in scored])

    store = store or ModerationStore(out / DECISIONS_FILE)
    ingested = 0
    skipped = 0
    for record in scored:
        if store.has(record.candidate.id):
            skipped += 1
            continue
        store.ingest(record)
        ingested += 1

    regenerated = len(process_regen_orders(store, cohort, generator, judge, config, constraints, clock))

    auto = sum(1 for s in scored if s.verdict.is_auto_pass)
    return PipelineResult(
        generated=len(batch.candidates),
        auto_passed=auto,
        flagged=len(scored) - auto,
        ingested=ingested,
        skipped_existing=skipped,
        regenerated=regenerated,
        failures=batch.failures,
    )
