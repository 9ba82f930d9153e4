"""Offline batch content generation for script slots.

Prompts are assembled from whitelisted profile and book fields plus the slot
objective. A deterministic mock client makes the full pipeline runnable with
no model access; HTTP adapters for real backends live in ``remote`` and are
opt-in. Candidate ids are content hashes that exclude timestamps, so reruns
with the same seed reproduce the same ids.
"""

from __future__ import annotations

import abc
import hashlib
import json
from dataclasses import dataclass, replace
from typing import Callable

from .content_store import BookMeta, ChildProfile, Cohort
from .script_core import CrowdStrategy, SlotKind, SlotRef
from .timeutil import Clock, utc_now


@dataclass(frozen=True)
class ProfileExcerpt:
    """The only profile fields a prompt may carry."""

    name: str
    age: int
    interests: tuple[str, ...]
    favorite_motifs: tuple[str, ...]

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "age": self.age,
            "interests": list(self.interests),
            "favorite_motifs": list(self.favorite_motifs),
        }


@dataclass(frozen=True)
class BookExcerpt:
    title: str
    summary: str
    themes: tuple[str, ...]

    def to_dict(self) -> dict:
        return {"title": self.title, "summary": self.summary, "themes": list(self.themes)}


@dataclass(frozen=True)
class GenConstraints:
    age_band: tuple[int, int] = (9, 11)
    max_words: int = 40
    tone: str = "friendly"
    notes: tuple[str, ...] = ()  # moderator regeneration notes, appended in order

    def to_dict(self) -> dict:
        return {
            "age_band": list(self.age_band),
            "max_words": self.max_words,
            "tone": self.tone,
            "notes": list(self.notes),
        }


@dataclass(frozen=True)
class PromptSpec:
    slot: SlotRef
    strategy: CrowdStrategy
    objective: str
    profile_excerpt: ProfileExcerpt
    book_excerpt: BookExcerpt
    constraints: GenConstraints

    def to_dict(self) -> dict:
        return {
            "slot": self.slot.to_dict(),
            "strategy": self.strategy.value,
            "objective": self.objective,
            "profile_excerpt": self.profile_excerpt.to_dict(),
            "book_excerpt": self.book_excerpt.to_dict(),
            "constraints": self.constraints.to_dict(),
        }


def canonical_json(record: dict) -> str:
    return json.dumps(record, sort_keys=True, separators=(",", ":"), ensure_ascii=True)


@dataclass(frozen=True)
class Candidate:
    id: str
    slot: SlotRef
    child_id: str
    book_id: str
    text: str
    seed: int
    created_at: str

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "slot": self.slot.to_dict(),
            "child_id": self.child_id,
            "book_id": self.book_id,
            "text": self.text,
            "seed": self.seed,
            "created_at": self.created_at,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "Candidate":
        return cls(
            id=data["id"],
            slot=SlotRef.from_dict(data["slot"]),
            child_id=data["child_id"],
            book_id=data["book_id"],
            text=data["text"],
            seed=int(data["seed"]),
            created_at=data["created_at"],
        )


def candidate_id(slot: SlotRef, child_id: str, book_id: str, seed: int, generator_identity: str) -> str:
    """Pure function of the generation coordinates; excludes created_at and text."""
    payload = canonical_json(
        {
            "slot": slot.to_dict(),
            "child_id": child_id,
            "book_id": book_id,
            "seed": seed,
            "generator": generator_identity,
        }
    )
    return hashlib.sha256(payload.encode("utf-8")).hexdigest()[:16]


class ChildNotAssignedToBookError(ValueError):
    pass


class GenerationError(RuntimeError):
    pass


def assemble_prompt(
    slot: SlotRef,
    profile: ChildProfile,
    book: BookMeta,
    objective: str,
    constraints: GenConstraints = GenConstraints(),
    cohort: Cohort | None = None,
) -> PromptSpec:
    """Build the deterministic, whitelisted prompt payload for one slot.

    When a cohort is given, the (child, book) pair must match its assignment.
    """
    if cohort is not None and cohort.assignment.get(profile.id) != book.id:
        raise ChildNotAssignedToBookError(f"child '{profile.id}' is not assigned to book '{book.id}'")
    return PromptSpec(
        slot=slot,
        strategy=slot.strategy,
        objective=objective,
        profile_excerpt=ProfileExcerpt(
            name=profile.name,
            age=profile.age,
            interests=profile.interests,
            favorite_motifs=profile.favorite_motifs,
        ),
        book_excerpt=BookExcerpt(title=book.title, summary=book.summary, themes=book.themes),
        constraints=constraints,
    )


RUBRIC_CRITERIA = (
    "appropriateness",
    "understandability",
    "accuracy",
    "relevance",
    "engagement",
    "reflectiveness",
)


def render_prompt(spec: PromptSpec) -> str:
    """Textual prompt for remote backends (the mock never needs it)."""
    p = spec.profile_excerpt
    b = spec.book_excerpt
    c = spec.constraints
    lines = [
        "You write one short line for a friendly reading-companion robot.",
        f"The robot is talking with {p.name}, age {p.age}, about the book \"{b.title}\".",
        f"Line type: {spec.slot.kind.value}. Dialogic strategy: {spec.strategy.value}.",
        f"Objective: {spec.objective}.",
        f"Child's interests: {', '.join(p.interests) or 'unknown'}.",
        f"Favorite motifs: {', '.join(p.favorite_motifs) or 'unknown'}.",
        f"Book summary: {b.summary or 'unavailable'}",
        f"Themes: {', '.join(b.themes) or 'unknown'}.",
        f"Constraints: suitable for ages {c.age_band[0]}-{c.age_band[1]}; at most {c.max_words} words; "
        f"tone {c.tone}; exactly one utterance.",
        "The line must satisfy: " + ", ".join(RUBRIC_CRITERIA) + ".",
    ]
    for note in c.notes:
        lines.append(f"Reviewer note: {note}")
    return "\n".join(lines)


class GeneratorClient(abc.ABC):
    @abc.abstractmethod
    def generate(self, spec: PromptSpec, seed: int) -> str:
        """Return the utterance text for one slot."""

    @abc.abstractmethod
    def identity(self) -> str:
        """Stable name folded into candidate ids."""


def _stable_index(spec: PromptSpec, seed: int, size: int) -> int:
    digest = hashlib.sha256((canonical_json(spec.to_dict()) + "|" + str(seed)).encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "big") % size


# Variant tables per slot kind. A few entries are deliberately over-complex
# for the age band so the validation stage has real routing work to do.
_VARIANTS: dict[SlotKind, tuple[str, ...]] = {
    SlotKind.QUESTION: (
        "What part of {title} did you like best, {name}?",
        "If you could jump into {title} for one day, what would you do first?",
        "Which moment in {title} made you think about {motif}?",
        "What did you think when the story surprised you?",
        "Notwithstanding the multifarious narrative perspectives in {title}, which particular episode "
        "resonated most profoundly with your sensibilities?",
    ),
    SlotKind.FOLLOW_UP_QUESTION: (
        "Where would you go first, {name}?",
        "What would you do next if that happened to you?",
        "How does {motif} fit into that moment?",
        "Why do you think it happened that way?",
        "In what manner would you consequently endeavor to navigate comparable circumstances henceforth?",
    ),
    SlotKind.OPINION_OBSERVATION: (
        "I think {motif} makes every story more fun.",
        "That part of {title} felt like a real adventure to me.",
        "A story with {motif} in it always makes me dream a little.",
        "Stories like {title} remind me how big the world is.",
        "The overarching verisimilitude of {title} unquestionably exemplifies quintessentially "
        "transcendental escapism.",
    ),
    SlotKind.HUMOR: (
        "What do you call a pirate who likes to skip school? Captain Hooky!",
        "Why did the book join the police? It wanted to go undercover!",
        "Why did {name} bring a ladder to the library? To reach the tallest tales!",
        "Why don't pirates ever use grammar checkers? Because they're always speaking 'Arrrr-chaic English!'",
        "Why did the math book look so sad? Because it had too many problems!",
    ),
    SlotKind.PREGEN_RESPONSE: (
        "I know, right?",
        "That's a perfect adventurer's choice, {name}!",
        "That sounds wonderful to me!",
        "Exactly! That is just what I thought.",
    ),
}


class MockGenerator(GeneratorClient):
    """Pure templated generator: a function of (spec, seed) and nothing else."""

    def generate(self, spec: PromptSpec, seed: int) -> str:
        table = _VARIANTS[spec.slot.kind]
        variant = table[_stable_index(spec, seed, len(table))]
        p = spec.profile_excerpt
        motif = p.favorite_motifs[0] if p.favorite_motifs else (p.interests[0] if p.interests else "adventure")
        theme = spec.book_excerpt.themes[0] if spec.book_excerpt.themes else "friendship"
        return variant.format(name=p.name, title=spec.book_excerpt.title, motif=motif, theme=theme)

    def identity(self) -> str:
        return "mock-generator/1"


@dataclass(frozen=True)
class BatchFailure:
    child_id: str
    session_no: int
    slot_id: str
    error: str

    def to_dict(self) -> dict:
        return {
            "child_id": self.child_id,
            "session_no": self.session_no,
            "slot_id": self.slot_id,
            "error": self.error,
        }


@dataclass(frozen=True)
class BatchResult:
    candidates: tuple[Candidate, ...]
    failures: tuple[BatchFailure, ...]


def run_batch(
    cohort: Cohort,
    scripts: list,
    client: GeneratorClient,
    seed: int,
    constraints: GenConstraints = GenConstraints(),
    clock: Clock | None = None,
) -> BatchResult:
    """Generate one candidate per (child, script, manifest slot).

    Order is deterministic: child id, then session number, then manifest
    order. A failing item lands in the failure manifest; the batch continues.
    """
    tick = clock or utc_now
    candidates: list[Candidate] = []
    failures: list[BatchFailure] = []
    ordered_scripts = sorted(scripts, key=lambda c: (c.script.session_no, c.script.name))
    for profile in sorted(cohort.profiles, key=lambda p: p.id):
        book = cohort.assigned_book(profile.id)
        for compiled in ordered_scripts:
            for slot in compiled.slot_manifest:
                try:
                    spec = assemble_prompt(slot, profile, book, slot.objective, constraints, cohort)
                    text = client.generate(spec, seed)
                    if not text or not text.strip():
                        raise GenerationError("generator returned empty text")
                    candidates.append(
                        Candidate(
                            id=candidate_id(slot, profile.id, book.id, seed, client.identity()),
                            slot=slot,
                            child_id=profile.id,
                            book_id=book.id,
                            text=text,
                            seed=seed,
                            created_at=tick(),
                        )
                    )
                except Exception as exc:  # per-item isolation
                    failures.append(
                        BatchFailure(
                            child_id=profile.id,
                            session_no=slot.session_no,
                            slot_id=slot.slot_id,
                            error=f"{type(exc).__name__}: {exc}",
                        )
                    )
    return BatchResult(candidates=tuple(candidates), failures=tuple(failures))


def regenerate(
    candidate: Candidate,
    cohort: Cohort,
    client: GeneratorClient,
    note: str = "",
    constraints: GenConstraints = GenConstraints(),
    clock: Clock | None = None,
) -> tuple[Candidate, PromptSpec]:
    """Produce the replacement candidate for a rejected generation.

    The seed advances by one and the moderator note joins the constraints so
    the new prompt differs in an auditable way.
    """
    tick = clock or utc_now
    profile = cohort.profile(candidate.child_id)
    book = cohort.book(candidate.book_id)
    cons = replace(constraints, notes=constraints.notes + (note,)) if note else constraints
    spec = assemble_prompt(candidate.slot, profile, book, candidate.slot.objective, cons, cohort)
    seed = candidate.seed + 1
    text = client.generate(spec, seed)
    if not text or not text.strip():
        raise GenerationError("generator returned empty text")
    new_candidate = Candidate(
        id=candidate_id(candidate.slot, candidate.child_id, candidate.book_id, seed, client.identity()),
        slot=candidate.slot,
        child_id=candidate.child_id,
        book_id=candidate.book_id,
        text=text,
        seed=seed,
        created_at=tick(),
    )
    return new_candidate, spec
