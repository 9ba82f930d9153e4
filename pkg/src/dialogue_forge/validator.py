"""Rubric scoring and deterministic child-friendliness checks.

Every candidate gets a six-criterion rubric from a judge client plus three
deterministic checks (readability grade, banned words, length). The two
combine into an auto-pass or flagged routing verdict; a judge failure flags
the item rather than letting it through. The bundled mock judge is a pure
heuristic so every routing path can be exercised offline.
"""

from __future__ import annotations

import abc
import importlib.resources
from dataclasses import dataclass
from enum import Enum
from pathlib import Path

from .genpipe import PromptSpec

CRITERIA = (
    "appropriateness",
    "understandability",
    "accuracy",
    "relevance",
    "engagement",
    "reflectiveness",
)

_VOWELS = set("aeiouy")


class EmptyTextError(ValueError):
    pass


def _word_tokens(text: str) -> list[str]:
    tokens = []
    for raw in text.split():
        letters = "".join(ch for ch in raw if ch.isalpha()).lower()
        if letters:
            tokens.append(letters)
    return tokens


def count_words(text: str) -> int:
    return len(_word_tokens(text))


def count_sentences(text: str) -> int:
    """Runs of .!? split sentences; a text with words counts at least one."""
    count = 0
    segment_has_word = False
    for ch in text:
        if ch in ".!?":
            if segment_has_word:
                count += 1
            segment_has_word = False
        elif ch.isalpha():
            segment_has_word = True
    if segment_has_word:
        count += 1
    return max(count, 1)


def syllables_in_word(word: str) -> int:
    """Vowel-group count over a,e,i,o,u,y; a word-final lone 'e' is dropped
    unless the word ends in 'le' or has length <= 2. Minimum one syllable."""
    word = word.lower()
    groups = 0
    previous_vowel = False
    for ch in word:
        is_vowel = ch in _VOWELS
        if is_vowel and not previous_vowel:
            groups += 1
        previous_vowel = is_vowel
    if (
        len(word) > 2
        and word.endswith("e")
        and not word.endswith("le")
        and word[-2] not in _VOWELS
    ):
        groups -= 1
    return max(groups, 1)


def count_syllables(text: str) -> int:
    return sum(syllables_in_word(token) for token in _word_tokens(text))


def fk_grade(text: str) -> float:
    """Flesch-Kincaid grade: 0.39*(words/sentences) + 11.8*(syllables/words) - 15.59."""
    words = _word_tokens(text)
    if not words:
        raise EmptyTextError("cannot grade empty text")
    sentences = count_sentences(text)
    syllables = sum(syllables_in_word(w) for w in words)
    return 0.39 * (len(words) / sentences) + 11.8 * (syllables / len(words)) - 15.59


def load_lexicon(path: Path | str) -> frozenset[str]:
    """One lowercase word per line; '#' starts a comment. Missing file raises."""
    words: set[str] = set()
    with Path(path).open(encoding="utf-8") as fh:
        for line in fh:
            entry = line.split("#", 1)[0].strip().lower()
            if entry:
                words.add(entry)
    return frozenset(words)


def _packaged_lexicon(filename: str) -> frozenset[str]:
    resource = importlib.resources.files("dialogue_forge.data") / filename
    with importlib.resources.as_file(resource) as path:
        return load_lexicon(path)


def default_banned_lexicon() -> frozenset[str]:
    return _packaged_lexicon("lexicon_banned.txt")


@dataclass(frozen=True)
class ValidatorConfig:
    max_grade: float = 5.0
    max_words: int = 40
    banned_words: frozenset[str] = frozenset()
    autopass_mean: float = 4.0
    min_criterion: int = 3

    @classmethod
    def default(cls) -> "ValidatorConfig":
        return cls(banned_words=default_banned_lexicon())


class CheckKind(str, Enum):
    READABILITY = "readability"
    LEXICON = "lexicon"
    LENGTH = "length"


@dataclass(frozen=True)
class Violation:
    check: CheckKind
    detail: str
    measured: float
    limit: float

    def to_dict(self) -> dict:
        return {
            "check": self.check.value,
            "detail": self.detail,
            "measured": self.measured,
            "limit": self.limit,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "Violation":
        return cls(
            check=CheckKind(data["check"]),
            detail=data["detail"],
            measured=data["measured"],
            limit=data["limit"],
        )


def deterministic_checks(text: str, config: ValidatorConfig) -> list[Violation]:
    """Readability, lexicon, length, in that order."""
    violations: list[Violation] = []
    grade = fk_grade(text)
    if grade > config.max_grade:
        violations.append(
            Violation(
                check=CheckKind.READABILITY,
                detail=f"reading grade {grade:.2f} above limit {config.max_grade}",
                measured=round(grade, 4),
                limit=config.max_grade,
            )
        )
    if config.banned_words:
        found: list[str] = []
        for token in _word_tokens(text):
            if token in config.banned_words:
                found.append(token)
        if found:
            unique = sorted(set(found))
            violations.append(
                Violation(
                    check=CheckKind.LEXICON,
                    detail="banned words: " + ", ".join(unique),
                    measured=len(found),
                    limit=0,
                )
            )
    words = count_words(text)
    if words > config.max_words:
        violations.append(
            Violation(
                check=CheckKind.LENGTH,
                detail=f"{words} words over limit {config.max_words}",
                measured=words,
                limit=config.max_words,
            )
        )
    return violations


@dataclass(frozen=True)
class RubricScore:
    appropriateness: int
    understandability: int
    accuracy: int
    relevance: int
    engagement: int
    reflectiveness: int

    def __post_init__(self):
        for name in CRITERIA:
            value = getattr(self, name)
            if not isinstance(value, int) or isinstance(value, bool) or not 1 <= value <= 5:
                raise ValueError(f"{name} must be an integer in 1..5, got {value!r}")

    @property
    def overall(self) -> float:
        """Arithmetic mean, always recomputed and never stored independently."""
        return sum(getattr(self, name) for name in CRITERIA) / len(CRITERIA)

    def min_criterion(self) -> int:
        return min(getattr(self, name) for name in CRITERIA)

    def to_dict(self) -> dict:
        return {name: getattr(self, name) for name in CRITERIA}

    @classmethod
    def from_dict(cls, data: dict) -> "RubricScore":
        return cls(**{name: int(data[name]) for name in CRITERIA})


@dataclass(frozen=True)
class Verdict:
    status: str  # "auto_pass" | "flagged"
    reasons: tuple[str, ...] = ()

    @property
    def is_auto_pass(self) -> bool:
        return self.status == "auto_pass"

    @classmethod
    def auto_pass(cls) -> "Verdict":
        return cls(status="auto_pass")

    @classmethod
    def flagged(cls, reasons: list[str]) -> "Verdict":
        if not reasons:
            raise ValueError("a flagged verdict needs at least one reason")
        return cls(status="flagged", reasons=tuple(reasons))

    def to_dict(self) -> dict:
        return {"status": self.status, "reasons": list(self.reasons)}

    @classmethod
    def from_dict(cls, data: dict) -> "Verdict":
        return cls(status=data["status"], reasons=tuple(data["reasons"]))


class JudgeClient(abc.ABC):
    @abc.abstractmethod
    def score(self, text: str, context: PromptSpec) -> RubricScore:
        """Six-criterion rubric for one candidate text."""

    @abc.abstractmethod
    def identity(self) -> str:
        """Stable name recorded with each scored item."""


def _grade_band(grade: float) -> int:
    if grade <= 3.0:
        return 5
    if grade <= 5.0:
        return 4
    if grade <= 7.0:
        return 3
    if grade <= 9.0:
        return 2
    return 1


class MockJudge(JudgeClient):
    """Deterministic heuristic judge.

    Understandability follows reading-grade bands; engagement rewards a
    question mark or a favorite-motif mention; the other four criteria sit at
    4 so routing is driven by the two live signals.
    """

    def score(self, text: str, context: PromptSpec) -> RubricScore:
        understandability = _grade_band(fk_grade(text))
        lowered = text.lower()
        motifs = context.profile_excerpt.favorite_motifs
        engaged = "?" in text or any(m.lower() in lowered for m in motifs)
        return RubricScore(
            appropriateness=4,
            understandability=understandability,
            accuracy=4,
            relevance=4,
            engagement=5 if engaged else 3,
            reflectiveness=4,
        )

    def identity(self) -> str:
        return "mock-judge/1"


def score_and_route(
    candidate,
    context: PromptSpec,
    judge: JudgeClient,
    config: ValidatorConfig,
) -> tuple[RubricScore, list[Violation], Verdict]:
    """Score one candidate and decide its moderation route.

    Auto-pass requires overall >= the mean threshold, every criterion >= the
    minimum, and zero deterministic violations. A judge failure flags the
    item with reason "judge-unavailable" and an all-ones rubric so it sorts
    to the front of the priority queue.
    """
    violations = deterministic_checks(candidate.text, config)
    violation_reasons = [f"{v.check.value}: {v.detail}" for v in violations]
    try:
        rubric = judge.score(candidate.text, context)
    except Exception:
        rubric = RubricScore(1, 1, 1, 1, 1, 1)
        return rubric, violations, Verdict.flagged(["judge-unavailable"] + violation_reasons)
    reasons: list[str] = []
    if rubric.overall < config.autopass_mean:
        reasons.append(f"overall={rubric.overall:.2f} below threshold {config.autopass_mean}")
    for name in CRITERIA:
        value = getattr(rubric, name)
        if value < config.min_criterion:
            reasons.append(f"{name}={value} below minimum {config.min_criterion}")
    reasons.extend(violation_reasons)
    if reasons:
        return rubric, violations, Verdict.flagged(reasons)
    return rubric, violations, Verdict.auto_pass()
