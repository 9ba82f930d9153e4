"""Session runtime: bind approved content into a compiled script and step it.

This module depends only on the script and cohort layers. It never imports
the generation pipeline, judge, or moderation machinery; a session can only
utter static scaffold text and slot content that a reviewer approved. Any
interpolation failure aborts the session rather than improvising.
"""

from __future__ import annotations

import importlib.resources
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Mapping, Protocol, Sequence, Union

from .content_store import BookMeta, ChildProfile, Cohort, MissingKeyError, interpolate
from .script_core import (
    Ask,
    Branch,
    CompiledScript,
    End,
    Goto,
    Label,
    Recall,
    ResponseClass,
    Say,
    Slot,
)


@dataclass(frozen=True)
class RobotUtterance:
    text: str
    source: str  # "static" | "slot"
    slot_id: str | None = None


@dataclass(frozen=True)
class ChildInput:
    text: str
    classified: ResponseClass


@dataclass(frozen=True)
class MemoryWrite:
    key: str


@dataclass(frozen=True)
class SessionAbortMarker:
    reason: str


TranscriptEvent = Union[RobotUtterance, ChildInput, MemoryWrite, SessionAbortMarker]


@dataclass(frozen=True)
class AwaitInput:
    pass


@dataclass(frozen=True)
class Ended:
    pass


StepEvent = Union[RobotUtterance, AwaitInput, Ended]


class MissingContentError(RuntimeError):
    """Binding refused: these slots have no approved content."""

    def __init__(self, slot_ids: list[str]):
        self.slot_ids = list(slot_ids)
        super().__init__("no approved content for slots: " + ", ".join(self.slot_ids))


class AssignmentMismatchError(ValueError):
    pass


class SessionAbortedError(RuntimeError):
    pass


class InputNotAwaitedError(RuntimeError):
    pass


class MissingInputError(RuntimeError):
    pass


class RuntimeLoopError(RuntimeError):
    pass


class ApprovedContentView(Protocol):
    """Read surface the runtime needs from a moderation store."""

    def approved_text_for(
        self, child_id: str, script_name: str, session_no: int, slot_id: str
    ) -> str | None: ...


@dataclass(frozen=True)
class BoundScript:
    compiled: CompiledScript
    bindings: dict[str, str]  # slot id -> approved text, snapshotted at bind time
    child_id: str
    book_id: str


def bind(
    compiled: CompiledScript,
    store: ApprovedContentView,
    cohort: Cohort,
    child_id: str,
    book_id: str,
) -> BoundScript:
    """Snapshot approved text for every manifest slot, or refuse.

    Raises AssignmentMismatchError when the cohort maps the child elsewhere
    and MissingContentError naming every unfilled slot.
    """
    if cohort.assignment.get(child_id) != book_id:
        raise AssignmentMismatchError(f"child '{child_id}' is not assigned to book '{book_id}'")
    bindings: dict[str, str] = {}
    missing: list[str] = []
    for slot in compiled.slot_manifest:
        text = store.approved_text_for(child_id, slot.script_name, slot.session_no, slot.slot_id)
        if text is None:
            missing.append(slot.slot_id)
        else:
            bindings[slot.slot_id] = text
    if missing:
        raise MissingContentError(missing)
    return BoundScript(compiled=compiled, bindings=bindings, child_id=child_id, book_id=book_id)


@dataclass(frozen=True)
class SentimentLexicon:
    positive: frozenset[str]
    negative: frozenset[str]


def _load_words(path: Path) -> frozenset[str]:
    words: set[str] = set()
    with path.open(encoding="utf-8") as fh:
        for line in fh:
            entry = line.split("#", 1)[0].strip().lower()
            if entry:
                words.add(entry)
    return frozenset(words)


def load_sentiment_lexicon(positive_path: Path | str, negative_path: Path | str) -> SentimentLexicon:
    return SentimentLexicon(positive=_load_words(Path(positive_path)), negative=_load_words(Path(negative_path)))


def default_sentiment_lexicon() -> SentimentLexicon:
    data = importlib.resources.files("dialogue_forge.data")
    with importlib.resources.as_file(data / "lexicon_positive.txt") as pos:
        with importlib.resources.as_file(data / "lexicon_negative.txt") as neg:
            return load_sentiment_lexicon(pos, neg)


def classify_response(text: str, lexicon: SentimentLexicon) -> ResponseClass:
    """Token-count sentiment: more positive tokens wins, ties above zero are
    neutral, zero matches is unknown."""
    positive = 0
    negative = 0
    for raw in text.split():
        token = "".join(ch for ch in raw if ch.isalpha()).lower()
        if not token:
            continue
        if token in lexicon.positive:
            positive += 1
        if token in lexicon.negative:
            negative += 1
    if positive > negative:
        return ResponseClass.POSITIVE
    if negative > positive:
        return ResponseClass.NEGATIVE
    if positive > 0:
        return ResponseClass.NEUTRAL
    return ResponseClass.UNKNOWN


MemoryWriter = Callable[[str, str], None]


class Session:
    """Deterministic single-child session over a bound script.

    Memory reads resolve against a snapshot taken at construction plus any
    writes made during this session; the optional writer persists writes.
    """

    def __init__(
        self,
        bound: BoundScript,
        profile: ChildProfile,
        book: BookMeta,
        memory: Mapping[str, str],
        memory_writer: MemoryWriter | None = None,
        lexicon: SentimentLexicon | None = None,
    ):
        self._bound = bound
        self._profile = profile
        self._book = book
        self._memory = dict(memory)
        self._writer = memory_writer
        self._lexicon = lexicon or default_sentiment_lexicon()
        self._pc = 0
        self._awaiting: Ask | None = None
        self._ended = False
        self._last_class: ResponseClass | None = None
        self.transcript: list[TranscriptEvent] = []

    @property
    def ended(self) -> bool:
        return self._ended

    def step(self, child_input: str | None = None) -> StepEvent:
        """Advance to the next utterance, input request, or the end."""
        if self._ended:
            return Ended()
        if self._awaiting is None and child_input is not None:
            raise InputNotAwaitedError("session is not awaiting input")
        if self._awaiting is not None:
            if child_input is None:
                raise MissingInputError("session awaits child input")
            self._consume_input(child_input)
        return self._advance()

    def _consume_input(self, text: str) -> None:
        ask = self._awaiting
        assert ask is not None
        if ask.classify:
            classified = classify_response(text, self._lexicon)
            self._last_class = classified
        else:
            classified = ResponseClass.UNKNOWN
        self.transcript.append(ChildInput(text=text, classified=classified))
        self._memory[ask.memory_key] = text
        if self._writer is not None:
            self._writer(ask.memory_key, text)
        self.transcript.append(MemoryWrite(key=ask.memory_key))
        self._awaiting = None
        self._pc += 1

    def _interpolate(self, template: str) -> str:
        try:
            return interpolate(template, self._profile, self._book, self._memory)
        except (MissingKeyError, ValueError) as exc:
            self.transcript.append(SessionAbortMarker(reason=str(exc)))
            self._ended = True
            raise SessionAbortedError(str(exc)) from exc

    def _utter(self, text: str, source: str, slot_id: str | None = None) -> RobotUtterance:
        event = RobotUtterance(text=text, source=source, slot_id=slot_id)
        self.transcript.append(event)
        return event

    def _advance(self) -> StepEvent:
        blocks = self._bound.compiled.script.blocks
        table = self._bound.compiled.label_table
        silent_steps = 0
        while True:
            block = blocks[self._pc]
            if isinstance(block, Say):
                text = self._interpolate(block.text)
                self._pc += 1
                return self._utter(text, "static")
            if isinstance(block, Slot):
                text = self._interpolate(self._bound.bindings[block.id])
                self._pc += 1
                return self._utter(text, "slot", slot_id=block.id)
            if isinstance(block, Recall):
                text = self._interpolate("{memory." + block.memory_key + "}")
                self._pc += 1
                return self._utter(text, "static")
            if isinstance(block, Ask):
                self._awaiting = block
                return AwaitInput()
            if isinstance(block, End):
                self._ended = True
                return Ended()
            # silent control blocks
            silent_steps += 1
            if silent_steps > len(blocks) + 1:
                raise RuntimeLoopError("control is cycling through silent blocks without uttering")
            if isinstance(block, Label):
                self._pc += 1
            elif isinstance(block, Goto):
                self._pc = table[block.label]
            elif isinstance(block, Branch):
                current = self._last_class if self._last_class is not None else ResponseClass.UNKNOWN
                target = None
                for arm in block.arms:
                    if arm.response is current:
                        target = arm.target
                        break
                if target is None:
                    for arm in block.arms:
                        if arm.response is None:
                            target = arm.target
                            break
                assert target is not None  # compile guarantees a wildcard arm
                self._pc = table[target]


def drive_session(session: Session, inputs: Sequence[str]) -> list[TranscriptEvent]:
    """Run a session over scripted inputs until it ends; returns transcript."""
    queue = iter(inputs)
    event = session.step()
    while not isinstance(event, Ended):
        if isinstance(event, AwaitInput):
            try:
                answer = next(queue)
            except StopIteration:
                raise MissingInputError("script expects more child inputs") from None
            event = session.step(answer)
        else:
            event = session.step()
    return list(session.transcript)


def transcript_to_dicts(events: Sequence[TranscriptEvent]) -> list[dict]:
    rows: list[dict] = []
    for event in events:
        if isinstance(event, RobotUtterance):
            rows.append({"type": "robot", "text": event.text, "source": event.source, "slot_id": event.slot_id})
        elif isinstance(event, ChildInput):
            rows.append({"type": "child", "text": event.text, "classified": event.classified.value})
        elif isinstance(event, MemoryWrite):
            rows.append({"type": "memory_write", "key": event.key})
        elif isinstance(event, SessionAbortMarker):
            rows.append({"type": "aborted", "reason": event.reason})
        else:  # pragma: no cover - closed union
            raise TypeError(f"unknown transcript event {type(event)!r}")
    return rows


def write_transcript(path: Path | str, events: Sequence[TranscriptEvent]) -> None:
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    with target.open("w", encoding="utf-8") as fh:
        for row in transcript_to_dicts(events):
            fh.write(json.dumps(row, sort_keys=True, ensure_ascii=False) + "\n")
