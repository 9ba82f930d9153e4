"""Human review workflow over scored candidates.

Items live in an append-only event log (``decisions.ndjson``); an in-memory
projection rebuilt at startup derives queue membership, revisions and regen
lineage. Every state change is a Decision appended to the item's audit
trail; optimistic revision checks make concurrent moderators safe.
"""

from __future__ import annotations

import json
import threading
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path

from .genpipe import Candidate
from .validator import RubricScore, Verdict, Violation

DEFAULT_MAX_REGEN = 5


class Status(str, Enum):
    SCORED = "scored"
    AUTO_PASSED = "auto_passed"
    FLAGGED = "flagged"
    APPROVED = "approved"
    REJECTED = "rejected"
    REGEN_REQUESTED = "regen_requested"


class Action(str, Enum):
    APPROVE = "approve"
    EDIT = "edit"
    REJECT = "reject"
    REQUEST_REGEN = "regen"
    GLANCE = "glance"


# Legal (status, action) -> next status. Scored routes by verdict at ingest;
# Approved and Rejected are terminal; a RegenRequested item continues only
# through its linked successor. Reject during glance review demotes to the
# priority queue instead of rejecting outright.
_TRANSITIONS: dict[tuple[Status, Action], Status] = {
    (Status.AUTO_PASSED, Action.APPROVE): Status.APPROVED,
    (Status.AUTO_PASSED, Action.GLANCE): Status.APPROVED,
    (Status.AUTO_PASSED, Action.REJECT): Status.FLAGGED,
    (Status.FLAGGED, Action.APPROVE): Status.APPROVED,
    (Status.FLAGGED, Action.EDIT): Status.FLAGGED,
    (Status.FLAGGED, Action.REJECT): Status.REJECTED,
    (Status.FLAGGED, Action.REQUEST_REGEN): Status.REGEN_REQUESTED,
}


@dataclass(frozen=True)
class Decision:
    action: Action
    moderator: str
    note: str = ""
    new_text: str | None = None
    at: str = ""

    def to_dict(self) -> dict:
        return {
            "action": self.action.value,
            "moderator": self.moderator,
            "note": self.note,
            "new_text": self.new_text,
            "at": self.at,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "Decision":
        return cls(
            action=Action(data["action"]),
            moderator=data["moderator"],
            note=data.get("note", ""),
            new_text=data.get("new_text"),
            at=data.get("at", ""),
        )


@dataclass(frozen=True)
class ScoredCandidate:
    """One pipeline output row: a candidate plus its scores and routing."""

    candidate: Candidate
    rubric: RubricScore
    violations: tuple[Violation, ...]
    verdict: Verdict
    judge_identity: str

    def to_dict(self) -> dict:
        return {
            "candidate": self.candidate.to_dict(),
            "rubric": self.rubric.to_dict(),
            "violations": [v.to_dict() for v in self.violations],
            "verdict": self.verdict.to_dict(),
            "judge": self.judge_identity,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ScoredCandidate":
        return cls(
            candidate=Candidate.from_dict(data["candidate"]),
            rubric=RubricScore.from_dict(data["rubric"]),
            violations=tuple(Violation.from_dict(v) for v in data["violations"]),
            verdict=Verdict.from_dict(data["verdict"]),
            judge_identity=data["judge"],
        )


@dataclass
class ContentItem:
    candidate: Candidate
    rubric: RubricScore
    violations: tuple[Violation, ...]
    verdict: Verdict
    judge_identity: str
    status: Status
    revision: int
    current_text: str
    audit: list[Decision] = field(default_factory=list)
    regen_of: str | None = None

    @property
    def id(self) -> str:
        return self.candidate.id


@dataclass(frozen=True)
class RegenOrder:
    """An unfulfilled regeneration request emitted by a moderator."""

    item: ContentItem
    note: str


class DuplicateItemError(ValueError):
    pass


class UnknownItemError(KeyError):
    pass


class ConflictError(RuntimeError):
    def __init__(self, expected: int, actual: int):
        self.expected = expected
        self.actual = actual
        super().__init__(f"revision conflict: expected {expected}, item is at {actual}")


class IllegalTransitionError(ValueError):
    pass


class DecisionValidationError(ValueError):
    pass


class CorruptLogError(RuntimeError):
    pass


def route_status(verdict: Verdict) -> Status:
    return Status.AUTO_PASSED if verdict.is_auto_pass else Status.FLAGGED


class ModerationStore:
    """Event-log backed store; pass log_path=None for a volatile store."""

    def __init__(self, log_path: Path | str | None = None, max_regen: int = DEFAULT_MAX_REGEN):
        self._log_path = Path(log_path) if log_path is not None else None
        self._max_regen = max_regen
        self._items: dict[str, ContentItem] = {}
        self._lock = threading.Lock()
        if self._log_path is not None and self._log_path.exists():
            self._replay_log()

    def _replay_log(self) -> None:
        assert self._log_path is not None
        with self._log_path.open(encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, start=1):
                if not line.strip():
                    continue
                try:
                    event = json.loads(line)
                    if event["event"] == "ingest":
                        self._ingest_projection(
                            ScoredCandidate.from_dict(event["scored"]), event.get("regen_of")
                        )
                    elif event["event"] == "decision":
                        item = self._items[event["item_id"]]
                        self._apply_projection(item, Decision.from_dict(event["decision"]))
                    else:
                        raise ValueError(f"unknown event kind {event['event']!r}")
                except (KeyError, ValueError, TypeError) as exc:
                    raise CorruptLogError(f"{self._log_path}:{lineno}: {exc}") from exc

    def _append_event(self, event: dict) -> None:
        if self._log_path is None:
            return
        self._log_path.parent.mkdir(parents=True, exist_ok=True)
        with self._log_path.open("a", encoding="utf-8") as fh:
            fh.write(json.dumps(event, sort_keys=True, ensure_ascii=False) + "\n")
            fh.flush()

    def _ingest_projection(self, scored: ScoredCandidate, regen_of: str | None) -> ContentItem:
        if scored.candidate.id in self._items:
            raise DuplicateItemError(f"item '{scored.candidate.id}' already ingested")
        item = ContentItem(
            candidate=scored.candidate,
            rubric=scored.rubric,
            violations=scored.violations,
            verdict=scored.verdict,
            judge_identity=scored.judge_identity,
            status=route_status(scored.verdict),
            revision=0,
            current_text=scored.candidate.text,
            regen_of=regen_of,
        )
        self._items[item.id] = item
        return item

    @staticmethod
    def _validate_decision(decision: Decision) -> None:
        if decision.action is Action.EDIT:
            if not decision.new_text or not decision.new_text.strip():
                raise DecisionValidationError("edit requires non-empty new_text")
        elif decision.new_text is not None:
            raise DecisionValidationError(f"new_text is only allowed on edit, not {decision.action.value}")

    def _apply_projection(self, item: ContentItem, decision: Decision) -> None:
        self._validate_decision(decision)
        key = (item.status, decision.action)
        if key not in _TRANSITIONS:
            raise IllegalTransitionError(
                f"action '{decision.action.value}' is not allowed on a {item.status.value} item"
            )
        if decision.action is Action.REQUEST_REGEN and self._depth(item) >= self._max_regen:
            raise IllegalTransitionError(
                f"regeneration limit {self._max_regen} reached for this lineage; edit or reject instead"
            )
        item.status = _TRANSITIONS[key]
        item.revision += 1
        if decision.action is Action.EDIT:
            assert decision.new_text is not None
            item.current_text = decision.new_text
        item.audit.append(decision)

    def _depth(self, item: ContentItem) -> int:
        depth = 0
        current = item
        while current.regen_of is not None:
            depth += 1
            parent = self._items.get(current.regen_of)
            if parent is None:
                break
            current = parent
        return depth

    # -- public surface ----------------------------------------------------

    def ingest(self, scored: ScoredCandidate, regen_of: str | None = None) -> ContentItem:
        """Route a scored candidate into a queue; duplicate ids are errors."""
        with self._lock:
            if scored.candidate.id in self._items:
                raise DuplicateItemError(f"item '{scored.candidate.id}' already ingested")
            self._append_event({"event": "ingest", "scored": scored.to_dict(), "regen_of": regen_of})
            return self._ingest_projection(scored, regen_of)

    def has(self, item_id: str) -> bool:
        with self._lock:
            return item_id in self._items

    def get(self, item_id: str) -> ContentItem:
        with self._lock:
            if item_id not in self._items:
                raise UnknownItemError(item_id)
            return self._items[item_id]

    def items(self) -> list[ContentItem]:
        with self._lock:
            return list(self._items.values())

    def apply_decision(self, item_id: str, decision: Decision, expected_revision: int) -> ContentItem:
        """Apply one moderator decision under an optimistic revision check."""
        with self._lock:
            if item_id not in self._items:
                raise UnknownItemError(item_id)
            item = self._items[item_id]
            if expected_revision != item.revision:
                raise ConflictError(expected_revision, item.revision)
            self._validate_decision(decision)
            key = (item.status, decision.action)
            if key not in _TRANSITIONS:
                raise IllegalTransitionError(
                    f"action '{decision.action.value}' is not allowed on a {item.status.value} item"
                )
            if decision.action is Action.REQUEST_REGEN and self._depth(item) >= self._max_regen:
                raise IllegalTransitionError(
                    f"regeneration limit {self._max_regen} reached for this lineage; edit or reject instead"
                )
            self._append_event({"event": "decision", "item_id": item_id, "decision": decision.to_dict()})
            self._apply_projection(item, decision)
            return item

    def next_queue(self, kind: str, limit: int = 50) -> list[ContentItem]:
        """Priority queue: flagged items, worst rubric first. Glance queue:
        auto-passed items, newest first."""
        if limit < 1:
            raise ValueError("limit must be >= 1")
        with self._lock:
            items = list(self._items.values())
        if kind == "priority":
            picked = [i for i in items if i.status is Status.FLAGGED]
            picked.sort(key=lambda i: (i.rubric.overall, i.candidate.created_at, i.candidate.id))
        elif kind == "glance":
            picked = [i for i in items if i.status is Status.AUTO_PASSED]
            picked.sort(key=lambda i: (i.candidate.created_at, i.candidate.id), reverse=True)
        else:
            raise ValueError(f"unknown queue kind '{kind}'")
        return picked[:limit]

    def stats(self) -> dict:
        with self._lock:
            items = list(self._items.values())
        by_status = {status.value: 0 for status in Status}
        for item in items:
            by_status[item.status.value] += 1
        return {"total": len(items), "validated": len(items), "by_status": by_status}

    def successor_of(self, candidate_id: str) -> ContentItem | None:
        """The regenerated item linked to this candidate, if one exists."""
        with self._lock:
            for item in self._items.values():
                if item.regen_of == candidate_id:
                    return item
        return None

    def regen_depth(self, item: ContentItem) -> int:
        with self._lock:
            return self._depth(item)

    def pending_regen_orders(self) -> list[RegenOrder]:
        """Regen requests that no successor item has fulfilled yet."""
        with self._lock:
            fulfilled = {i.regen_of for i in self._items.values() if i.regen_of is not None}
            orders = []
            for item in self._items.values():
                if item.status is Status.REGEN_REQUESTED and item.candidate.id not in fulfilled:
                    note = ""
                    for decision in reversed(item.audit):
                        if decision.action is Action.REQUEST_REGEN:
                            note = decision.note
                            break
                    orders.append(RegenOrder(item=item, note=note))
            orders.sort(key=lambda o: o.item.candidate.id)
            return orders

    @staticmethod
    def bindable(item: ContentItem) -> bool:
        return item.status is Status.APPROVED

    def approved_text_for(self, child_id: str, script_name: str, session_no: int, slot_id: str) -> str | None:
        """Reviewed text for one slot of one child's session, or None.

        When a regen lineage has several approved entries the latest seed
        wins, so the newest reviewed text is the one uttered.
        """
        with self._lock:
            matches = [
                item
                for item in self._items.values()
                if item.status is Status.APPROVED
                and item.candidate.child_id == child_id
                and item.candidate.slot.script_name == script_name
                and item.candidate.slot.session_no == session_no
                and item.candidate.slot.slot_id == slot_id
            ]
        if not matches:
            return None
        best = max(matches, key=lambda i: (i.candidate.seed, i.candidate.id))
        return best.current_text
