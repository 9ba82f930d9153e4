"""Cohort persistence and template interpolation.

Profiles, books and the child-to-book assignment live in newline-delimited
JSON files; cross-session memory is an append-only ``memory.ndjson`` log.
Templates may reference exactly three namespaces: ``profile``, ``book`` and
``memory``; list values join with ", ".
"""

from __future__ import annotations

import json
import threading
import warnings
from dataclasses import dataclass
from pathlib import Path
from typing import Iterator, Mapping

from .script_core import template_segments

PROFILES_FILE = "profiles.ndjson"
BOOKS_FILE = "books.ndjson"
ASSIGNMENTS_FILE = "assignments.ndjson"
MEMORY_FILE = "memory.ndjson"

# Target age band; ages outside it load with a warning, not a rejection.
AGE_BAND = (9, 11)


@dataclass(frozen=True)
class ChildProfile:
    id: str
    name: str
    age: int
    interests: tuple[str, ...] = ()
    reading_prefs: tuple[str, ...] = ()
    favorite_motifs: tuple[str, ...] = ()

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "name": self.name,
            "age": self.age,
            "interests": list(self.interests),
            "reading_prefs": list(self.reading_prefs),
            "favorite_motifs": list(self.favorite_motifs),
        }


@dataclass(frozen=True)
class BookMeta:
    id: str
    title: str
    author: str = ""
    summary: str = ""
    themes: tuple[str, ...] = ()
    age_range: tuple[int, int] = AGE_BAND

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "title": self.title,
            "author": self.author,
            "summary": self.summary,
            "themes": list(self.themes),
            "age_range": list(self.age_range),
        }


@dataclass(frozen=True)
class MemoryEntry:
    child_id: str
    session_no: int
    key: str
    value: str
    created_at: str

    def to_dict(self) -> dict:
        return {
            "child_id": self.child_id,
            "session_no": self.session_no,
            "key": self.key,
            "value": self.value,
            "created_at": self.created_at,
        }


class CohortError(ValueError):
    """Aggregated cohort-data problems; .problems lists one message each."""

    def __init__(self, problems: list[str]):
        self.problems = list(problems)
        super().__init__("; ".join(self.problems))


class CohortFilesMissingError(CohortError):
    pass


class MissingKeyError(LookupError):
    def __init__(self, namespace: str, key: str):
        self.namespace = namespace
        self.key = key
        super().__init__(f"no value for placeholder '{{{namespace}.{key}}}'")


class DuplicateMemoryKeyError(ValueError):
    pass


@dataclass(frozen=True)
class Cohort:
    profiles: tuple[ChildProfile, ...]
    books: tuple[BookMeta, ...]
    assignment: dict[str, str]  # child id -> book id, injective

    def profile(self, child_id: str) -> ChildProfile:
        for p in self.profiles:
            if p.id == child_id:
                return p
        raise KeyError(f"unknown child '{child_id}'")

    def book(self, book_id: str) -> BookMeta:
        for b in self.books:
            if b.id == book_id:
                return b
        raise KeyError(f"unknown book '{book_id}'")

    def assigned_book(self, child_id: str) -> BookMeta:
        if child_id not in self.assignment:
            raise KeyError(f"child '{child_id}' has no assigned book")
        return self.book(self.assignment[child_id])


def _read_ndjson(path: Path, problems: list[str]) -> Iterator[tuple[int, dict]]:
    with path.open(encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                row = json.loads(line)
            except json.JSONDecodeError as exc:
                problems.append(f"{path.name}:{lineno}: malformed JSON ({exc.msg})")
                continue
            if not isinstance(row, dict):
                problems.append(f"{path.name}:{lineno}: record must be a JSON object")
                continue
            yield lineno, row


def _str_tuple(row: dict, field: str) -> tuple[str, ...]:
    value = row.get(field, [])
    if not isinstance(value, list) or not all(isinstance(v, str) for v in value):
        raise ValueError(f"{field} must be a list of strings")
    return tuple(value)


def _profile_from_row(row: dict) -> ChildProfile:
    pid = row.get("id")
    name = row.get("name")
    age = row.get("age")
    if not isinstance(pid, str) or not pid:
        raise ValueError("id must be a non-empty string")
    if not isinstance(name, str) or not name:
        raise ValueError("name must be a non-empty string")
    if not isinstance(age, int) or isinstance(age, bool):
        raise ValueError("age must be an integer")
    profile = ChildProfile(
        id=pid,
        name=name,
        age=age,
        interests=_str_tuple(row, "interests"),
        reading_prefs=_str_tuple(row, "reading_prefs"),
        favorite_motifs=_str_tuple(row, "favorite_motifs"),
    )
    if not AGE_BAND[0] <= age <= AGE_BAND[1]:
        warnings.warn(
            f"profile '{pid}': age {age} outside the {AGE_BAND[0]}-{AGE_BAND[1]} target band",
            stacklevel=3,
        )
    return profile


def _book_from_row(row: dict) -> BookMeta:
    bid = row.get("id")
    title = row.get("title")
    if not isinstance(bid, str) or not bid:
        raise ValueError("id must be a non-empty string")
    if not isinstance(title, str) or not title:
        raise ValueError("title must be a non-empty string")
    summary = row.get("summary", "")
    if not isinstance(summary, str):
        raise ValueError("summary must be a string")
    if len(summary) > 2000:
        raise ValueError(f"summary is {len(summary)} chars; limit is 2000")
    author = row.get("author", "")
    if not isinstance(author, str):
        raise ValueError("author must be a string")
    age_range = row.get("age_range", list(AGE_BAND))
    if (
        not isinstance(age_range, list)
        or len(age_range) != 2
        or not all(isinstance(v, int) and not isinstance(v, bool) for v in age_range)
    ):
        raise ValueError("age_range must be [min, max] integers")
    return BookMeta(
        id=bid,
        title=title,
        author=author,
        summary=summary,
        themes=_str_tuple(row, "themes"),
        age_range=(age_range[0], age_range[1]),
    )


def load_cohort(path: Path | str) -> Cohort:
    """Load profiles, books and the assignment from a cohort directory.

    Raises CohortError aggregating every problem (line numbers included);
    a missing file raises CohortFilesMissingError naming each absent file.
    """
    root = Path(path)
    missing = [fn for fn in (PROFILES_FILE, BOOKS_FILE, ASSIGNMENTS_FILE) if not (root / fn).exists()]
    if missing:
        raise CohortFilesMissingError([f"missing file: {root / fn}" for fn in missing])

    problems: list[str] = []
    profiles: list[ChildProfile] = []
    seen_profiles: set[str] = set()
    for lineno, row in _read_ndjson(root / PROFILES_FILE, problems):
        try:
            profile = _profile_from_row(row)
        except ValueError as exc:
            problems.append(f"{PROFILES_FILE}:{lineno}: {exc}")
            continue
        if profile.id in seen_profiles:
            problems.append(f"{PROFILES_FILE}:{lineno}: duplicate id '{profile.id}'")
            continue
        seen_profiles.add(profile.id)
        profiles.append(profile)

    books: list[BookMeta] = []
    seen_books: set[str] = set()
    for lineno, row in _read_ndjson(root / BOOKS_FILE, problems):
        try:
            book = _book_from_row(row)
        except ValueError as exc:
            problems.append(f"{BOOKS_FILE}:{lineno}: {exc}")
            continue
        if book.id in seen_books:
            problems.append(f"{BOOKS_FILE}:{lineno}: duplicate id '{book.id}'")
            continue
        seen_books.add(book.id)
        books.append(book)

    assignment: dict[str, str] = {}
    used_books: dict[str, str] = {}
    for lineno, row in _read_ndjson(root / ASSIGNMENTS_FILE, problems):
        child_id = row.get("child_id")
        book_id = row.get("book_id")
        if not isinstance(child_id, str) or not isinstance(book_id, str):
            problems.append(f"{ASSIGNMENTS_FILE}:{lineno}: needs string child_id and book_id")
            continue
        if child_id not in seen_profiles:
            problems.append(f"{ASSIGNMENTS_FILE}:{lineno}: unknown child '{child_id}'")
            continue
        if book_id not in seen_books:
            problems.append(f"{ASSIGNMENTS_FILE}:{lineno}: unknown book '{book_id}'")
            continue
        if child_id in assignment:
            problems.append(f"{ASSIGNMENTS_FILE}:{lineno}: child '{child_id}' assigned twice")
            continue
        if book_id in used_books:
            problems.append(
                f"{ASSIGNMENTS_FILE}:{lineno}: book '{book_id}' assigned to both "
                f"'{used_books[book_id]}' and '{child_id}' (assignment must be injective)"
            )
            continue
        assignment[child_id] = book_id
        used_books[book_id] = child_id

    for profile in profiles:
        if profile.id not in assignment:
            problems.append(f"{ASSIGNMENTS_FILE}: child '{profile.id}' has no assigned book")

    if problems:
        raise CohortError(problems)
    return Cohort(profiles=tuple(profiles), books=tuple(books), assignment=assignment)


def _dump_line(record: dict) -> str:
    return json.dumps(record, sort_keys=True, ensure_ascii=False) + "\n"


def save_cohort(path: Path | str, cohort: Cohort) -> None:
    root = Path(path)
    root.mkdir(parents=True, exist_ok=True)
    with (root / PROFILES_FILE).open("w", encoding="utf-8") as fh:
        for profile in cohort.profiles:
            fh.write(_dump_line(profile.to_dict()))
    with (root / BOOKS_FILE).open("w", encoding="utf-8") as fh:
        for book in cohort.books:
            fh.write(_dump_line(book.to_dict()))
    with (root / ASSIGNMENTS_FILE).open("w", encoding="utf-8") as fh:
        for child_id, book_id in cohort.assignment.items():
            fh.write(_dump_line({"child_id": child_id, "book_id": book_id}))


class CohortStore:
    """Cohort data plus the append-only memory log for one data directory.

    Single writer; readers get snapshot dicts and never see partial appends.
    """

    def __init__(self, cohort: Cohort, entries: list[MemoryEntry] | None = None, root: Path | None = None):
        self._cohort = cohort
        self._root = root
        self._entries: list[MemoryEntry] = []
        self._index: dict[tuple[str, int, str], MemoryEntry] = {}
        self._lock = threading.Lock()
        for entry in entries or []:
            self._remember(entry)

    @classmethod
    def open(cls, path: Path | str) -> "CohortStore":
        root = Path(path)
        cohort = load_cohort(root)
        entries: list[MemoryEntry] = []
        memory_path = root / MEMORY_FILE
        if memory_path.exists():
            problems: list[str] = []
            for lineno, row in _read_ndjson(memory_path, problems):
                try:
                    entries.append(
                        MemoryEntry(
                            child_id=row["child_id"],
                            session_no=int(row["session_no"]),
                            key=row["key"],
                            value=row["value"],
                            created_at=row.get("created_at", ""),
                        )
                    )
                except (KeyError, TypeError, ValueError):
                    problems.append(f"{MEMORY_FILE}:{lineno}: malformed memory entry")
            if problems:
                raise CohortError(problems)
        store = cls(cohort, root=root)
        for entry in entries:
            store._remember(entry)
        return store

    @classmethod
    def in_memory(cls, cohort: Cohort) -> "CohortStore":
        return cls(cohort)

    @property
    def cohort(self) -> Cohort:
        return self._cohort

    def _remember(self, entry: MemoryEntry) -> None:
        triple = (entry.child_id, entry.session_no, entry.key)
        if triple in self._index:
            raise DuplicateMemoryKeyError(
                f"memory for child '{entry.child_id}' session {entry.session_no} key '{entry.key}' already recorded"
            )
        if not entry.key:
            raise ValueError("memory key must be non-empty")
        self._index[triple] = entry
        self._entries.append(entry)

    def append_memory(self, entry: MemoryEntry) -> None:
        """Record one memory entry; duplicates of (child, session, key) are errors."""
        with self._lock:
            self._remember(entry)
            if self._root is not None:
                with (self._root / MEMORY_FILE).open("a", encoding="utf-8") as fh:
                    fh.write(_dump_line(entry.to_dict()))
                    fh.flush()

    def memory_entries(self) -> tuple[MemoryEntry, ...]:
        with self._lock:
            return tuple(self._entries)

    def memory_view(self, child_id: str, upto_session: int | None = None) -> dict[str, str]:
        """Snapshot key -> value for one child; later sessions win on key clashes."""
        with self._lock:
            picked = [
                e
                for e in self._entries
                if e.child_id == child_id and (upto_session is None or e.session_no <= upto_session)
            ]
        view: dict[str, str] = {}
        for entry in sorted(picked, key=lambda e: e.session_no):
            view[entry.key] = entry.value
        return view


_PROFILE_FIELDS = ("id", "name", "age", "interests", "reading_prefs", "favorite_motifs")
_BOOK_FIELDS = ("id", "title", "author", "summary", "themes", "age_range")


def _render(value: object) -> str:
    if isinstance(value, tuple):
        return ", ".join(str(v) for v in value)
    return str(value)


def interpolate(template: str, profile: ChildProfile, book: BookMeta, memory: Mapping[str, str]) -> str:
    """Fill {profile.*}, {book.*} and {memory.*} placeholders.

    Raises MissingKeyError when a placeholder has no value and ValueError for
    malformed templates or unknown namespaces (via template parsing).
    """
    parts: list[str] = []
    for segment in template_segments(template):
        if isinstance(segment, str):
            parts.append(segment)
            continue
        namespace, key = segment
        if namespace == "profile":
            if key not in _PROFILE_FIELDS:
                raise MissingKeyError(namespace, key)
            parts.append(_render(getattr(profile, key)))
        elif namespace == "book":
            if key not in _BOOK_FIELDS:
                raise MissingKeyError(namespace, key)
            if key == "age_range":
                parts.append(f"{book.age_range[0]}-{book.age_range[1]}")
            else:
                parts.append(_render(getattr(book, key)))
        else:  # memory
            if key not in memory:
                raise MissingKeyError(namespace, key)
            parts.append(memory[key])
    return "".join(parts)
