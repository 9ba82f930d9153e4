"""Dialogue-script DSL: parse, compile, and pretty-print session scaffolds.

A ``.dlg`` file holds one script: a line-oriented sequence of directives
(one per line, ``#`` starts a comment) fixing the conversational backbone of
a single session. Typed ``slot`` directives mark the only positions whose
text is supplied later, from generated content that has passed review.
The grammar is documented in docs/grammar.md.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from enum import Enum
from typing import Union


class SlotKind(str, Enum):
    QUESTION = "question"
    FOLLOW_UP_QUESTION = "follow_up_question"
    OPINION_OBSERVATION = "opinion_observation"
    HUMOR = "humor"
    PREGEN_RESPONSE = "pregen_response"


class CrowdStrategy(str, Enum):
    COMPLETION = "completion"
    RECALL = "recall"
    OPEN_ENDED = "open_ended"
    WH = "wh"
    DISTANCING = "distancing"


class PeerPhase(str, Enum):
    PROMPT = "prompt"
    EVALUATE = "evaluate"
    EXPAND = "expand"
    REPEAT = "repeat"


class ResponseClass(str, Enum):
    POSITIVE = "positive"
    NEGATIVE = "negative"
    NEUTRAL = "neutral"
    UNKNOWN = "unknown"


@dataclass(frozen=True)
class Say:
    text: str


@dataclass(frozen=True)
class Slot:
    id: str
    kind: SlotKind
    strategy: CrowdStrategy
    objective: str
    peer_phase: PeerPhase | None = None


@dataclass(frozen=True)
class Ask:
    memory_key: str
    classify: bool = False


@dataclass(frozen=True)
class BranchArm:
    response: ResponseClass | None  # None is the wildcard arm
    target: str


@dataclass(frozen=True)
class Branch:
    arms: tuple[BranchArm, ...]


@dataclass(frozen=True)
class Recall:
    memory_key: str


@dataclass(frozen=True)
class Label:
    name: str


@dataclass(frozen=True)
class Goto:
    label: str


@dataclass(frozen=True)
class End:
    pass


Block = Union[Say, Slot, Ask, Branch, Recall, Label, Goto, End]


@dataclass(frozen=True)
class Script:
    name: str
    session_no: int
    blocks: tuple[Block, ...]


@dataclass(frozen=True)
class SlotRef:
    """Stable address of one slot within one script session."""

    script_name: str
    session_no: int
    slot_id: str
    kind: SlotKind
    strategy: CrowdStrategy
    objective: str

    def to_dict(self) -> dict:
        return {
            "script_name": self.script_name,
            "session_no": self.session_no,
            "slot_id": self.slot_id,
            "kind": self.kind.value,
            "strategy": self.strategy.value,
            "objective": self.objective,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "SlotRef":
        return cls(
            script_name=data["script_name"],
            session_no=int(data["session_no"]),
            slot_id=data["slot_id"],
            kind=SlotKind(data["kind"]),
            strategy=CrowdStrategy(data["strategy"]),
            objective=data["objective"],
        )


@dataclass(frozen=True)
class CompiledScript:
    script: Script
    label_table: dict[str, int]
    slot_manifest: tuple[SlotRef, ...]


@dataclass(frozen=True)
class ParseError:
    line: int
    message: str


@dataclass(frozen=True)
class CompileError:
    kind: str
    message: str


class ScriptSyntaxError(ValueError):
    def __init__(self, errors: list[ParseError]):
        self.errors = list(errors)
        super().__init__("; ".join(f"line {e.line}: {e.message}" for e in self.errors))


class ScriptCompileError(ValueError):
    def __init__(self, errors: list[CompileError]):
        self.errors = list(errors)
        super().__init__("; ".join(f"{e.kind}: {e.message}" for e in self.errors))


TEMPLATE_NAMESPACES = ("profile", "book", "memory")

_PLACEHOLDER_RE = re.compile(r"([a-z]+)\.([A-Za-z_][A-Za-z0-9_]*)")
_IDENT_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")

TemplateSegment = Union[str, tuple[str, str]]


def template_segments(text: str) -> list[TemplateSegment]:
    """Split a template into literal strings and (namespace, key) pairs.

    Raises ValueError for stray braces, malformed placeholders, or a
    namespace outside profile/book/memory. Braces are reserved characters;
    there is no escape for a literal brace.
    """
    segments: list[TemplateSegment] = []
    i = 0
    while i < len(text):
        open_idx = text.find("{", i)
        close_idx = text.find("}", i)
        if open_idx == -1 and close_idx == -1:
            segments.append(text[i:])
            break
        if close_idx != -1 and (open_idx == -1 or close_idx < open_idx):
            raise ValueError("unmatched '}' in template")
        if open_idx > i:
            segments.append(text[i:open_idx])
        end = text.find("}", open_idx + 1)
        if end == -1:
            raise ValueError("unterminated placeholder in template")
        inner = text[open_idx + 1 : end]
        if "{" in inner:
            raise ValueError("nested '{' in placeholder")
        match = _PLACEHOLDER_RE.fullmatch(inner)
        if not match:
            raise ValueError(f"malformed placeholder '{{{inner}}}'")
        namespace = match.group(1)
        if namespace not in TEMPLATE_NAMESPACES:
            raise ValueError(f"unknown template namespace '{namespace}'")
        segments.append((namespace, match.group(2)))
        i = end + 1
    return segments


# --- line tokenizer -------------------------------------------------------

_ESCAPES = {'"': '"', "\\": "\\", "n": "\n", "t": "\t", "r": "\r"}
_UNESCAPES = {"\n": "\\n", "\t": "\\t", "\r": "\\r", '"': '\\"', "\\": "\\\\"}


@dataclass(frozen=True)
class _Token:
    kind: str  # "word" | "string"
    value: str


def _tokenize(line: str) -> list[_Token]:
    tokens: list[_Token] = []
    i = 0
    n = len(line)
    while i < n:
        ch = line[i]
        if ch in " \t":
            i += 1
            continue
        if ch == "#":
            break
        if ch == '"':
            value: list[str] = []
            i += 1
            while True:
                if i >= n:
                    raise ValueError("unterminated string")
                c = line[i]
                if c == '"':
                    i += 1
                    break
                if c == "\\":
                    if i + 1 >= n:
                        raise ValueError("unterminated string")
                    esc = line[i + 1]
                    if esc not in _ESCAPES:
                        raise ValueError(f"invalid escape '\\{esc}'")
                    value.append(_ESCAPES[esc])
                    i += 2
                    continue
                value.append(c)
                i += 1
            tokens.append(_Token("string", "".join(value)))
            continue
        j = i
        while j < n and line[j] not in ' \t"#':
            j += 1
        tokens.append(_Token("word", line[i:j]))
        i = j
    return tokens


@dataclass(frozen=True)
class _Attr:
    key: str
    value: str


def _split_parts(tokens: list[_Token]) -> tuple[list[_Token], list[_Attr]]:
    """Separate positional tokens from key=value attributes (order kept)."""
    positional: list[_Token] = []
    attrs: list[_Attr] = []
    i = 0
    while i < len(tokens):
        tok = tokens[i]
        if tok.kind == "word" and "=" in tok.value:
            key, _, val = tok.value.partition("=")
            if not key:
                raise ValueError("attribute is missing a key before '='")
            if val == "" and i + 1 < len(tokens) and tokens[i + 1].kind == "string":
                attrs.append(_Attr(key, tokens[i + 1].value))
                i += 2
                continue
            if val == "":
                raise ValueError(f"attribute '{key}' is missing a value")
            attrs.append(_Attr(key, val))
            i += 1
            continue
        positional.append(tok)
        i += 1
    return positional, attrs


def _attr_map(attrs: list[_Attr], directive: str, allowed: tuple[str, ...]) -> dict[str, str]:
    out: dict[str, str] = {}
    for attr in attrs:
        if attr.key not in allowed:
            raise ValueError(f"unknown attribute '{attr.key}' for '{directive}'")
        if attr.key in out:
            raise ValueError(f"duplicate attribute '{attr.key}'")
        out[attr.key] = attr.value
    return out


def _require_ident(value: str, what: str) -> str:
    if not _IDENT_RE.fullmatch(value):
        raise ValueError(f"{what} '{value}' is not a valid identifier")
    return value


def _parse_say(positional: list[_Token], attrs: list[_Attr]) -> Say:
    if attrs or len(positional) != 1 or positional[0].kind != "string":
        raise ValueError("'say' takes exactly one quoted string")
    template_segments(positional[0].value)
    return Say(positional[0].value)


def _parse_slot(positional: list[_Token], attrs: list[_Attr]) -> Slot:
    if len(positional) != 1 or positional[0].kind != "word":
        raise ValueError("'slot' needs a kind, e.g. 'slot question id=... strategy=... objective=...'")
    kind_name = positional[0].value
    try:
        kind = SlotKind(kind_name)
    except ValueError:
        raise ValueError(f"unknown slot kind '{kind_name}'") from None
    amap = _attr_map(attrs, "slot", ("id", "strategy", "peer", "objective"))
    for required in ("id", "strategy", "objective"):
        if required not in amap:
            raise ValueError(f"slot requires '{required}='")
    slot_id = _require_ident(amap["id"], "slot id")
    try:
        strategy = CrowdStrategy(amap["strategy"])
    except ValueError:
        raise ValueError(f"unknown strategy '{amap['strategy']}'") from None
    peer = None
    if "peer" in amap:
        try:
            peer = PeerPhase(amap["peer"])
        except ValueError:
            raise ValueError(f"unknown peer phase '{amap['peer']}'") from None
    return Slot(id=slot_id, kind=kind, strategy=strategy, objective=amap["objective"], peer_phase=peer)


def _parse_ask(positional: list[_Token], attrs: list[_Attr]) -> Ask:
    if len(positional) != 1 or positional[0].kind != "word":
        raise ValueError("'ask' takes exactly one memory key")
    key = _require_ident(positional[0].value, "memory key")
    amap = _attr_map(attrs, "ask", ("classify",))
    classify = False
    if "classify" in amap:
        if amap["classify"] not in ("true", "false"):
            raise ValueError("classify must be 'true' or 'false'")
        classify = amap["classify"] == "true"
    return Ask(memory_key=key, classify=classify)


def _parse_branch(positional: list[_Token], attrs: list[_Attr]) -> Branch:
    if positional:
        raise ValueError("'branch' takes only class=label arms")
    if not attrs:
        raise ValueError("'branch' needs at least one arm")
    arms: list[BranchArm] = []
    for attr in attrs:
        if attr.key == "*":
            response = None
        else:
            try:
                response = ResponseClass(attr.key)
            except ValueError:
                raise ValueError(f"unknown branch arm '{attr.key}'") from None
        arms.append(BranchArm(response, _require_ident(attr.value, "branch target")))
    return Branch(tuple(arms))


def _parse_single_ident(directive: str, positional: list[_Token], attrs: list[_Attr]) -> str:
    if attrs or len(positional) != 1 or positional[0].kind != "word":
        raise ValueError(f"'{directive}' takes exactly one identifier")
    return _require_ident(positional[0].value, f"{directive} argument")


def parse_script(text: str) -> Script:
    """Parse one script file. Raises ScriptSyntaxError with per-line errors."""
    errors: list[ParseError] = []
    header: tuple[str, int] | None = None
    saw_directive_before_header = False
    blocks: list[Block] = []
    for lineno, raw in enumerate(text.split("\n"), start=1):
        line = raw.rstrip("\r")
        try:
            tokens = _tokenize(line)
        except ValueError as exc:
            errors.append(ParseError(lineno, str(exc)))
            continue
        if not tokens:
            continue
        head = tokens[0]
        if head.kind != "word":
            errors.append(ParseError(lineno, "expected a directive, found a string"))
            continue
        try:
            positional, attrs = _split_parts(tokens[1:])
            if head.value == "script":
                if header is not None:
                    raise ValueError("duplicate 'script' header")
                if len(positional) != 1 or positional[0].kind != "string":
                    raise ValueError("'script' takes exactly one quoted name")
                amap = _attr_map(attrs, "script", ("session",))
                if "session" not in amap:
                    raise ValueError("'script' requires session=N")
                if not amap["session"].isdigit() or int(amap["session"]) < 1:
                    raise ValueError("session must be an integer >= 1")
                if not positional[0].value:
                    raise ValueError("script name must be non-empty")
                header = (positional[0].value, int(amap["session"]))
                continue
            if header is None and not saw_directive_before_header:
                saw_directive_before_header = True
                errors.append(ParseError(lineno, "first directive must be 'script'"))
            if head.value == "say":
                blocks.append(_parse_say(positional, attrs))
            elif head.value == "slot":
                blocks.append(_parse_slot(positional, attrs))
            elif head.value == "ask":
                blocks.append(_parse_ask(positional, attrs))
            elif head.value == "branch":
                blocks.append(_parse_branch(positional, attrs))
            elif head.value == "recall":
                blocks.append(Recall(_parse_single_ident("recall", positional, attrs)))
            elif head.value == "label":
                blocks.append(Label(_parse_single_ident("label", positional, attrs)))
            elif head.value == "goto":
                blocks.append(Goto(_parse_single_ident("goto", positional, attrs)))
            elif head.value == "end":
                if positional or attrs:
                    raise ValueError("'end' takes no arguments")
                blocks.append(End())
            else:
                raise ValueError(f"unknown directive '{head.value}'")
        except ValueError as exc:
            errors.append(ParseError(lineno, str(exc)))
    if header is None:
        errors.append(ParseError(0, "missing 'script' header"))
    elif not blocks:
        errors.append(ParseError(0, "script has no blocks"))
    if errors:
        raise ScriptSyntaxError(errors)
    assert header is not None
    return Script(name=header[0], session_no=header[1], blocks=tuple(blocks))


def _quote(value: str) -> str:
    return '"' + "".join(_UNESCAPES.get(ch, ch) for ch in value) + '"'


def pretty_print(script: Script) -> str:
    """Canonical text form; parse_script(pretty_print(s)) == s."""
    lines = [f"script {_quote(script.name)} session={script.session_no}"]
    for block in script.blocks:
        if isinstance(block, Say):
            lines.append(f"say {_quote(block.text)}")
        elif isinstance(block, Slot):
            parts = [f"slot {block.kind.value}", f"id={block.id}", f"strategy={block.strategy.value}"]
            if block.peer_phase is not None:
                parts.append(f"peer={block.peer_phase.value}")
            parts.append(f"objective={_quote(block.objective)}")
            lines.append(" ".join(parts))
        elif isinstance(block, Ask):
            suffix = " classify=true" if block.classify else ""
            lines.append(f"ask {block.memory_key}{suffix}")
        elif isinstance(block, Branch):
            arms = " ".join(
                f"{arm.response.value if arm.response is not None else '*'}={arm.target}"
                for arm in block.arms
            )
            lines.append(f"branch {arms}")
        elif isinstance(block, Recall):
            lines.append(f"recall {block.memory_key}")
        elif isinstance(block, Label):
            lines.append(f"label {block.name}")
        elif isinstance(block, Goto):
            lines.append(f"goto {block.label}")
        elif isinstance(block, End):
            lines.append("end")
        else:  # pragma: no cover - closed union
            raise TypeError(f"unknown block type {type(block)!r}")
    return "\n".join(lines) + "\n"


# --- compilation ----------------------------------------------------------


def build_label_table(script: Script) -> dict[str, int]:
    """Label name -> block index; on duplicates the first definition wins."""
    table: dict[str, int] = {}
    for idx, block in enumerate(script.blocks):
        if isinstance(block, Label) and block.name not in table:
            table[block.name] = idx
    return table


def block_successors(script: Script, label_table: dict[str, int], idx: int) -> list[int]:
    """Control-flow successors of one block; unresolved labels yield no edge."""
    block = script.blocks[idx]
    if isinstance(block, End):
        return []
    if isinstance(block, Goto):
        return [label_table[block.label]] if block.label in label_table else []
    if isinstance(block, Branch):
        return [label_table[arm.target] for arm in block.arms if arm.target in label_table]
    nxt = idx + 1
    return [nxt] if nxt < len(script.blocks) else []


def reachable_blocks(script: Script, label_table: dict[str, int] | None = None) -> set[int]:
    """Indices reachable from block 0 by breadth-first traversal."""
    if not script.blocks:
        return set()
    if label_table is None:
        label_table = build_label_table(script)
    seen = {0}
    frontier = [0]
    while frontier:
        nxt: list[int] = []
        for idx in frontier:
            for succ in block_successors(script, label_table, idx):
                if succ not in seen:
                    seen.add(succ)
                    nxt.append(succ)
        frontier = nxt
    return seen


def _describe(block: Block) -> str:
    if isinstance(block, Say):
        return f"say {block.text[:20]!r}"
    if isinstance(block, Slot):
        return f"slot {block.id}"
    if isinstance(block, Ask):
        return f"ask {block.memory_key}"
    if isinstance(block, Branch):
        return "branch"
    if isinstance(block, Recall):
        return f"recall {block.memory_key}"
    if isinstance(block, Label):
        return f"label {block.name}"
    if isinstance(block, Goto):
        return f"goto {block.label}"
    return "end"


def compile_script(script: Script) -> CompiledScript:
    """Resolve labels, check the control graph, and extract the slot manifest.

    Raises ScriptCompileError listing every problem found.
    """
    errors: list[CompileError] = []

    label_table: dict[str, int] = {}
    for idx, block in enumerate(script.blocks):
        if isinstance(block, Label):
            if block.name in label_table:
                errors.append(CompileError("duplicate_label", f"label '{block.name}' defined more than once"))
            else:
                label_table[block.name] = idx

    seen_slots: set[str] = set()
    manifest: list[SlotRef] = []
    for block in script.blocks:
        if isinstance(block, Slot):
            if block.id in seen_slots:
                errors.append(CompileError("duplicate_slot_id", f"slot id '{block.id}' defined more than once"))
                continue
            seen_slots.add(block.id)
            manifest.append(
                SlotRef(
                    script_name=script.name,
                    session_no=script.session_no,
                    slot_id=block.id,
                    kind=block.kind,
                    strategy=block.strategy,
                    objective=block.objective,
                )
            )

    for idx, block in enumerate(script.blocks):
        targets: list[str] = []
        if isinstance(block, Goto):
            targets = [block.label]
        elif isinstance(block, Branch):
            targets = [arm.target for arm in block.arms]
            wildcards = [arm for arm in block.arms if arm.response is None]
            if not wildcards:
                errors.append(CompileError("missing_wildcard_arm", f"branch at block {idx} has no '*' arm"))
            elif len(wildcards) > 1:
                errors.append(CompileError("duplicate_arm", f"branch at block {idx} has more than one '*' arm"))
            seen_classes: set[ResponseClass] = set()
            for arm in block.arms:
                if arm.response is None:
                    continue
                if arm.response in seen_classes:
                    errors.append(
                        CompileError("duplicate_arm", f"branch at block {idx} repeats arm '{arm.response.value}'")
                    )
                seen_classes.add(arm.response)
        for target in targets:
            if target not in label_table:
                errors.append(CompileError("undefined_label", f"block {idx}: undefined label '{target}'"))

    if script.blocks and not isinstance(script.blocks[-1], (End, Goto, Branch)):
        errors.append(CompileError("missing_end", "control can run past the last block; finish with 'end'"))

    reachable = reachable_blocks(script, label_table)
    for idx, block in enumerate(script.blocks):
        if idx not in reachable:
            errors.append(CompileError("unreachable_block", f"block {idx} ({_describe(block)}) is unreachable"))

    if errors:
        raise ScriptCompileError(errors)
    return CompiledScript(script=script, label_table=label_table, slot_manifest=tuple(manifest))


def compile_text(text: str) -> CompiledScript:
    return compile_script(parse_script(text))
