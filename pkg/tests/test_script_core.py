"""Parsing, printing and compiling of dialogue scripts.

The round-trip property (parse(pretty_print(s)) == s) runs over both the
reference scripts and randomly built ones; reachability is checked against
an independent depth-first traversal written here in the test.
"""

import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from dialogue_forge.script_core import (
    Ask,
    Branch,
    BranchArm,
    CompileError,
    CrowdStrategy,
    End,
    Goto,
    Label,
    PeerPhase,
    Recall,
    ResponseClass,
    Say,
    Script,
    ScriptCompileError,
    ScriptSyntaxError,
    Slot,
    SlotKind,
    TEMPLATE_NAMESPACES,
    build_label_table,
    block_successors,
    compile_script,
    compile_text,
    parse_script,
    pretty_print,
    reachable_blocks,
    template_segments,
)

# --- strategies -------------------------------------------------------------

idents = st.from_regex(r"[A-Za-z_][A-Za-z0-9_]{0,8}", fullmatch=True)

# no braces (reserved), no surrogates; quotes/backslashes/newlines allowed
plain_chars = st.characters(blacklist_characters="{}", blacklist_categories=("Cs",))
plain_text = st.text(alphabet=plain_chars, max_size=30)

placeholders = st.tuples(st.sampled_from(TEMPLATE_NAMESPACES), idents).map(
    lambda pair: "{" + pair[0] + "." + pair[1] + "}"
)
template_text = st.lists(plain_text | placeholders, max_size=4).map("".join)

says = st.builds(Say, text=template_text)
slots = st.builds(
    Slot,
    id=idents,
    kind=st.sampled_from(SlotKind),
    strategy=st.sampled_from(CrowdStrategy),
    objective=plain_text,
    peer_phase=st.none() | st.sampled_from(PeerPhase),
)
asks = st.builds(Ask, memory_key=idents, classify=st.booleans())
recalls = st.builds(Recall, memory_key=idents)
labels = st.builds(Label, name=idents)
gotos = st.builds(Goto, label=idents)
arms = st.builds(BranchArm, response=st.none() | st.sampled_from(ResponseClass), target=idents)
branches = st.builds(Branch, arms=st.lists(arms, min_size=1, max_size=4).map(tuple))
blocks = says | slots | asks | recalls | labels | gotos | branches | st.just(End())

scripts = st.builds(
    Script,
    name=st.text(alphabet=plain_chars, min_size=1, max_size=20),
    session_no=st.integers(min_value=1, max_value=99),
    blocks=st.lists(blocks, min_size=1, max_size=12).map(tuple),
)


@given(scripts)
def test_round_trip_random_scripts(script):
    assert parse_script(pretty_print(script)) == script


def test_round_trip_reference_scripts(dialogues_dir):
    for path in sorted(dialogues_dir.glob("*.dlg")):
        script = parse_script(path.read_text(encoding="utf-8"))
        assert parse_script(pretty_print(script)) == script


def test_reference_scripts_compile(reference_scripts):
    assert len(reference_scripts) == 4
    for compiled in reference_scripts:
        assert compiled.slot_manifest
        assert isinstance(compiled.script.blocks[-1], End)


def test_pretty_print_canonical_forms():
    script = Script(
        name='quote " and \\ newline \n done',
        session_no=2,
        blocks=(
            Say('Hi {profile.name}\t!'),
            Slot("s1", SlotKind.HUMOR, CrowdStrategy.COMPLETION, "tell a joke"),
            Slot("s2", SlotKind.QUESTION, CrowdStrategy.WH, "ask", peer_phase=PeerPhase.PROMPT),
            Ask("answer", classify=True),
            Ask("note"),
            Branch((BranchArm(ResponseClass.POSITIVE, "a"), BranchArm(None, "b"))),
            Label("a"),
            Label("b"),
            End(),
        ),
    )
    text = pretty_print(script)
    lines = text.splitlines()
    assert lines[0] == 'script "quote \\" and \\\\ newline \\n done" session=2'
    assert lines[1] == 'say "Hi {profile.name}\\t!"'
    assert lines[2] == 'slot humor id=s1 strategy=completion objective="tell a joke"'
    assert lines[3] == 'slot question id=s2 strategy=wh peer=prompt objective="ask"'
    assert lines[4] == "ask answer classify=true"
    assert lines[5] == "ask note"  # classify omitted when false
    assert lines[6] == "branch positive=a *=b"
    assert parse_script(text) == script


# --- tokenizer and parse errors ---------------------------------------------


def _parse_errors(text):
    with pytest.raises(ScriptSyntaxError) as err:
        parse_script(text)
    return err.value.errors


def test_comments_and_blank_lines():
    script = parse_script(
        'script "x" session=1  # trailing comment\n'
        "\n"
        "# a full-line comment\n"
        'say "a#b"  # hash inside the string is literal\n'
        "end\n"
    )
    assert script.blocks == (Say("a#b"), End())


def test_crlf_lines_accepted():
    script = parse_script('script "x" session=1\r\nsay "hi"\r\nend\r\n')
    assert script.blocks == (Say("hi"), End())


def test_unterminated_string_reports_line():
    errors = _parse_errors('script "x" session=1\nsay "oops\nend\n')
    assert any(e.line == 2 and "unterminated string" in e.message for e in errors)


def test_invalid_escape():
    errors = _parse_errors('script "x" session=1\nsay "a\\qb"\nend\n')
    assert any("invalid escape" in e.message for e in errors)


def test_missing_header():
    errors = _parse_errors('say "hi"\nend\n')
    messages = [e.message for e in errors]
    assert any("first directive must be 'script'" in m for m in messages)
    assert any("missing 'script' header" in m for m in messages)


def test_duplicate_header():
    errors = _parse_errors('script "x" session=1\nscript "y" session=2\nend\n')
    assert any("duplicate 'script' header" in e.message for e in errors)


@pytest.mark.parametrize("session", ["0", "-1", "abc", "1.5"])
def test_bad_session_number(session):
    errors = _parse_errors(f'script "x" session={session}\nend\n')
    assert any("session must be an integer >= 1" in e.message for e in errors)


def test_script_without_blocks():
    errors = _parse_errors('script "x" session=1\n')
    assert any("script has no blocks" in e.message for e in errors)


@pytest.mark.parametrize(
    "line,fragment",
    [
        ("frobnicate x", "unknown directive"),
        ("say hello", "'say' takes exactly one quoted string"),
        ('say "a" "b"', "'say' takes exactly one quoted string"),
        ('say "{nope.key}"', "unknown template namespace"),
        ('say "{profile.name"', "unterminated placeholder"),
        ('say "open { brace"', "unterminated placeholder"),
        ('say "{pro file}"', "malformed placeholder"),
        ('say "stray } brace"', "unmatched '}'"),
        ("slot id=a strategy=wh objective=o", "'slot' needs a kind"),
        ("slot mystery id=a strategy=wh objective=o", "unknown slot kind 'mystery'"),
        ("slot question strategy=wh objective=o", "slot requires 'id='"),
        ("slot question id=a objective=o", "slot requires 'strategy='"),
        ("slot question id=a strategy=wh", "slot requires 'objective='"),
        ("slot question id=9x strategy=wh objective=o", "not a valid identifier"),
        ("slot question id=a strategy=sideways objective=o", "unknown strategy 'sideways'"),
        ("slot question id=a strategy=wh peer=zig objective=o", "unknown peer phase 'zig'"),
        ("slot question id=a strategy=wh color=red objective=o", "unknown attribute 'color'"),
        ("slot question id=a id=b strategy=wh objective=o", "duplicate attribute 'id'"),
        ("ask", "'ask' takes exactly one memory key"),
        ("ask key extra", "'ask' takes exactly one memory key"),
        ("ask key classify=maybe", "classify must be 'true' or 'false'"),
        ("branch", "'branch' needs at least one arm"),
        ("branch positive", "'branch' takes only class=label arms"),
        ("branch silly=a", "unknown branch arm 'silly'"),
        ("branch positive=9a", "not a valid identifier"),
        ("recall", "'recall' takes exactly one identifier"),
        ("label one two", "'label' takes exactly one identifier"),
        ("goto 1st", "not a valid identifier"),
        ("end now", "'end' takes no arguments"),
        ("ask =value", "missing a key before '='"),
        ("ask key classify=", "attribute 'classify' is missing a value"),
        ("wibble x", "unknown directive 'wibble'"),
    ],
)
def test_directive_errors(line, fragment):
    errors = _parse_errors(f'script "x" session=1\n{line}\nend\n')
    assert any(fragment in e.message for e in errors), errors


def test_errors_accumulate_with_line_numbers():
    errors = _parse_errors(
        'script "x" session=1\n'
        "say nope\n"
        'say "fine"\n'
        "frobnicate\n"
        "ask key classify=perhaps\n"
        "end\n"
    )
    assert [e.line for e in errors] == [2, 4, 5]


def test_string_first_on_line_rejected():
    errors = _parse_errors('script "x" session=1\n"hello" say\nend\n')
    assert any("expected a directive, found a string" in e.message for e in errors)


def test_objective_attr_takes_following_string():
    script = parse_script('script "x" session=1\nslot humor id=j strategy=completion objective="two words"\nend\n')
    slot = script.blocks[0]
    assert slot.objective == "two words"


# --- template segments -------------------------------------------------------


def test_template_segments_shapes():
    assert template_segments("plain") == ["plain"]
    assert template_segments("Hi {profile.name}!") == ["Hi ", ("profile", "name"), "!"]
    assert template_segments("{memory.k}{book.title}") == [("memory", "k"), ("book", "title")]


@pytest.mark.parametrize(
    "text",
    ["{oops.key}", "{profile.name", "}", "{", "{profile.{name}}", "{profile}", "{Profile.name}", "{profile.9a}"],
)
def test_template_segments_rejects(text):
    with pytest.raises(ValueError):
        template_segments(text)


# --- compile errors ----------------------------------------------------------


def _compile_kinds(text):
    with pytest.raises(ScriptCompileError) as err:
        compile_text(text)
    return [e.kind for e in err.value.errors]


def test_undefined_label():
    assert _compile_kinds('script "x" session=1\ngoto nowhere\n') == ["undefined_label"]


def test_duplicate_label():
    kinds = _compile_kinds('script "x" session=1\nlabel a\nlabel a\nend\n')
    assert kinds == ["duplicate_label"]


def test_duplicate_slot_id():
    kinds = _compile_kinds(
        'script "x" session=1\n'
        "slot question id=a strategy=wh objective=o\n"
        "slot humor id=a strategy=completion objective=o\n"
        "end\n"
    )
    assert kinds == ["duplicate_slot_id"]


def test_branch_without_wildcard():
    kinds = _compile_kinds('script "x" session=1\nbranch positive=a\nlabel a\nend\n')
    assert kinds == ["missing_wildcard_arm"]


def test_branch_duplicate_class_arm():
    kinds = _compile_kinds('script "x" session=1\nbranch positive=a positive=b *=c\nlabel a\nlabel b\nlabel c\nend\n')
    assert kinds == ["duplicate_arm"]


def test_branch_two_wildcards():
    kinds = _compile_kinds('script "x" session=1\nbranch *=a *=b\nlabel a\nlabel b\nend\n')
    assert kinds == ["duplicate_arm"]


def test_missing_end():
    assert _compile_kinds('script "x" session=1\nsay "hi"\n') == ["missing_end"]


def test_trailing_goto_is_a_valid_ending():
    compiled = compile_text('script "x" session=1\nlabel top\nsay "hi"\ngoto top\n')
    assert compiled.label_table == {"top": 0}


def test_unreachable_block():
    kinds = _compile_kinds('script "x" session=1\ngoto fin\nsay "never"\nlabel fin\nend\n')
    assert kinds == ["unreachable_block"]


def test_compile_errors_accumulate():
    kinds = _compile_kinds(
        'script "x" session=1\n'
        "label a\n"
        "label a\n"
        "goto nowhere\n"
    )
    assert set(kinds) == {"duplicate_label", "undefined_label"}


def test_slot_manifest_carries_script_coordinates():
    compiled = compile_text(
        'script "story_time" session=3\n'
        'slot question id=q1 strategy=wh objective="ask something"\n'
        "end\n"
    )
    ref = compiled.slot_manifest[0]
    assert (ref.script_name, ref.session_no, ref.slot_id) == ("story_time", 3, "q1")
    assert ref.kind is SlotKind.QUESTION
    assert ref.to_dict() == type(ref).from_dict(ref.to_dict()).to_dict()


def test_label_table_first_definition_wins():
    script = Script("x", 1, (Label("a"), Say("hi"), Label("a"), End()))
    assert build_label_table(script) == {"a": 0}


def test_block_successors_shapes():
    script = parse_script(
        'script "x" session=1\n'
        "label top\n"
        'say "hi"\n'
        "branch positive=top *=bottom\n"
        "label bottom\n"
        "end\n"
    )
    table = build_label_table(script)
    assert block_successors(script, table, 0) == [1]
    assert block_successors(script, table, 1) == [2]
    assert sorted(block_successors(script, table, 2)) == [0, 3]
    assert block_successors(script, table, 4) == []


# --- reachability against an independent traversal ---------------------------


def _oracle_reachable(script):
    table = {}
    for idx, block in enumerate(script.blocks):
        if isinstance(block, Label) and block.name not in table:
            table[block.name] = idx
    seen = set()
    stack = [0]
    while stack:
        idx = stack.pop()
        if idx in seen:
            continue
        seen.add(idx)
        block = script.blocks[idx]
        if isinstance(block, End):
            continue
        if isinstance(block, Goto):
            if block.label in table:
                stack.append(table[block.label])
            continue
        if isinstance(block, Branch):
            stack.extend(table[arm.target] for arm in block.arms if arm.target in table)
            continue
        if idx + 1 < len(script.blocks):
            stack.append(idx + 1)
    return seen


@given(scripts)
def test_reachability_matches_independent_traversal(script):
    assert reachable_blocks(script) == _oracle_reachable(script)


def test_reachability_many_random_scripts():
    rng = random.Random(97)
    for _ in range(200):
        n = rng.randint(1, 10)
        names = [f"l{i}" for i in range(4)]
        blocks = []
        for _ in range(n):
            roll = rng.random()
            if roll < 0.25:
                blocks.append(Label(rng.choice(names)))
            elif roll < 0.5:
                blocks.append(Goto(rng.choice(names)))
            elif roll < 0.65:
                blocks.append(
                    Branch(tuple(BranchArm(None, rng.choice(names)) for _ in range(rng.randint(1, 3))))
                )
            elif roll < 0.8:
                blocks.append(End())
            else:
                blocks.append(Say("hi"))
        script = Script("r", 1, tuple(blocks))
        assert reachable_blocks(script) == _oracle_reachable(script)


def test_compile_accepts_every_reference_manifest_slot_kind(reference_scripts):
    kinds = {ref.kind for compiled in reference_scripts for ref in compiled.slot_manifest}
    assert kinds == set(SlotKind)
