import sys
from pathlib import Path

import pytest
from hypothesis import settings

settings.register_profile("suite", deadline=None, max_examples=100)
settings.load_profile("suite")

REPO_ROOT = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(REPO_ROOT / "scripts"))

from approve_all import approve_everything as _approve_everything  # noqa: E402
from make_demo_cohort import build_cohort  # noqa: E402

from dialogue_forge.genpipe import Candidate  # noqa: E402
from dialogue_forge.moderation import ScoredCandidate  # noqa: E402
from dialogue_forge.script_core import (  # noqa: E402
    CompiledScript,
    CrowdStrategy,
    SlotKind,
    SlotRef,
    compile_text,
)
from dialogue_forge.validator import RubricScore, Verdict, Violation  # noqa: E402


@pytest.fixture
def dialogues_dir() -> Path:
    return REPO_ROOT / "dialogues"


@pytest.fixture
def reference_scripts(dialogues_dir) -> list[CompiledScript]:
    return [compile_text(p.read_text(encoding="utf-8")) for p in sorted(dialogues_dir.glob("*.dlg"))]


@pytest.fixture
def cohort_factory():
    """n children c000..c(n-1) reading books b000..b(n-1), one each."""
    return build_cohort


@pytest.fixture
def approve_everything():
    return _approve_everything


def make_synthetic_scripts(n_sessions: int = 4, slots_per: int = 3) -> list[CompiledScript]:
    kinds = [k.value for k in SlotKind]
    strategies = [s.value for s in CrowdStrategy]
    scripts = []
    for session in range(1, n_sessions + 1):
        lines = [f'script "synthetic_{session}" session={session}', 'say "Hello {profile.name}!"']
        for k in range(slots_per):
            kind = kinds[(session + k) % len(kinds)]
            strategy = strategies[(2 * session + k) % len(strategies)]
            lines.append(f'slot {kind} id=slot_{k} strategy={strategy} objective="objective {k} of session {session}"')
        lines.append("end")
        scripts.append(compile_text("\n".join(lines)))
    return scripts


@pytest.fixture
def synthetic_scripts():
    return make_synthetic_scripts


def make_scored(
    item_id: str = "item-0001",
    text: str = "Do you like the story?",
    rubric: tuple = (4, 4, 4, 4, 5, 4),
    violations: tuple = (),
    auto: bool | None = None,
    created_at: str = "2025-01-01T00:00:00Z",
    child_id: str = "c000",
    book_id: str = "b000",
    seed: int = 1,
    slot_id: str = "slot_0",
    script_name: str = "synthetic_1",
    session_no: int = 1,
    kind: SlotKind = SlotKind.QUESTION,
) -> ScoredCandidate:
    """A scored candidate with a verdict consistent with its rubric unless
    the caller forces one with auto=."""
    slot = SlotRef(
        script_name=script_name,
        session_no=session_no,
        slot_id=slot_id,
        kind=kind,
        strategy=CrowdStrategy.WH,
        objective="test objective",
    )
    candidate = Candidate(
        id=item_id,
        slot=slot,
        child_id=child_id,
        book_id=book_id,
        text=text,
        seed=seed,
        created_at=created_at,
    )
    score = RubricScore(*rubric)
    if auto is None:
        auto = score.overall >= 4.0 and score.min_criterion() >= 3 and not violations
    if auto:
        verdict = Verdict.auto_pass()
    else:
        reasons = [f"{v.check.value}: {v.detail}" for v in violations] or ["forced flag"]
        verdict = Verdict.flagged(reasons)
    return ScoredCandidate(
        candidate=candidate,
        rubric=score,
        violations=tuple(violations),
        verdict=verdict,
        judge_identity="mock-judge/1",
    )


@pytest.fixture
def scored_factory():
    return make_scored


@pytest.fixture
def lexicon_violation():
    def make(word: str = "slime", count: int = 1) -> Violation:
        from dialogue_forge.validator import CheckKind

        return Violation(check=CheckKind.LEXICON, detail=f"banned words: {word}", measured=count, limit=0)

    return make
