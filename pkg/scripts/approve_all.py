"""Bulk-approve everything in a moderation store.

Demo helper only: glances every auto-passed item and approves every flagged
one so a full session can run immediately. Real deployments review the
priority queue by hand; that is the point of the workflow.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from dialogue_forge.moderation import Action, Decision, ModerationStore, Status
from dialogue_forge.pipeline import DECISIONS_FILE
from dialogue_forge.timeutil import utc_now


def approve_everything(store: ModerationStore, moderator: str = "bulk-approve") -> dict:
    counts = {"glanced": 0, "approved": 0}
    for item in store.items():
        if item.status is Status.AUTO_PASSED:
            store.apply_decision(item.id, Decision(Action.GLANCE, moderator, at=utc_now()), item.revision)
            counts["glanced"] += 1
        elif item.status is Status.FLAGGED:
            store.apply_decision(item.id, Decision(Action.APPROVE, moderator, at=utc_now()), item.revision)
            counts["approved"] += 1
    return counts


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description="Approve every pending item in an output directory.")
    parser.add_argument("--out", required=True, help="pipeline output directory")
    parser.add_argument("--moderator", default="bulk-approve")
    args = parser.parse_args(argv)
    log = Path(args.out) / DECISIONS_FILE
    if not log.exists():
        print(f"no decision log at {log}; run the pipeline first", file=sys.stderr)
        return 2
    store = ModerationStore(log)
    counts = approve_everything(store, args.moderator)
    print(f"glanced {counts['glanced']} auto-passed items, approved {counts['approved']} flagged items")
    return 0


if __name__ == "__main__":
    sys.exit(main())
