"""HTTP surface for the moderation workflow.

Every response carries the item revision; decision posts must echo the
revision they were looking at, and a stale value is a 409 so no moderator
silently overwrites another.
"""

from __future__ import annotations

from pathlib import Path
from typing import Callable

from fastapi import FastAPI
from fastapi.responses import JSONResponse
from pydantic import BaseModel

from .moderation import (
    Action,
    ConflictError,
    Decision,
    DecisionValidationError,
    IllegalTransitionError,
    ContentItem,
    ModerationStore,
    UnknownItemError,
)
from .timeutil import utc_now

QUEUE_KINDS = ("priority", "glance")


class DecisionRequest(BaseModel):
    action: str
    moderator: str
    note: str = ""
    new_text: str | None = None
    expected_revision: int


def item_summary(item: ContentItem) -> dict:
    return {
        "id": item.id,
        "text": item.current_text,
        "overall": item.rubric.overall,
        "min_criterion": item.rubric.min_criterion(),
        "violation_count": len(item.violations),
        "status": item.status.value,
        "revision": item.revision,
        "created_at": item.candidate.created_at,
    }


def item_detail(item: ContentItem, store: ModerationStore) -> dict:
    successor = store.successor_of(item.candidate.id)
    detail = item_summary(item)
    detail.update(
        {
            "rubric": item.rubric.to_dict(),
            "violations": [v.to_dict() for v in item.violations],
            "verdict": item.verdict.to_dict(),
            "judge": item.judge_identity,
            "child_id": item.candidate.child_id,
            "book_id": item.candidate.book_id,
            "slot": item.candidate.slot.to_dict(),
            "seed": item.candidate.seed,
            "original_text": item.candidate.text,
            "regen_of": item.regen_of,
            "regenerated_as": successor.id if successor is not None else None,
            "audit": [d.to_dict() for d in item.audit],
        }
    )
    return detail


def create_app(
    store: ModerationStore,
    regen_runner: Callable[[], list] | None = None,
    static_dir: Path | str | None = None,
) -> FastAPI:
    """App factory; regen_runner (when given) fulfils regeneration orders
    right after a regen decision so the new item is visible immediately."""
    app = FastAPI(title="dialogue-forge moderation API")

    @app.get("/api/health")
    def health() -> dict:
        return {"status": "ok"}

    @app.get("/api/stats")
    def stats() -> dict:
        return store.stats()

    @app.get("/api/queue")
    def queue(kind: str = "priority", limit: int = 50):
        if kind not in QUEUE_KINDS:
            return JSONResponse(status_code=422, content={"error": f"unknown queue kind '{kind}'"})
        if limit < 1:
            return JSONResponse(status_code=422, content={"error": "limit must be >= 1"})
        items = store.next_queue(kind, limit)
        return {"kind": kind, "items": [item_summary(i) for i in items]}

    @app.get("/api/items/{item_id}")
    def get_item(item_id: str):
        try:
            item = store.get(item_id)
        except UnknownItemError:
            return JSONResponse(status_code=404, content={"error": f"unknown item '{item_id}'"})
        return item_detail(item, store)

    @app.post("/api/items/{item_id}/decision")
    def post_decision(item_id: str, request: DecisionRequest):
        try:
            action = Action(request.action)
        except ValueError:
            return JSONResponse(status_code=422, content={"error": f"unknown action '{request.action}'"})
        decision = Decision(
            action=action,
            moderator=request.moderator,
            note=request.note,
            new_text=request.new_text,
            at=utc_now(),
        )
        try:
            item = store.apply_decision(item_id, decision, request.expected_revision)
        except UnknownItemError:
            return JSONResponse(status_code=404, content={"error": f"unknown item '{item_id}'"})
        except ConflictError as exc:
            return JSONResponse(
                status_code=409,
                content={
                    "error": "revision conflict",
                    "expected_revision": exc.expected,
                    "current_revision": exc.actual,
                },
            )
        except (IllegalTransitionError, DecisionValidationError) as exc:
            return JSONResponse(status_code=422, content={"error": str(exc)})
        if action is Action.REQUEST_REGEN and regen_runner is not None:
            regen_runner()
        return item_detail(store.get(item.id), store)

    if static_dir is not None:
        from fastapi.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=str(static_dir), html=True), name="console")

    return app
