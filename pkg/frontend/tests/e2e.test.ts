// Moderation walkthrough against the live server booted by e2e.setup.ts.
// Every assertion goes through the HTTP API (or the static file mount);
// nothing imports the Python package. Tests run in declaration order and
// each mutating test picks its victims from a fresh queue fetch.

import { describe, expect, inject, test } from "vitest";

import { ApiClient, ApiError } from "../src/client.js";
import { outcomeBanner } from "../src/view.js";
import type { ItemSummary, QueueKind } from "../src/types.js";

const BASE = inject("e2eBase");
const client = new ApiClient(BASE);

const CRITERIA = [
  "appropriateness",
  "understandability",
  "accuracy",
  "relevance",
  "engagement",
  "reflectiveness",
];

async function freshQueue(kind: QueueKind, limit = 200): Promise<ItemSummary[]> {
  const queue = await client.queue(kind, limit);
  return queue.items;
}

describe("served console assets", () => {
  test("the root serves the built console shell", async () => {
    const page = await fetch(`${BASE}/`);
    expect(page.status).toBe(200);
    const html = await page.text();
    expect(html).toContain("Moderation console");
    expect(html).toContain("app.js");

    const script = await fetch(`${BASE}/app.js`);
    expect(script.status).toBe(200);
    expect(script.headers.get("content-type") ?? "").toContain("javascript");

    const config = await fetch(`${BASE}/config.js`);
    expect(config.status).toBe(200);
  });

  test("the API answers beside the static mount", async () => {
    expect(await client.health()).toEqual({ status: "ok" });
    const stats = await client.stats();
    // 6 demo children x 17 slots across the four reference scripts
    expect(stats.total).toBe(102);
    expect(stats.validated).toBe(102);
    expect(stats.by_status.scored).toBe(0);
    expect(stats.by_status.auto_passed + stats.by_status.flagged).toBe(102);
  });
});

describe("queue reads", () => {
  test("priority queue lists flagged items, lowest score first", async () => {
    const items = await freshQueue("priority");
    expect(items.length).toBeGreaterThan(3);
    for (const item of items) {
      expect(item.status).toBe("flagged");
      expect(item.revision).toBe(0);
    }
    for (let i = 1; i < items.length; i += 1) {
      expect(items[i]!.overall).toBeGreaterThanOrEqual(items[i - 1]!.overall);
    }
  });

  test("glance queue lists auto-passed items, newest first", async () => {
    const items = await freshQueue("glance");
    expect(items.length).toBeGreaterThan(3);
    for (const item of items) {
      expect(item.status).toBe("auto_passed");
    }
    for (let i = 1; i < items.length; i += 1) {
      expect(items[i]!.created_at <= items[i - 1]!.created_at).toBe(true);
    }
  });

  test("item detail carries rubric, checks and origin fields", async () => {
    const [first] = await freshQueue("priority", 1);
    const item = await client.item(first!.id);
    expect(Object.keys(item.rubric).sort()).toEqual([...CRITERIA].sort());
    expect(item.verdict.status).toBe("flagged");
    expect(item.violations).toHaveLength(item.violation_count);
    expect(item.slot.slot_id).not.toBe("");
    expect(item.slot.session_no).toBeGreaterThanOrEqual(1);
    expect(item.child_id).toMatch(/^c\d+/);
    expect(item.original_text).toBe(item.text);
    expect(item.regen_of).toBeNull();
    expect(item.regenerated_as).toBeNull();
    expect(item.audit).toEqual([]);
  });
});

describe("moderation round trips", () => {
  test("a moderator can approve a flagged item from the priority queue", async () => {
    const [victim] = await freshQueue("priority", 1);
    const outcome = await client.decide(victim!.id, {
      action: "approve",
      moderator: "e2e-mod",
      note: "fine as written",
      expected_revision: victim!.revision,
    });
    expect(outcome.kind).toBe("ok");
    if (outcome.kind !== "ok") return;
    expect(outcome.item.status).toBe("approved");
    expect(outcome.item.revision).toBe(1);
    expect(outcome.item.audit).toHaveLength(1);
    expect(outcome.item.audit[0]!.action).toBe("approve");
    expect(outcomeBanner(outcome).tone).toBe("ok");

    const remaining = await freshQueue("priority");
    expect(remaining.map((i) => i.id)).not.toContain(victim!.id);
  });

  test("a stale revision submit returns a conflict prompt, not an overwrite", async () => {
    const [victim] = await freshQueue("priority", 1);
    const edited = await client.decide(victim!.id, {
      action: "edit",
      moderator: "e2e-mod",
      note: "softened wording",
      new_text: "What part of the story made you smile?",
      expected_revision: 0,
    });
    expect(edited.kind).toBe("ok");

    const stale = await client.decide(victim!.id, {
      action: "approve",
      moderator: "e2e-other",
      expected_revision: 0,
    });
    expect(stale).toEqual({ kind: "conflict", expectedRevision: 0, currentRevision: 1 });
    const banner = outcomeBanner(stale);
    expect(banner.tone).toBe("warn");
    expect(banner.message).toContain("Reload");

    // the edit survived untouched by the stale submit
    const current = await client.item(victim!.id);
    expect(current.status).toBe("flagged");
    expect(current.revision).toBe(1);
    expect(current.text).toBe("What part of the story made you smile?");
    expect(current.original_text).toBe(victim!.text);

    const retried = await client.decide(victim!.id, {
      action: "approve",
      moderator: "e2e-other",
      expected_revision: 1,
    });
    expect(retried.kind).toBe("ok");
    if (retried.kind === "ok") {
      expect(retried.item.status).toBe("approved");
      expect(retried.item.revision).toBe(2);
      expect(retried.item.text).toBe("What part of the story made you smile?");
    }
  });

  test("requesting regeneration yields a linked fresh candidate", async () => {
    const [victim] = await freshQueue("priority", 1);
    const before = await client.item(victim!.id);
    const outcome = await client.decide(victim!.id, {
      action: "regen",
      moderator: "e2e-mod",
      note: "try a different angle",
      expected_revision: 0,
    });
    expect(outcome.kind).toBe("ok");
    if (outcome.kind !== "ok") return;
    expect(outcome.item.status).toBe("regen_requested");
    // serve ran with --cohort, so the regeneration order is fulfilled
    // before the response comes back
    expect(outcome.item.regenerated_as).not.toBeNull();

    const successor = await client.item(outcome.item.regenerated_as!);
    expect(successor.regen_of).toBe(victim!.id);
    expect(successor.seed).toBe(before.seed + 1);
    expect(successor.child_id).toBe(before.child_id);
    expect(successor.slot).toEqual(before.slot);
    expect(["auto_passed", "flagged"]).toContain(successor.status);

    const stats = await client.stats();
    expect(stats.total).toBe(103);
    expect(stats.by_status.regen_requested).toBe(1);
  });

  test("a glance confirms an auto-passed item into approved", async () => {
    const [victim] = await freshQueue("glance", 1);
    const outcome = await client.decide(victim!.id, {
      action: "glance",
      moderator: "e2e-mod",
      expected_revision: 0,
    });
    expect(outcome.kind).toBe("ok");
    if (outcome.kind === "ok") {
      expect(outcome.item.status).toBe("approved");
      expect(outcome.item.audit[0]!.action).toBe("glance");
    }
    const remaining = await freshQueue("glance");
    expect(remaining.map((i) => i.id)).not.toContain(victim!.id);
  });

  test("illegal moves come back as refusals and change nothing", async () => {
    const [victim] = await freshQueue("glance", 1);
    const outcome = await client.decide(victim!.id, {
      action: "edit",
      moderator: "e2e-mod",
      new_text: "should never land",
      expected_revision: 0,
    });
    expect(outcome.kind).toBe("refused");
    if (outcome.kind === "refused") {
      expect(outcome.message).toContain("not allowed");
    }
    const current = await client.item(victim!.id);
    expect(current.status).toBe("auto_passed");
    expect(current.revision).toBe(0);
    expect(current.text).toBe(victim!.text);
  });

  test("unknown items are reported missing", async () => {
    const outcome = await client.decide("0123456789abcdef", {
      action: "approve",
      moderator: "e2e-mod",
      expected_revision: 0,
    });
    expect(outcome.kind).toBe("missing");

    const failure = await client.item("0123456789abcdef").catch((error: unknown) => error);
    expect(failure).toBeInstanceOf(ApiError);
    expect((failure as ApiError).status).toBe(404);
  });
});
