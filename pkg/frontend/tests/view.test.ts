import { describe, expect, test } from "vitest";

import {
  escapeHtml,
  legalActions,
  outcomeBanner,
  renderDetail,
  renderQueue,
  renderStats,
  truncate,
} from "../src/view.js";
import type { ItemDetail, ItemStatus, ItemSummary, Stats } from "../src/types.js";

function summary(overrides: Partial<ItemSummary> = {}): ItemSummary {
  return {
    id: "a1b2c3d4e5f60718",
    text: "What would you ask the captain?",
    overall: 4.1666667,
    min_criterion: 4,
    violation_count: 0,
    status: "auto_passed",
    revision: 0,
    created_at: "2025-01-01T00:00:03Z",
    ...overrides,
  };
}

function detail(overrides: Partial<ItemDetail> = {}): ItemDetail {
  return {
    ...summary({ status: "flagged", overall: 2.5, min_criterion: 1, violation_count: 1 }),
    rubric: {
      appropriateness: 1,
      understandability: 3,
      accuracy: 3,
      relevance: 3,
      engagement: 2,
      reflectiveness: 3,
    },
    violations: [
      { check: "lexicon", detail: "banned words: stupid", measured: 1, limit: 0 },
    ],
    verdict: { status: "flagged", reasons: ["lexicon violation: banned words: stupid"] },
    judge: "mock-judge/1",
    child_id: "c002",
    book_id: "b001",
    slot: {
      script_name: "book_chat_2",
      session_no: 3,
      slot_id: "q2",
      kind: "question",
      strategy: "recall",
      objective: "remember the storm scene",
    },
    seed: 42,
    original_text: "What would you ask the captain?",
    regen_of: null,
    regenerated_as: null,
    audit: [],
    ...overrides,
  };
}

describe("escapeHtml and truncate", () => {
  test("escapes the five HTML-significant characters", () => {
    expect(escapeHtml(`<b>"tom" & 'jerry'</b>`)).toBe(
      "&lt;b&gt;&quot;tom&quot; &amp; &#39;jerry&#39;&lt;/b&gt;",
    );
  });

  test("leaves plain text alone", () => {
    expect(escapeHtml("Do you like the story?")).toBe("Do you like the story?");
  });

  test("truncate keeps short strings and clips long ones", () => {
    expect(truncate("short", 10)).toBe("short");
    const long = "x".repeat(100);
    expect(truncate(long, 90)).toHaveLength(90);
    expect(truncate(long, 90).endsWith("...")).toBe(true);
  });
});

describe("legalActions", () => {
  test("matches the server transition table", () => {
    const table: Record<ItemStatus, string[]> = {
      scored: [],
      auto_passed: ["glance", "approve", "reject"],
      flagged: ["approve", "edit", "reject", "regen"],
      approved: [],
      rejected: [],
      regen_requested: [],
    };
    for (const [status, actions] of Object.entries(table)) {
      expect(legalActions(status as ItemStatus)).toEqual(actions);
    }
  });
});

describe("renderStats", () => {
  test("shows totals and per-status counts", () => {
    const stats: Stats = {
      total: 102,
      validated: 102,
      by_status: {
        scored: 0,
        auto_passed: 60,
        flagged: 38,
        approved: 2,
        rejected: 1,
        regen_requested: 1,
      },
    };
    const html = renderStats(stats);
    expect(html).toContain("<b>102</b> items");
    expect(html).toContain("38 flagged");
    expect(html).toContain("60 auto-passed");
    expect(html).toContain("1 awaiting regen");
  });
});

describe("renderQueue", () => {
  test("renders an empty notice per queue kind", () => {
    expect(renderQueue("priority", [])).toContain("The priority queue is empty.");
    expect(renderQueue("glance", [])).toContain("The glance queue is empty.");
  });

  test("preserves the server ordering of rows", () => {
    const items = [
      summary({ id: "aaaaaaaaaaaaaaaa" }),
      summary({ id: "bbbbbbbbbbbbbbbb" }),
      summary({ id: "cccccccccccccccc" }),
    ];
    const html = renderQueue("priority", items);
    const first = html.indexOf("aaaaaaaaaaaaaaaa");
    const second = html.indexOf("bbbbbbbbbbbbbbbb");
    const third = html.indexOf("cccccccccccccccc");
    expect(first).toBeGreaterThan(-1);
    expect(second).toBeGreaterThan(first);
    expect(third).toBeGreaterThan(second);
  });

  test("tags every row with its item id and formats scores", () => {
    const html = renderQueue("priority", [summary()]);
    expect(html).toContain(`data-id="a1b2c3d4e5f60718"`);
    expect(html).toContain("<td>4.17</td>");
  });

  test("escapes candidate text in cells", () => {
    const html = renderQueue("glance", [summary({ text: `<img src=x> & "quotes"` })]);
    expect(html).not.toContain("<img");
    expect(html).toContain("&lt;img src=x&gt; &amp; &quot;quotes&quot;");
  });
});

describe("renderDetail", () => {
  test("shows rubric, violations and verdict reasons", () => {
    const html = renderDetail(detail());
    expect(html).toContain("appropriateness");
    expect(html).toContain("reflectiveness");
    expect(html).toContain("banned words: stupid");
    expect(html).toContain("lexicon violation");
    expect(html).toContain("Rubric (overall 2.50)");
  });

  test("offers only the legal actions for a flagged item", () => {
    const html = renderDetail(detail());
    expect(html).toContain(`value="approve"`);
    expect(html).toContain(`value="edit"`);
    expect(html).toContain(`value="reject"`);
    expect(html).toContain(`value="regen"`);
    expect(html).not.toContain(`value="glance"`);
  });

  test("offers glance but not edit for an auto-passed item", () => {
    const html = renderDetail(detail({ status: "auto_passed" }));
    expect(html).toContain(`value="glance"`);
    expect(html).not.toContain(`value="edit"`);
    expect(html).not.toContain(`value="regen"`);
  });

  test("terminal items get no decision form", () => {
    const html = renderDetail(detail({ status: "approved" }));
    expect(html).not.toContain("<form");
    expect(html).toContain("No actions available for approved items.");
  });

  test("carries the current revision in the form", () => {
    const html = renderDetail(detail({ revision: 3 }));
    expect(html).toContain(`name="expected_revision" value="3"`);
  });

  test("shows the original text once an edit diverges from it", () => {
    const edited = detail({
      text: "A calmer question?",
      audit: [
        {
          action: "edit",
          moderator: "mod-b",
          note: "softened",
          new_text: "A calmer question?",
          at: "2025-01-02T00:00:00Z",
        },
      ],
    });
    const html = renderDetail(edited);
    expect(html).toContain("Original text: What would you ask the captain?");
    expect(html).toContain("<b>edit</b> by mod-b");
    expect(html).toContain("new text: A calmer question?");
  });

  test("shows regeneration lineage when present", () => {
    const html = renderDetail(
      detail({ regen_of: "1111111111111111", regenerated_as: "2222222222222222" }),
    );
    expect(html).toContain("regenerated from");
    expect(html).toContain("1111111111111111");
    expect(html).toContain("regenerated as");
    expect(html).toContain("2222222222222222");
  });

  test("escapes hostile candidate text everywhere", () => {
    const hostile = detail({ text: `<script>alert("x")</script>` });
    const html = renderDetail(hostile);
    expect(html).not.toContain("<script>");
    expect(html).toContain("&lt;script&gt;");
  });
});

describe("outcomeBanner", () => {
  test("ok decisions report the new status and revision", () => {
    const banner = outcomeBanner({
      kind: "ok",
      item: detail({ status: "approved", revision: 1 }),
    });
    expect(banner.tone).toBe("ok");
    expect(banner.message).toBe("Saved: item is now approved at revision 1.");
  });

  test("conflicts prompt a reload with both revisions", () => {
    const banner = outcomeBanner({ kind: "conflict", expectedRevision: 0, currentRevision: 2 });
    expect(banner.tone).toBe("warn");
    expect(banner.message).toContain("revision 0");
    expect(banner.message).toContain("now at 2");
    expect(banner.message).toContain("Reload");
  });

  test("refusals and missing items surface the server message", () => {
    expect(outcomeBanner({ kind: "refused", message: "edit requires replacement text" })).toEqual({
      tone: "error",
      message: "Refused: edit requires replacement text",
    });
    expect(outcomeBanner({ kind: "missing", message: "unknown item 'x'" })).toEqual({
      tone: "error",
      message: "Item not found: unknown item 'x'",
    });
  });
});
