// Pure HTML renderers. Everything here is a string-in, string-out function
// so the layout logic stays testable without a DOM. Queue order is whatever
// the server sent; the console must not re-sort it.

import type { DecisionOutcome } from "./client.js";
import type {
  ActionName,
  ItemDetail,
  ItemStatus,
  ItemSummary,
  QueueKind,
  Stats,
} from "./types.js";

export function escapeHtml(value: string): string {
  return value
    .replaceAll("&", "&amp;")
    .replaceAll("<", "&lt;")
    .replaceAll(">", "&gt;")
    .replaceAll('"', "&quot;")
    .replaceAll("'", "&#39;");
}

export function truncate(text: string, max = 90): string {
  if (text.length <= max) return text;
  return text.slice(0, max - 3) + "...";
}

// Mirror of the server's transition table; the form only offers moves the
// store would accept, everything else would just bounce with a 422.
export function legalActions(status: ItemStatus): ActionName[] {
  switch (status) {
    case "auto_passed":
      return ["glance", "approve", "reject"];
    case "flagged":
      return ["approve", "edit", "reject", "regen"];
    default:
      return [];
  }
}

const ACTION_LABELS: Record<ActionName, string> = {
  glance: "Glance (confirm auto-pass)",
  approve: "Approve",
  edit: "Edit text",
  reject: "Reject",
  regen: "Request regeneration",
};

export function renderStats(stats: Stats): string {
  const by = stats.by_status;
  return (
    `<b>${stats.total}</b> items &middot; ` +
    `${by.flagged} flagged &middot; ${by.auto_passed} auto-passed &middot; ` +
    `${by.approved} approved &middot; ${by.rejected} rejected &middot; ` +
    `${by.regen_requested} awaiting regen`
  );
}

export function renderQueue(kind: QueueKind, items: ItemSummary[]): string {
  if (items.length === 0) {
    return `<p class="empty">The ${kind} queue is empty.</p>`;
  }
  const rows = items
    .map(
      (item) =>
        `<tr data-id="${escapeHtml(item.id)}">` +
        `<td class="mono">${escapeHtml(item.id)}</td>` +
        `<td>${item.overall.toFixed(2)}</td>` +
        `<td>${item.min_criterion}</td>` +
        `<td>${item.violation_count}</td>` +
        `<td>${item.revision}</td>` +
        `<td>${escapeHtml(truncate(item.text))}</td>` +
        `</tr>`
    )
    .join("");
  return (
    `<table class="queue">` +
    `<thead><tr><th>id</th><th>overall</th><th>min</th>` +
    `<th>violations</th><th>rev</th><th>text</th></tr></thead>` +
    `<tbody>${rows}</tbody></table>`
  );
}

function metaRows(item: ItemDetail): string {
  const slot = item.slot;
  const pairs: Array<[string, string]> = [
    ["status", item.status],
    ["revision", String(item.revision)],
    ["child", item.child_id],
    ["book", item.book_id],
    ["slot", `${slot.script_name} / session ${slot.session_no} / ${slot.slot_id}`],
    ["kind", `${slot.kind} (${slot.strategy})`],
    ["objective", slot.objective],
    ["seed", String(item.seed)],
    ["judge", item.judge],
    ["created", item.created_at],
  ];
  if (item.regen_of !== null) pairs.push(["regenerated from", item.regen_of]);
  if (item.regenerated_as !== null) pairs.push(["regenerated as", item.regenerated_as]);
  return pairs
    .map(([k, v]) => `<dt>${escapeHtml(k)}</dt><dd>${escapeHtml(v)}</dd>`)
    .join("");
}

function rubricTable(rubric: Record<string, number>): string {
  const names = Object.keys(rubric);
  const head = names.map((n) => `<th>${escapeHtml(n)}</th>`).join("");
  const cells = names.map((n) => `<td>${rubric[n]}</td>`).join("");
  return `<table class="rubric"><thead><tr>${head}</tr></thead><tbody><tr>${cells}</tr></tbody></table>`;
}

function violationList(item: ItemDetail): string {
  if (item.violations.length === 0) return `<p class="empty">No check violations.</p>`;
  const rows = item.violations
    .map(
      (v) =>
        `<li><b>${escapeHtml(v.check)}</b>: ${escapeHtml(v.detail)} ` +
        `(measured ${v.measured}, limit ${v.limit})</li>`
    )
    .join("");
  return `<ul class="violations">${rows}</ul>`;
}

function auditList(item: ItemDetail): string {
  if (item.audit.length === 0) return `<p class="empty">No decisions yet.</p>`;
  const rows = item.audit
    .map((entry) => {
      const note = entry.note ? ` &mdash; ${escapeHtml(entry.note)}` : "";
      const edit = entry.new_text !== null ? ` (new text: ${escapeHtml(entry.new_text)})` : "";
      return (
        `<li><b>${escapeHtml(entry.action)}</b> by ${escapeHtml(entry.moderator)} ` +
        `at ${escapeHtml(entry.at)}${note}${edit}</li>`
      );
    })
    .join("");
  return `<ol class="audit">${rows}</ol>`;
}

function decisionForm(item: ItemDetail): string {
  const actions = legalActions(item.status);
  if (actions.length === 0) {
    return `<p class="empty">No actions available for ${escapeHtml(item.status)} items.</p>`;
  }
  const options = actions
    .map((a) => `<option value="${a}">${escapeHtml(ACTION_LABELS[a])}</option>`)
    .join("");
  return (
    `<form class="decision" data-id="${escapeHtml(item.id)}">` +
    `<input type="hidden" name="expected_revision" value="${item.revision}">` +
    `<label>Action</label><select name="action">${options}</select>` +
    `<label>Moderator</label><input name="moderator" value="console" required>` +
    `<label>Note</label><input name="note" placeholder="optional note">` +
    `<label>Replacement text (edit only)</label>` +
    `<textarea name="new_text" placeholder="used only by the edit action"></textarea>` +
    `<button type="submit">Submit decision</button>` +
    `</form>`
  );
}

export function renderDetail(item: ItemDetail): string {
  const original =
    item.original_text !== item.text
      ? `<p class="empty">Original text: ${escapeHtml(item.original_text)}</p>`
      : "";
  return (
    `<h2>Item <span class="mono">${escapeHtml(item.id)}</span> ` +
    `<span class="status-badge">${escapeHtml(item.status)}</span></h2>` +
    `<blockquote>${escapeHtml(item.text)}</blockquote>` +
    original +
    `<dl class="meta">${metaRows(item)}</dl>` +
    `<h2>Rubric (overall ${item.overall.toFixed(2)})</h2>` +
    rubricTable(item.rubric) +
    `<h2>Checks</h2>` +
    violationList(item) +
    (item.verdict.reasons.length > 0
      ? `<ul class="reasons">${item.verdict.reasons
          .map((r) => `<li>${escapeHtml(r)}</li>`)
          .join("")}</ul>`
      : "") +
    `<h2>Audit trail</h2>` +
    auditList(item) +
    decisionForm(item)
  );
}

export function outcomeBanner(outcome: DecisionOutcome): {
  tone: "ok" | "warn" | "error";
  message: string;
} {
  switch (outcome.kind) {
    case "ok":
      return {
        tone: "ok",
        message: `Saved: item is now ${outcome.item.status} at revision ${outcome.item.revision}.`,
      };
    case "conflict":
      return {
        tone: "warn",
        message:
          `Someone else decided this item first: you saw revision ` +
          `${outcome.expectedRevision} but it is now at ${outcome.currentRevision}. ` +
          `Reload the item and decide again.`,
      };
    case "refused":
      return { tone: "error", message: `Refused: ${outcome.message}` };
    case "missing":
      return { tone: "error", message: `Item not found: ${outcome.message}` };
  }
}
