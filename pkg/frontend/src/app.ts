// DOM wiring only; all layout strings come from view.ts and all HTTP from
// client.ts. State is one queue tab plus at most one open item.

import { ApiClient } from "./client.js";
import type { ActionName, DecisionRequest, QueueKind } from "./types.js";
import { outcomeBanner, renderDetail, renderQueue, renderStats } from "./view.js";

const client = new ApiClient(window.API_BASE ?? "");

let currentKind: QueueKind = "priority";
let openItemId: string | null = null;

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (node === null) throw new Error(`missing element #${id}`);
  return node as T;
}

function showBanner(tone: "ok" | "warn" | "error", message: string): void {
  const banner = el<HTMLDivElement>("banner");
  banner.className = `banner ${tone}`;
  banner.textContent = message;
  banner.hidden = false;
}

function hideBanner(): void {
  el<HTMLDivElement>("banner").hidden = true;
}

async function refreshStats(): Promise<void> {
  const stats = await client.stats();
  el<HTMLDivElement>("stats").innerHTML = renderStats(stats);
}

async function refreshQueue(): Promise<void> {
  const queue = await client.queue(currentKind);
  el<HTMLElement>("queue").innerHTML = renderQueue(currentKind, queue.items);
}

async function openItem(id: string): Promise<void> {
  const item = await client.item(id);
  openItemId = id;
  const pane = el<HTMLElement>("detail");
  pane.innerHTML = renderDetail(item);
  pane.hidden = false;
}

async function closeItem(): Promise<void> {
  openItemId = null;
  el<HTMLElement>("detail").hidden = true;
}

async function submitDecision(form: HTMLFormElement): Promise<void> {
  const data = new FormData(form);
  const action = String(data.get("action")) as ActionName;
  const newText = String(data.get("new_text") ?? "").trim();
  const request: DecisionRequest = {
    action,
    moderator: String(data.get("moderator") ?? "console"),
    note: String(data.get("note") ?? ""),
    expected_revision: Number(data.get("expected_revision")),
  };
  if (action === "edit") request.new_text = newText;
  const id = form.dataset.id ?? "";
  const outcome = await client.decide(id, request);
  const banner = outcomeBanner(outcome);
  showBanner(banner.tone, banner.message);
  await refreshQueue();
  await refreshStats();
  if (outcome.kind === "ok") {
    await openItem(id);
  } else if (outcome.kind === "conflict") {
    await openItem(id); // reload so the form carries the fresh revision
  } else if (outcome.kind === "missing") {
    await closeItem();
  }
}

function wire(): void {
  el<HTMLElement>("tabs").addEventListener("click", (event) => {
    const button = (event.target as HTMLElement).closest("button");
    if (button === null) return;
    hideBanner();
    if (button.id === "refresh") {
      void refreshQueue().then(refreshStats);
      return;
    }
    const kind = button.dataset.kind as QueueKind | undefined;
    if (kind === undefined || kind === currentKind) return;
    currentKind = kind;
    for (const tab of document.querySelectorAll<HTMLButtonElement>("#tabs button[data-kind]")) {
      tab.classList.toggle("active", tab === button);
    }
    void closeItem();
    void refreshQueue();
  });

  el<HTMLElement>("queue").addEventListener("click", (event) => {
    const row = (event.target as HTMLElement).closest<HTMLTableRowElement>("tr[data-id]");
    if (row === null || row.dataset.id === undefined) return;
    hideBanner();
    void openItem(row.dataset.id).catch((error: unknown) => {
      showBanner("error", String(error));
    });
  });

  el<HTMLElement>("detail").addEventListener("submit", (event) => {
    const form = event.target as HTMLFormElement;
    if (!form.classList.contains("decision")) return;
    event.preventDefault();
    void submitDecision(form).catch((error: unknown) => {
      showBanner("error", String(error));
    });
  });
}

async function init(): Promise<void> {
  wire();
  try {
    await client.health();
  } catch {
    showBanner("error", "Cannot reach the moderation API. Is `dialogue-forge serve` running?");
    return;
  }
  await refreshStats();
  await refreshQueue();
  if (openItemId !== null) await openItem(openItemId);
}

document.addEventListener("DOMContentLoaded", () => {
  void init();
});
