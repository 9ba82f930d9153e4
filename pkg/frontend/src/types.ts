// Wire types for the moderation API. Field names match the JSON payloads
// exactly; keep them in sync with the server, not with what reads nicely.

export type QueueKind = "priority" | "glance";

export type ItemStatus =
  | "scored"
  | "auto_passed"
  | "flagged"
  | "approved"
  | "rejected"
  | "regen_requested";

export type ActionName = "approve" | "edit" | "reject" | "regen" | "glance";

export interface ItemSummary {
  id: string;
  text: string;
  overall: number;
  min_criterion: number;
  violation_count: number;
  status: ItemStatus;
  revision: number;
  created_at: string;
}

export interface Violation {
  check: string;
  detail: string;
  measured: number;
  limit: number;
}

export interface Verdict {
  status: string;
  reasons: string[];
}

export interface SlotInfo {
  script_name: string;
  session_no: number;
  slot_id: string;
  kind: string;
  strategy: string;
  objective: string;
}

export interface AuditEntry {
  action: ActionName;
  moderator: string;
  note: string;
  new_text: string | null;
  at: string;
}

export interface ItemDetail extends ItemSummary {
  rubric: Record<string, number>;
  violations: Violation[];
  verdict: Verdict;
  judge: string;
  child_id: string;
  book_id: string;
  slot: SlotInfo;
  seed: number;
  original_text: string;
  regen_of: string | null;
  regenerated_as: string | null;
  audit: AuditEntry[];
}

export interface QueueResponse {
  kind: QueueKind;
  items: ItemSummary[];
}

export interface Stats {
  total: number;
  validated: number;
  by_status: Record<ItemStatus, number>;
}

export interface DecisionRequest {
  action: ActionName;
  moderator: string;
  note?: string;
  new_text?: string | null;
  expected_revision: number;
}

declare global {
  interface Window {
    API_BASE?: string;
  }
}
