// Wire types of the run service API.

export type EventKind =
  | "user_query"
  | "reasoning"
  | "tool_call"
  | "tool_result"
  | "handoff"
  | "approval_request"
  | "approval_decision"
  | "interrupt"
  | "final_answer"
  | "error";

export type RunStatus = "running" | "awaiting_approval" | "interrupted" | "completed" | "failed";

export interface TraceEvent {
  seq: number;
  run_id: string;
  agent_id: string;
  kind: EventKind;
  payload: Record<string, unknown>;
  timestamp: number;
}

export interface RunSummary {
  run_id: string;
  status: RunStatus;
  answer: string | null;
  metrics?: Record<string, unknown>;
  last_seq?: number;
}

export interface RunListEntry {
  run_id: string;
  status: RunStatus;
  query: string;
}

export interface ApprovalRequest {
  request_id: string;
  run_id: string;
  agent_id: string;
  location: "pre_tool_call" | "pre_handoff" | "final_review";
  pending: Record<string, unknown>;
  created_at: number;
  state: "open" | "decided" | "voided";
}

export type Decision =
  | { decision: "approve" }
  | { decision: "reject"; reason: string }
  | { decision: "edit"; text: string };

export interface EventPage {
  events: TraceEvent[];
  next: number;
}
