// Console session state: accumulated events per run with a monotonic cursor.
//
// Every rendered fact is reconstructible from GET /runs/{id}/events; this
// class only guarantees ordering and dedupe while a stream (possibly
// reconnecting) feeds it.

import { ApiClient } from "./api.js";
import { connectSse, type SseConnection } from "./sse.js";
import type { RunStatus, TraceEvent } from "./types.js";

const TERMINAL: RunStatus[] = ["completed", "failed", "interrupted"];

export function isTerminal(status: RunStatus): boolean {
  return TERMINAL.includes(status);
}

export class RunSession {
  readonly events: TraceEvent[] = [];
  cursor = -1;
  duplicatesDropped = 0;

  constructor(public runId: string) {}

  /** Apply one event; returns true when it extended the trace. */
  apply(event: TraceEvent): boolean {
    if (event.seq <= this.cursor) {
      this.duplicatesDropped += 1;
      return false; // replay after reconnect
    }
    this.events.push(event);
    this.cursor = event.seq;
    return true;
  }

  applyAll(events: TraceEvent[]): void {
    for (const event of events) this.apply(event);
  }
}

export interface FollowHandle {
  session: RunSession;
  done: Promise<void>;
  /** Drop the connection; follow() reconnects from the cursor. */
  disconnect(): void;
  stop(): void;
}

/**
 * Follow a run's event stream, reconnecting from the session cursor after
 * any disconnect until the run reaches a terminal status.
 */
export function followRun(
  api: ApiClient,
  runId: string,
  onEvent?: (event: TraceEvent) => void,
  onStatus?: (status: RunStatus) => void,
): FollowHandle {
  const session = new RunSession(runId);
  let current: SseConnection | null = null;
  let stopped = false;

  const done = (async () => {
    for (;;) {
      if (stopped) return;
      const connection = connectSse(api.streamUrl(runId, session.cursor), (msg) => {
        const event = JSON.parse(msg.data) as TraceEvent;
        if (session.apply(event) && onEvent) onEvent(event);
      });
      current = connection;
      try {
        await connection.done;
      } catch {
        // connection dropped; fall through to the status probe + reconnect
      }
      const summary = await api.getRun(runId);
      if (onStatus) onStatus(summary.status);
      if (isTerminal(summary.status)) {
        // drain anything the last connection missed
        const page = await api.getEvents(runId, session.cursor);
        for (const event of page.events) {
          if (session.apply(event) && onEvent) onEvent(event);
        }
        return;
      }
      await new Promise((resolve) => setTimeout(resolve, 50));
    }
  })();

  return {
    session,
    done,
    disconnect: () => current?.abort(),
    stop: () => {
      stopped = true;
      current?.abort();
    },
  };
}
