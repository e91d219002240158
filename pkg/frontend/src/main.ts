// Browser bootstrap: wires the API client, live trace, and approval queue
// into the three-pane layout. All truth lives server-side; this file only
// re-renders what the endpoints say.

import { ApiClient, ApiError } from "./api.js";
import { approvalHtml, statusBanner, traceHtml } from "./render.js";
import { followRun, isTerminal, type FollowHandle } from "./session.js";
import type { RunStatus } from "./types.js";

function apiBase(): string {
  const fromQuery = new URLSearchParams(window.location.search).get("api");
  return fromQuery ?? window.location.origin.replace(/:\d+$/, ":7411");
}

const api = new ApiClient(apiBase());

const runListPane = document.getElementById("run-list") as HTMLElement;
const tracePane = document.getElementById("trace") as HTMLElement;
const bannerPane = document.getElementById("banner") as HTMLElement;
const approvalsPane = document.getElementById("approvals") as HTMLElement;
const interruptButton = document.getElementById("interrupt") as HTMLButtonElement;
const noticePane = document.getElementById("notice") as HTMLElement;

let selectedRun: string | null = null;
let follower: FollowHandle | null = null;

function notify(text: string): void {
  noticePane.textContent = text;
  if (text) setTimeout(() => (noticePane.textContent = ""), 4000);
}

async function refreshRunList(): Promise<void> {
  try {
    const { runs } = await api.listRuns();
    runListPane.innerHTML = runs
      .map(
        (run) =>
          `<button class="run-entry ${run.run_id === selectedRun ? "selected" : ""}" data-run="${run.run_id}">` +
          `<span class="run-id">${run.run_id}</span><span class="run-status">${run.status}</span>` +
          `<span class="run-query">${run.query.slice(0, 60)}</span></button>`,
      )
      .join("");
  } catch {
    runListPane.innerHTML = `<p class="error">service unreachable at ${api.base}</p>`;
  }
}

function setBanner(status: RunStatus | "not_found"): void {
  bannerPane.innerHTML = statusBanner(status);
  interruptButton.disabled = status === "not_found" || isTerminal(status as RunStatus);
}

async function selectRun(runId: string): Promise<void> {
  follower?.stop();
  selectedRun = runId;
  tracePane.innerHTML = "";
  try {
    const summary = await api.getRun(runId);
    setBanner(summary.status);
  } catch (error) {
    if (error instanceof ApiError && error.status === 404) {
      setBanner("not_found");
      tracePane.innerHTML = `<p class="error">run ${runId} does not exist</p>`;
      return;
    }
    throw error;
  }
  follower = followRun(
    api,
    runId,
    () => {
      if (follower) tracePane.innerHTML = traceHtml(follower.session.events);
    },
    (status) => setBanner(status),
  );
  follower.done.catch((error: unknown) => notify(`stream error: ${String(error)}`));
}

async function refreshApprovals(): Promise<void> {
  const { approvals } = await api.listApprovals();
  approvalsPane.innerHTML = approvals.length
    ? approvals.map(approvalHtml).join("")
    : '<p class="empty">no approvals waiting</p>';
}

async function decide(requestId: string, action: string): Promise<void> {
  const decision =
    action === "approve"
      ? ({ decision: "approve" } as const)
      : action === "reject"
        ? ({ decision: "reject", reason: window.prompt("rejection reason?") ?? "" } as const)
        : ({
            decision: "edit",
            text: (document.querySelector(`.draft-editor[data-request="${requestId}"]`) as HTMLTextAreaElement).value,
          } as const);
  try {
    await api.decide(requestId, decision);
    notify(`decision recorded for ${requestId}`);
  } catch (error) {
    if (error instanceof ApiError && error.status === 409) {
      notify("already decided elsewhere");
    } else {
      notify(`decision failed: ${String(error)}`);
      return; // no local mutation on failure
    }
  }
  await refreshApprovals();
  await refreshRunList();
}

runListPane.addEventListener("click", (event) => {
  const target = (event.target as HTMLElement).closest("[data-run]") as HTMLElement | null;
  if (target?.dataset["run"]) void selectRun(target.dataset["run"]);
});

approvalsPane.addEventListener("click", (event) => {
  const target = event.target as HTMLElement;
  const action = target.dataset["action"];
  const requestId = target.dataset["request"];
  if (action && requestId) void decide(requestId, action);
});

interruptButton.addEventListener("click", async () => {
  if (!selectedRun) return;
  try {
    await api.interrupt(selectedRun);
    notify("interrupt requested");
  } catch (error) {
    if (error instanceof ApiError && error.status === 409) notify("run already terminal");
    else notify(`interrupt failed: ${String(error)}`);
  }
  await refreshApprovals();
});

void refreshRunList();
void refreshApprovals();
setInterval(() => void refreshRunList(), 3000);
setInterval(() => void refreshApprovals(), 2000);
