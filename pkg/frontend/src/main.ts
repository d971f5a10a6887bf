/** Browser entry point: wires the review queue to the page.
 *
 * All DOM access lives here; api.ts, queue.ts and keys.ts stay pure so
 * they can be tested without a browser.
 */

import { ApiClient, ReviewItem, Stats } from "./api.js";
import { keyAction } from "./keys.js";
import { ReviewQueue, SubmitOutcome } from "./queue.js";

const api = new ApiClient();
const queue = new ReviewQueue(api);

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

const statsLine = el<HTMLElement>("stats");
const statusLine = el<HTMLElement>("status");
const card = el<HTMLElement>("card");
const utteranceId = el<HTMLElement>("utterance-id");
const sourceLabel = el<HTMLElement>("source");
const durationLabel = el<HTMLElement>("duration");
const player = el<HTMLAudioElement>("player");
const transcriptBox = el<HTMLTextAreaElement>("transcript");
const editedBadge = el<HTMLElement>("edited-badge");
const retryBar = el<HTMLElement>("retry-bar");
const retryMessage = el<HTMLElement>("retry-message");
const retryButton = el<HTMLButtonElement>("retry-button");
const acceptButton = el<HTMLButtonElement>("accept-button");
const rejectButton = el<HTMLButtonElement>("reject-button");
const doneBanner = el<HTMLElement>("done");

let editing = false;
let shownTranscript = "";

function setStatus(text: string): void {
  statusLine.textContent = text;
}

async function refreshStats(): Promise<void> {
  try {
    const stats: Stats = await api.stats();
    statsLine.textContent =
      `${stats.pending} pending / ${stats.accepted} accepted / ` +
      `${stats.rejected} rejected (${stats.edited} edited)`;
  } catch {
    // stats are cosmetic; never block the review loop on them
  }
}

function render(item: ReviewItem | null): void {
  if (!item) {
    card.hidden = true;
    doneBanner.hidden = !queue.isExhausted();
    player.pause();
    player.removeAttribute("src");
    return;
  }
  card.hidden = false;
  doneBanner.hidden = true;
  utteranceId.textContent = item.id;
  sourceLabel.textContent = item.source || "unknown";
  durationLabel.textContent = `${item.duration_s.toFixed(1)}s`;
  if (player.getAttribute("data-for") !== item.id) {
    player.setAttribute("data-for", item.id);
    player.src = item.audio_url;
  }
  if (!editing) {
    transcriptBox.value = item.transcript;
    shownTranscript = item.transcript;
    transcriptBox.readOnly = true;
  }
  editedBadge.hidden = !editing;
}

function renderRetry(): void {
  const unsaved = queue.pendingRetry();
  retryBar.hidden = unsaved === null;
  acceptButton.disabled = unsaved !== null;
  rejectButton.disabled = unsaved !== null;
}

function startEdit(): void {
  const item = queue.current();
  if (!item || queue.pendingRetry()) return;
  editing = true;
  transcriptBox.readOnly = false;
  editedBadge.hidden = false;
  transcriptBox.focus();
  setStatus("editing; Enter saves and accepts, Escape discards");
}

function cancelEdit(): void {
  editing = false;
  transcriptBox.readOnly = true;
  transcriptBox.value = shownTranscript;
  editedBadge.hidden = true;
  transcriptBox.blur();
  setStatus("");
}

async function advance(): Promise<void> {
  await queue.fill();
  render(queue.current());
  void refreshStats();
}

function reportOutcome(outcome: SubmitOutcome): void {
  if (outcome.kind === "saved") {
    setStatus(`saved #${outcome.ack.sequence} (${outcome.ack.verdict})`);
  } else if (outcome.kind === "stale") {
    setStatus(`${outcome.id} was already decided elsewhere; skipped`);
  } else {
    retryMessage.textContent = `could not save ${outcome.id}: ${outcome.message}`;
  }
  renderRetry();
}

async function decide(verdict: "accept" | "reject", edited?: string): Promise<void> {
  if (queue.pendingRetry()) return;
  const item = queue.current();
  if (!item) return;
  editing = false;
  transcriptBox.readOnly = true;
  editedBadge.hidden = true;
  const outcome = await queue.submit({
    verdict,
    edited_transcript: edited !== undefined && edited !== item.transcript ? edited : null,
  });
  reportOutcome(outcome);
  if (outcome.kind !== "retry") await advance();
}

async function retryUnsaved(): Promise<void> {
  retryButton.disabled = true;
  try {
    const outcome = await queue.retry();
    if (outcome) reportOutcome(outcome);
    if (outcome && outcome.kind !== "retry") await advance();
  } finally {
    retryButton.disabled = false;
  }
}

function togglePlay(): void {
  if (player.paused) void player.play();
  else player.pause();
}

document.addEventListener("keydown", (event) => {
  // let browser shortcuts through untouched
  if (event.ctrlKey || event.metaKey || event.altKey) return;
  const action = keyAction(event.key, editing);
  if (action === "none") return;
  event.preventDefault();
  switch (action) {
    case "accept":
      void decide("accept");
      break;
    case "reject":
      void decide("reject");
      break;
    case "edit":
      startEdit();
      break;
    case "submit-edit":
      void decide("accept", transcriptBox.value);
      break;
    case "cancel-edit":
      cancelEdit();
      break;
    case "toggle-play":
      togglePlay();
      break;
  }
});

acceptButton.addEventListener("click", () => void decide("accept"));
rejectButton.addEventListener("click", () => void decide("reject"));
retryButton.addEventListener("click", () => void retryUnsaved());
transcriptBox.addEventListener("dblclick", () => startEdit());

async function boot(): Promise<void> {
  setStatus("loading");
  try {
    await advance();
    setStatus("");
  } catch (error) {
    const message = error instanceof Error ? error.message : String(error);
    setStatus(`failed to load pending items: ${message}`);
  }
}

void boot();
