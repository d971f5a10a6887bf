/** Review queue state machine, independent of the DOM.
 *
 * The server is the source of truth: this class only buffers pending items
 * and forwards decisions. A decision is "saved" exactly when the server has
 * acknowledged it with a sequence number. Failed submissions stay visible
 * and retryable; nothing is dropped silently.
 */

import { ApiError, DecisionAck, DecisionRequest, PendingPage, ReviewItem } from "./api.js";

export interface QueueApi {
  pending(limit: number, cursor?: string | null): Promise<PendingPage>;
  decide(request: DecisionRequest): Promise<DecisionAck>;
}

export type SubmitOutcome =
  | { kind: "saved"; ack: DecisionAck }
  | { kind: "stale"; id: string }
  | { kind: "retry"; id: string; message: string };

export interface Verdict {
  verdict: "accept" | "reject";
  edited_transcript?: string | null;
}

interface Unsaved {
  item: ReviewItem;
  request: DecisionRequest;
}

const PAGE_SIZE = 20;

export class ReviewQueue {
  private items: ReviewItem[] = [];
  private cursor: string | null = null;
  private exhausted = false;
  private inFlight = false;
  private unsaved: Unsaved | null = null;
  /** ids acked this session, so a refetch never re-queues them */
  private decided = new Set<string>();

  constructor(private readonly api: QueueApi) {}

  /** The item the reviewer should act on, or null when drained. */
  current(): ReviewItem | null {
    if (this.unsaved) return this.unsaved.item;
    return this.items[0] ?? null;
  }

  /** A failed decision waiting for retry(), if any. */
  pendingRetry(): Unsaved | null {
    return this.unsaved;
  }

  remainingBuffered(): number {
    return this.items.length;
  }

  isExhausted(): boolean {
    return this.exhausted && this.items.length === 0 && !this.unsaved;
  }

  /** Top up the buffer from the server until it holds at least `min` items. */
  async fill(min = 2): Promise<void> {
    while (!this.exhausted && this.items.length < min) {
      const page = await this.api.pending(PAGE_SIZE, this.cursor);
      // pages refetched after decisions may overlap earlier ones
      const buffered = new Set(this.items.map((queued) => queued.id));
      for (const item of page.items) {
        if (this.decided.has(item.id) || buffered.has(item.id)) continue;
        buffered.add(item.id);
        this.items.push(item);
      }
      this.cursor = page.cursor;
      if (page.cursor === null) this.exhausted = true;
    }
  }

  /**
   * Submit a verdict for the current item. Advances optimistically on
   * success, rolls the item back for retry on network failure, and skips
   * items the server no longer knows (decided elsewhere, then re-served).
   */
  async submit(verdict: Verdict): Promise<SubmitOutcome> {
    if (this.inFlight) {
      throw new Error("a decision is already in flight");
    }
    const item = this.current();
    if (!item) {
      throw new Error("no item to decide");
    }
    const request: DecisionRequest = {
      utterance_id: item.id,
      verdict: verdict.verdict,
      edited_transcript: verdict.edited_transcript ?? null,
    };
    this.inFlight = true;
    try {
      const ack = await this.api.decide(request);
      this.unsaved = null;
      this.markDone(item);
      return { kind: "saved", ack };
    } catch (error) {
      if (error instanceof ApiError && error.status === 404) {
        // decided or removed elsewhere: drop it, nothing to save
        this.unsaved = null;
        this.markDone(item);
        return { kind: "stale", id: item.id };
      }
      // network failure or server error: keep the item at the head,
      // remember what was being saved so retry() can resend it
      this.unsaved = { item, request };
      const message = error instanceof Error ? error.message : String(error);
      return { kind: "retry", id: item.id, message };
    } finally {
      this.inFlight = false;
    }
  }

  /** Resend the failed decision, if one is waiting. */
  async retry(): Promise<SubmitOutcome | null> {
    const unsaved = this.unsaved;
    if (!unsaved) return null;
    if (this.inFlight) {
      throw new Error("a decision is already in flight");
    }
    this.inFlight = true;
    try {
      const ack = await this.api.decide(unsaved.request);
      this.unsaved = null;
      this.markDone(unsaved.item);
      return { kind: "saved", ack };
    } catch (error) {
      if (error instanceof ApiError && error.status === 404) {
        this.unsaved = null;
        this.markDone(unsaved.item);
        return { kind: "stale", id: unsaved.item.id };
      }
      const message = error instanceof Error ? error.message : String(error);
      return { kind: "retry", id: unsaved.item.id, message };
    } finally {
      this.inFlight = false;
    }
  }

  private markDone(item: ReviewItem): void {
    this.decided.add(item.id);
    this.items = this.items.filter((candidate) => candidate.id !== item.id);
  }
}
