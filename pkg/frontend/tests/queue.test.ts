import { describe, expect, it, vi } from "vitest";

import { ApiError, DecisionAck, DecisionRequest, PendingPage, ReviewItem } from "../src/api.js";
import { ReviewQueue } from "../src/queue.js";

function item(id: string, transcript = "केही पाठ"): ReviewItem {
  return {
    id,
    transcript,
    duration_s: 6.0,
    source: "custom",
    audio_url: `/api/audio/${encodeURIComponent(id)}`,
  };
}

/** In-memory stand-in for the HTTP client: pages through `store`,
 *  acks decisions in order, and can be told to fail. */
class FakeApi {
  store: ReviewItem[];
  pageSize: number;
  sequence = 0;
  decisions: DecisionRequest[] = [];
  failNext: Error | null = null;
  pendingCalls = 0;

  constructor(store: ReviewItem[], pageSize = 2) {
    this.store = store;
    this.pageSize = pageSize;
  }

  async pending(limit: number, cursor?: string | null): Promise<PendingPage> {
    this.pendingCalls += 1;
    const start = cursor ? Number(cursor) : 0;
    const take = Math.min(limit, this.pageSize);
    const items = this.store.slice(start, start + take);
    const end = start + items.length;
    return { items, cursor: end < this.store.length ? String(end) : null };
  }

  async decide(request: DecisionRequest): Promise<DecisionAck> {
    if (this.failNext) {
      const error = this.failNext;
      this.failNext = null;
      throw error;
    }
    this.decisions.push(request);
    this.sequence += 1;
    return {
      sequence: this.sequence,
      utterance_id: request.utterance_id,
      verdict: request.verdict,
    };
  }
}

describe("fill", () => {
  it("pages until the buffer holds enough items", async () => {
    const api = new FakeApi([item("u1"), item("u2"), item("u3"), item("u4")]);
    const queue = new ReviewQueue(api);
    await queue.fill(3);
    expect(queue.remainingBuffered()).toBe(4);
    expect(api.pendingCalls).toBe(2);
    expect(queue.current()?.id).toBe("u1");
  });

  it("stops once the server reports no further page", async () => {
    const api = new FakeApi([item("u1")]);
    const queue = new ReviewQueue(api);
    await queue.fill(5);
    expect(queue.remainingBuffered()).toBe(1);
    expect(api.pendingCalls).toBe(1);
    await queue.fill(5);
    expect(api.pendingCalls).toBe(1);
  });

  it("reports exhaustion only after draining an empty backlog", async () => {
    const api = new FakeApi([]);
    const queue = new ReviewQueue(api);
    expect(queue.isExhausted()).toBe(false);
    await queue.fill();
    expect(queue.isExhausted()).toBe(true);
    expect(queue.current()).toBeNull();
  });
});

describe("submit", () => {
  it("sends one decision and advances to the next item", async () => {
    const api = new FakeApi([item("u1"), item("u2")]);
    const queue = new ReviewQueue(api);
    await queue.fill();
    const outcome = await queue.submit({ verdict: "accept" });
    expect(outcome).toEqual({
      kind: "saved",
      ack: { sequence: 1, utterance_id: "u1", verdict: "accept" },
    });
    expect(api.decisions).toHaveLength(1);
    expect(api.decisions[0]).toEqual({
      utterance_id: "u1",
      verdict: "accept",
      edited_transcript: null,
    });
    expect(queue.current()?.id).toBe("u2");
  });

  it("carries an edited transcript through to the server", async () => {
    const api = new FakeApi([item("u1")]);
    const queue = new ReviewQueue(api);
    await queue.fill();
    await queue.submit({ verdict: "accept", edited_transcript: "सच्याइएको" });
    expect(api.decisions[0].edited_transcript).toBe("सच्याइएको");
  });

  it("rejects when nothing is buffered", async () => {
    const api = new FakeApi([]);
    const queue = new ReviewQueue(api);
    await queue.fill();
    await expect(queue.submit({ verdict: "reject" })).rejects.toThrow(/no item/);
  });

  it("refuses a second submission while one is in flight", async () => {
    const api = new FakeApi([item("u1"), item("u2")]);
    let release!: () => void;
    const gate = new Promise<void>((resolve) => {
      release = resolve;
    });
    const slowDecide = vi.fn(async (request: DecisionRequest) => {
      await gate;
      return api.decide(request);
    });
    const queue = new ReviewQueue({ pending: api.pending.bind(api), decide: slowDecide });
    await queue.fill();
    const first = queue.submit({ verdict: "accept" });
    await expect(queue.submit({ verdict: "reject" })).rejects.toThrow(/in flight/);
    release();
    const outcome = await first;
    expect(outcome.kind).toBe("saved");
    expect(slowDecide).toHaveBeenCalledTimes(1);
  });

  it("never re-queues an utterance already decided or buffered", async () => {
    // cursor positions shift as the server's pending list shrinks, so a
    // refetched page can overlap items this client has already seen
    const pages: PendingPage[] = [
      { items: [item("u1"), item("u2")], cursor: "c1" },
      { items: [item("u1"), item("u2"), item("u3")], cursor: null },
    ];
    let served = 0;
    const acks = new FakeApi([]);
    const queue = new ReviewQueue({
      pending: async () => pages[served++],
      decide: acks.decide.bind(acks),
    });
    await queue.fill();
    await queue.submit({ verdict: "reject" });
    const seen: string[] = [];
    while (queue.current()) {
      seen.push(queue.current()!.id);
      await queue.submit({ verdict: "accept" });
      await queue.fill();
    }
    expect(seen).toEqual(["u2", "u3"]);
    expect(acks.decisions.map((d) => d.utterance_id)).toEqual(["u1", "u2", "u3"]);
  });
});

describe("failure handling", () => {
  it("keeps the item current and retryable after a network failure", async () => {
    const api = new FakeApi([item("u1"), item("u2")]);
    const queue = new ReviewQueue(api);
    await queue.fill();
    api.failNext = new TypeError("fetch failed");
    const outcome = await queue.submit({ verdict: "accept" });
    expect(outcome).toEqual({ kind: "retry", id: "u1", message: "fetch failed" });
    expect(queue.current()?.id).toBe("u1");
    expect(queue.pendingRetry()?.item.id).toBe("u1");
    expect(api.decisions).toHaveLength(0);

    const retried = await queue.retry();
    expect(retried?.kind).toBe("saved");
    expect(api.decisions).toHaveLength(1);
    expect(api.decisions[0].utterance_id).toBe("u1");
    expect(queue.pendingRetry()).toBeNull();
    expect(queue.current()?.id).toBe("u2");
  });

  it("resends the same verdict on retry, not a fresh one", async () => {
    const api = new FakeApi([item("u1")]);
    const queue = new ReviewQueue(api);
    await queue.fill();
    api.failNext = new Error("boom");
    await queue.submit({ verdict: "reject", edited_transcript: null });
    await queue.retry();
    expect(api.decisions[0].verdict).toBe("reject");
  });

  it("stays in retry state when the retry fails too", async () => {
    const api = new FakeApi([item("u1")]);
    const queue = new ReviewQueue(api);
    await queue.fill();
    api.failNext = new Error("down");
    await queue.submit({ verdict: "accept" });
    api.failNext = new Error("still down");
    const outcome = await queue.retry();
    expect(outcome).toEqual({ kind: "retry", id: "u1", message: "still down" });
    expect(queue.pendingRetry()?.item.id).toBe("u1");
  });

  it("returns null from retry when nothing failed", async () => {
    const api = new FakeApi([item("u1")]);
    const queue = new ReviewQueue(api);
    await queue.fill();
    expect(await queue.retry()).toBeNull();
  });

  it("skips an item the server no longer knows", async () => {
    const api = new FakeApi([item("u1"), item("u2")]);
    const queue = new ReviewQueue(api);
    await queue.fill();
    api.failNext = new ApiError(404, "no utterance 'u1'");
    const outcome = await queue.submit({ verdict: "accept" });
    expect(outcome).toEqual({ kind: "stale", id: "u1" });
    expect(queue.pendingRetry()).toBeNull();
    expect(queue.current()?.id).toBe("u2");
  });

  it("treats a 404 during retry as stale, not another failure", async () => {
    const api = new FakeApi([item("u1"), item("u2")]);
    const queue = new ReviewQueue(api);
    await queue.fill();
    api.failNext = new Error("blip");
    await queue.submit({ verdict: "accept" });
    api.failNext = new ApiError(404, "gone");
    const outcome = await queue.retry();
    expect(outcome).toEqual({ kind: "stale", id: "u1" });
    expect(queue.pendingRetry()).toBeNull();
    expect(queue.current()?.id).toBe("u2");
  });

  it("does not surface a 5xx as stale", async () => {
    const api = new FakeApi([item("u1")]);
    const queue = new ReviewQueue(api);
    await queue.fill();
    api.failNext = new ApiError(500, "journal write failed");
    const outcome = await queue.submit({ verdict: "accept" });
    expect(outcome.kind).toBe("retry");
    expect(queue.pendingRetry()?.item.id).toBe("u1");
  });
});

describe("end of queue", () => {
  it("drains to the exhausted state", async () => {
    const api = new FakeApi([item("u1"), item("u2")]);
    const queue = new ReviewQueue(api);
    await queue.fill();
    await queue.submit({ verdict: "accept" });
    await queue.submit({ verdict: "accept" });
    await queue.fill();
    expect(queue.current()).toBeNull();
    expect(queue.isExhausted()).toBe(true);
  });

  it("is not exhausted while a failed decision is unsaved", async () => {
    const api = new FakeApi([item("u1")]);
    const queue = new ReviewQueue(api);
    await queue.fill();
    api.failNext = new Error("offline");
    await queue.submit({ verdict: "accept" });
    await queue.fill();
    expect(queue.isExhausted()).toBe(false);
    expect(queue.current()?.id).toBe("u1");
  });
});
