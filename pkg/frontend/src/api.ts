/** Typed client for the curation service JSON API. */

export interface ReviewItem {
  id: string;
  transcript: string;
  duration_s: number;
  source: string;
  audio_url: string;
}

export interface PendingPage {
  items: ReviewItem[];
  cursor: string | null;
}

export interface DecisionAck {
  sequence: number;
  utterance_id: string;
  verdict: string;
}

export interface Stats {
  total: number;
  accepted: number;
  rejected: number;
  edited: number;
  pending: number;
}

export interface DecisionRequest {
  utterance_id: string;
  verdict: "accept" | "reject";
  edited_transcript?: string | null;
  reason?: string | null;
  reviewer?: string;
}

/** Non-2xx response. `status` distinguishes stale items (404) from bugs. */
export class ApiError extends Error {
  constructor(readonly status: number, message: string) {
    super(message);
    this.name = "ApiError";
  }
}

async function asJson<T>(response: Response): Promise<T> {
  if (!response.ok) {
    let detail = response.statusText;
    try {
      const body = (await response.json()) as { error?: string };
      if (body && typeof body.error === "string") detail = body.error;
    } catch {
      // non-JSON error body, keep the status text
    }
    throw new ApiError(response.status, detail);
  }
  return (await response.json()) as T;
}

export class ApiClient {
  constructor(private readonly base: string = "") {}

  async pending(limit = 20, cursor?: string | null): Promise<PendingPage> {
    const params = new URLSearchParams({ limit: String(limit) });
    if (cursor) params.set("cursor", cursor);
    const response = await fetch(`${this.base}/api/pending?${params}`);
    return asJson<PendingPage>(response);
  }

  async decide(request: DecisionRequest): Promise<DecisionAck> {
    const response = await fetch(`${this.base}/api/decisions`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(request),
    });
    return asJson<DecisionAck>(response);
  }

  async stats(): Promise<Stats> {
    const response = await fetch(`${this.base}/api/stats`);
    return asJson<Stats>(response);
  }

  async exportCorpus(outDir?: string): Promise<{ out_dir: string; count: number }> {
    const response = await fetch(`${this.base}/api/export`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(outDir ? { out_dir: outDir } : {}),
    });
    return asJson<{ out_dir: string; count: number }>(response);
  }
}
