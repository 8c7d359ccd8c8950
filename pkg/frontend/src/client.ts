// Thin typed client over the gateway endpoints. fetch is injectable so the
// tests can run against a scripted fake.

import type { BotReply, ParseResult, TrackerEvent, Verdict } from "./types.js";

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export class GatewayError extends Error {
  constructor(public status: number, message: string) {
    super(message);
  }
}

export class GatewayClient {
  constructor(private baseUrl: string,
              private fetchFn: FetchLike = (url, init) => fetch(url, init)) {
    this.baseUrl = baseUrl.replace(/\/+$/, "");
  }

  private async request(path: string, init?: RequestInit): Promise<Response> {
    const response = await this.fetchFn(this.baseUrl + path, init);
    if (!response.ok && response.status !== 204) {
      let detail = response.statusText;
      try {
        const body = await response.json();
        if (body && typeof body.error === "string") detail = body.error;
      } catch {
        // non-JSON error body; keep the status text
      }
      throw new GatewayError(response.status, detail);
    }
    return response;
  }

  private post(path: string, payload: unknown): Promise<Response> {
    return this.request(path, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(payload),
    });
  }

  async status(): Promise<{ model_loaded: boolean; pipeline: string | null }> {
    return (await this.request("/status")).json();
  }

  async parse(text: string): Promise<ParseResult> {
    return (await this.post("/model/parse", { text })).json();
  }

  async sendMessage(sender: string, message: string): Promise<BotReply[]> {
    return (await this.post("/webhooks/rest", { sender, message })).json();
  }

  async fetchTracker(sessionId: string): Promise<TrackerEvent[]> {
    const response = await this.request(`/sessions/${encodeURIComponent(sessionId)}/tracker`);
    return parseTrackerNdjson(await response.text());
  }

  async submitFeedback(sessionId: string, messageIndex: number, verdict: Verdict): Promise<void> {
    await this.post(`/sessions/${encodeURIComponent(sessionId)}/feedback`,
                    { message_index: messageIndex, verdict });
  }
}

export function parseTrackerNdjson(text: string): TrackerEvent[] {
  return text
    .split("\n")
    .filter((line) => line.trim().length > 0)
    .map((line) => JSON.parse(line) as TrackerEvent);
}
