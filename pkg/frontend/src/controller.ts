// Conversation state machine, DOM-free. One send in flight at a time
// (further sends queue), inspector data fetched in parallel with each send,
// idempotent feedback badges, and full transcript rebuild from the server
// tracker on demand.

import { GatewayClient, GatewayError } from "./client.js";
import { turnsFromEvents } from "./transcript.js";
import type { ChatTurnView, ParseResult, Verdict } from "./types.js";

export interface ControllerState {
  turns: ChatTurnView[];
  banner: string | null;          // blocking condition, e.g. model not loaded
  retryText: string | null;       // failed send, offered for retry
  busy: boolean;
  verdicts: Map<number, Verdict>; // messageIndex -> last acknowledged verdict
  sessionExpired: boolean;
}

export class ChatController {
  private state: ControllerState = {
    turns: [],
    banner: null,
    retryText: null,
    busy: false,
    verdicts: new Map(),
    sessionExpired: false,
  };
  private queue: string[] = [];
  private inspectors = new Map<number, ParseResult>();

  constructor(private client: GatewayClient, private sessionId: string,
              private onChange: (state: ControllerState) => void = () => {}) {}

  snapshot(): ControllerState {
    return this.state;
  }

  inspectorFor(messageIndex: number): ParseResult | undefined {
    return this.inspectors.get(messageIndex);
  }

  private emit(): void {
    this.onChange(this.state);
  }

  /** Queue a message; non-empty text only. Resolves when the send (and any
   * queued ones ahead of it) has been processed. */
  async send(text: string): Promise<void> {
    const trimmed = text.trim();
    if (!trimmed) return;
    this.queue.push(trimmed);
    if (this.state.busy) return;
    await this.drain();
  }

  async retry(): Promise<void> {
    const text = this.state.retryText;
    if (!text) return;
    this.state.retryText = null;
    await this.send(text);
  }

  private async drain(): Promise<void> {
    this.state.busy = true;
    this.emit();
    try {
      while (this.queue.length > 0) {
        const text = this.queue.shift()!;
        await this.sendOne(text);
      }
    } finally {
      this.state.busy = false;
      this.emit();
    }
  }

  private async sendOne(text: string): Promise<void> {
    // Inspector data comes from the stateless parse endpoint, fetched in
    // parallel with the conversational turn.
    const parsePromise = this.client.parse(text).catch(() => undefined);
    let replies;
    try {
      replies = await this.client.sendMessage(this.sessionId, text);
    } catch (err) {
      if (err instanceof GatewayError && err.status === 503) {
        this.state.banner = "model not loaded";
      } else {
        this.state.banner = null;
        this.state.retryText = text;
      }
      this.emit();
      return;
    }
    this.state.banner = null;
    await this.refresh();
    const parsed = await parsePromise;
    if (parsed) {
      const lastUser = [...this.state.turns].reverse()
        .find((t) => t.direction === "user" && t.text === text);
      if (lastUser) {
        this.inspectors.set(lastUser.messageIndex, parsed);
        lastUser.entities = parsed.entities;
        lastUser.ranking = parsed.intent_ranking;
        lastUser.fallbackReason = parsed.fallback_reason;
      }
    }
    void replies; // transcript is rebuilt from the tracker, the source of truth
    this.emit();
  }

  /** Rebuild the transcript from the server tracker (pure function of it). */
  async refresh(): Promise<void> {
    const events = await this.client.fetchTracker(this.sessionId);
    this.state.turns = turnsFromEvents(events);
    for (const turn of this.state.turns) {
      const verdict = this.state.verdicts.get(turn.messageIndex);
      if (verdict) turn.verdict = verdict;
    }
    this.emit();
  }

  async submitFeedback(messageIndex: number, verdict: Verdict): Promise<void> {
    if (this.state.verdicts.get(messageIndex) === verdict) return; // idempotent
    try {
      await this.client.submitFeedback(this.sessionId, messageIndex, verdict);
    } catch (err) {
      if (err instanceof GatewayError && err.status === 404) {
        this.state.sessionExpired = true;
        this.emit();
        return;
      }
      throw err;
    }
    this.state.verdicts.set(messageIndex, verdict);
    const turn = this.state.turns.find((t) => t.messageIndex === messageIndex);
    if (turn) turn.verdict = verdict;
    this.emit();
  }
}

export function newSessionId(): string {
  const bytes = new Uint8Array(8);
  crypto.getRandomValues(bytes);
  return "web-" + Array.from(bytes, (b) => b.toString(16).padStart(2, "0")).join("");
}

const STORAGE_KEY = "banglabot-session-id";

export function persistentSessionId(storage: Pick<Storage, "getItem" | "setItem">): string {
  const existing = storage.getItem(STORAGE_KEY);
  if (existing) return existing;
  const fresh = newSessionId();
  storage.setItem(STORAGE_KEY, fresh);
  return fresh;
}
