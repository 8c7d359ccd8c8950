// Payload shapes of the gateway API and the view model they roll up into.

export interface EntitySpan {
  entity: string;
  value: string;
  start: number;
  end: number;
}

export interface RankedIntent {
  intent: string;
  confidence: number;
}

export interface ParseResult {
  text: string;
  routed_text: string;
  language: string;
  intent: string;
  confidence: number;
  intent_ranking: RankedIntent[];
  entities: EntitySpan[];
  fallback: boolean;
  fallback_reason: string | null;
}

export interface BotReply {
  recipient_id: string;
  text: string;
}

export interface TrackerEvent {
  kind: "session_started" | "user" | "bot" | "action";
  timestamp: number;
  payload: Record<string, unknown>;
}

export type Verdict = "correct" | "wrong";

export interface ChatTurnView {
  direction: "user" | "bot";
  text: string;
  /** index of the backing tracker event, used for feedback */
  messageIndex: number;
  // user turns
  language?: string;
  intent?: string;
  confidence?: number;
  fallback?: boolean;
  entities?: EntitySpan[];
  ranking?: RankedIntent[];
  fallbackReason?: string | null;
  // bot turns
  action?: string;
  verdict?: Verdict;
}
