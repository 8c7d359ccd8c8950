// Pure transcript logic: tracker events -> renderable turns, and entity
// highlighting. Kept DOM-free so it is directly unit-testable; the rendered
// transcript is a pure function of the server tracker.

import type { ChatTurnView, EntitySpan, RankedIntent, TrackerEvent } from "./types.js";

export function turnsFromEvents(events: TrackerEvent[]): ChatTurnView[] {
  const turns: ChatTurnView[] = [];
  events.forEach((event, index) => {
    if (event.kind === "user") {
      const p = event.payload as {
        text: string; intent: string; confidence: number; language?: string;
        fallback?: boolean;
        entities?: { entity: string; value: string }[];
        ranking?: { intent: string; confidence: number }[];
      };
      turns.push({
        direction: "user",
        text: p.text,
        messageIndex: index,
        intent: p.intent,
        confidence: p.confidence,
        language: p.language ?? "",
        fallback: Boolean(p.fallback),
        ranking: (p.ranking ?? []) as RankedIntent[],
        entities: (p.entities ?? []).map((e) => ({ start: 0, end: 0, ...e } as EntitySpan)),
      });
    } else if (event.kind === "bot") {
      const p = event.payload as { action: string; text: string };
      turns.push({
        direction: "bot",
        text: p.text,
        action: p.action,
        messageIndex: index,
      });
    }
  });
  return turns;
}

export interface TextSegment {
  text: string;
  entity?: string;
}

/** Split text into plain and highlighted segments; spans are clamped to the
 * text bounds so a bad offset can never paint outside the message. */
export function highlightSegments(text: string, entities: EntitySpan[]): TextSegment[] {
  const chars = Array.from(text); // code points, matching server offsets
  const spans = entities
    .map((e) => ({
      start: Math.max(0, Math.min(e.start, chars.length)),
      end: Math.max(0, Math.min(e.end, chars.length)),
      entity: e.entity,
    }))
    .filter((s) => s.start < s.end)
    .sort((a, b) => a.start - b.start);

  const segments: TextSegment[] = [];
  let cursor = 0;
  for (const span of spans) {
    if (span.start < cursor) continue; // overlapping span, keep the first
    if (span.start > cursor) {
      segments.push({ text: chars.slice(cursor, span.start).join("") });
    }
    segments.push({ text: chars.slice(span.start, span.end).join(""), entity: span.entity });
    cursor = span.end;
  }
  if (cursor < chars.length) {
    segments.push({ text: chars.slice(cursor).join("") });
  }
  return segments;
}

export function describeFallback(reason: string | null | undefined): string {
  if (reason === "threshold") return "fallback: confidence below threshold";
  if (reason === "ambiguity") return "fallback: top intents too close";
  return "fallback";
}
