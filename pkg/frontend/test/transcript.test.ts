import assert from "node:assert/strict";
import { test } from "node:test";

import { parseTrackerNdjson } from "../src/client.js";
import { describeFallback, highlightSegments, turnsFromEvents } from "../src/transcript.js";
import type { TrackerEvent } from "../src/types.js";

const TRACKER_NDJSON = [
  '{"kind": "session_started", "timestamp": 0, "payload": {}}',
  '{"kind": "user", "timestamp": 1, "payload": {"text": "দাম koto", "intent": "ask_price", ' +
    '"confidence": 0.91, "language": "bangla", "fallback": false, ' +
    '"entities": [{"entity": "item", "value": "বই"}], ' +
    '"ranking": [{"intent": "ask_price", "confidence": 0.91}]}}',
  '{"kind": "action", "timestamp": 2, "payload": {"action": "utter_ask_price"}}',
  '{"kind": "bot", "timestamp": 3, "payload": {"action": "utter_ask_price", "text": "500 taka"}}',
].join("\n") + "\n";

test("tracker ndjson parses one event per line", () => {
  const events = parseTrackerNdjson(TRACKER_NDJSON);
  assert.equal(events.length, 4);
  assert.equal(events[0].kind, "session_started");
  assert.equal(events[3].kind, "bot");
});

test("turns mirror tracker order and carry message indexes", () => {
  const events = parseTrackerNdjson(TRACKER_NDJSON);
  const turns = turnsFromEvents(events);
  assert.equal(turns.length, 2); // session_started and action events do not render
  assert.equal(turns[0].direction, "user");
  assert.equal(turns[0].intent, "ask_price");
  assert.equal(turns[0].messageIndex, 1);
  assert.equal(turns[1].direction, "bot");
  assert.equal(turns[1].action, "utter_ask_price");
  assert.equal(turns[1].messageIndex, 3);
});

test("transcript is a pure function of the tracker", () => {
  const events = parseTrackerNdjson(TRACKER_NDJSON);
  assert.deepEqual(turnsFromEvents(events), turnsFromEvents(events));
});

test("highlight segments cover the text exactly", () => {
  const text = "ঢাকা theke asbo";
  const segments = highlightSegments(text, [
    { entity: "city", value: "ঢাকা", start: 0, end: 4 },
  ]);
  assert.deepEqual(segments.map((s) => s.text).join(""), text);
  assert.equal(segments[0].entity, "city");
  assert.equal(segments[0].text, "ঢাকা");
});

test("mid-text span splits into three segments", () => {
  const segments = highlightSegments("a dhaka b", [
    { entity: "city", value: "dhaka", start: 2, end: 7 },
  ]);
  assert.deepEqual(segments.map((s) => [s.text, s.entity ?? null]), [
    ["a ", null], ["dhaka", "city"], [" b", null],
  ]);
});

test("out-of-range spans are clamped, never painted outside the text", () => {
  const text = "short";
  const segments = highlightSegments(text, [
    { entity: "x", value: "?", start: 3, end: 99 },
    { entity: "y", value: "?", start: -5, end: 2 },
  ]);
  assert.equal(segments.map((s) => s.text).join(""), text);
  for (const segment of segments) {
    assert.ok(text.includes(segment.text));
  }
});

test("overlapping spans keep the first", () => {
  const segments = highlightSegments("abcdef", [
    { entity: "x", value: "abc", start: 0, end: 3 },
    { entity: "y", value: "bcd", start: 1, end: 4 },
  ]);
  assert.deepEqual(segments.map((s) => s.entity ?? null), ["x", null]);
});

test("fallback reasons render human-readable", () => {
  assert.match(describeFallback("threshold"), /threshold/);
  assert.match(describeFallback("ambiguity"), /close/);
  assert.equal(describeFallback(null), "fallback");
});

test("empty tracker renders empty transcript", () => {
  assert.deepEqual(turnsFromEvents([] as TrackerEvent[]), []);
});
