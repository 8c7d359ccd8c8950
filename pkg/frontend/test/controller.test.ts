import assert from "node:assert/strict";
import { test } from "node:test";

import { GatewayClient } from "../src/client.js";
import { ChatController, persistentSessionId } from "../src/controller.js";

/** In-memory fake of the gateway: enough behavior to drive the controller. */
class FakeGateway {
  events: { kind: string; timestamp: number; payload: Record<string, unknown> }[] = [];
  feedback: { message_index: number; verdict: string }[] = [];
  failNextSend: number | null = null; // http status to fail with
  parseDelayed: Promise<void> = Promise.resolve();
  requests: string[] = [];

  client(): GatewayClient {
    return new GatewayClient("http://fake", (url, init) => this.handle(url, init));
  }

  private json(status: number, body: unknown): Response {
    return new Response(JSON.stringify(body), {
      status, headers: { "Content-Type": "application/json" },
    });
  }

  private push(kind: string, payload: Record<string, unknown>): void {
    this.events.push({ kind, timestamp: this.events.length, payload });
  }

  async handle(url: string, init?: RequestInit): Promise<Response> {
    const path = url.replace("http://fake", "");
    this.requests.push(path);
    const body = init?.body ? JSON.parse(init.body as string) : {};
    if (path === "/model/parse") {
      await this.parseDelayed;
      return this.json(200, {
        text: body.text, routed_text: body.text, language: "latin",
        intent: "greet", confidence: 0.9,
        intent_ranking: [{ intent: "greet", confidence: 0.9 },
                         { intent: "bye", confidence: 0.1 }],
        entities: [], fallback: false, fallback_reason: null,
      });
    }
    if (path === "/webhooks/rest") {
      if (this.failNextSend !== null) {
        const status = this.failNextSend;
        this.failNextSend = null;
        return this.json(status, { error: "nope" });
      }
      if (this.events.length === 0) this.push("session_started", {});
      this.push("user", {
        text: body.message, intent: "greet", confidence: 0.9, language: "latin",
        fallback: false, entities: [], ranking: [{ intent: "greet", confidence: 0.9 }],
      });
      this.push("action", { action: "utter_greet" });
      this.push("bot", { action: "utter_greet", text: `hi ${body.sender}` });
      return this.json(200, [{ recipient_id: body.sender, text: `hi ${body.sender}` }]);
    }
    if (path.endsWith("/tracker")) {
      if (this.events.length === 0) return this.json(404, { error: "unknown session" });
      const ndjson = this.events.map((e) => JSON.stringify(e)).join("\n") + "\n";
      return new Response(ndjson, { status: 200 });
    }
    if (path.endsWith("/feedback")) {
      if (this.events.length === 0) return this.json(404, { error: "unknown session" });
      if (body.message_index >= this.events.length) return this.json(400, { error: "bad index" });
      this.feedback.push(body);
      return new Response(null, { status: 204 });
    }
    if (path === "/status") return this.json(200, { model_loaded: true, pipeline: "P8" });
    return this.json(404, { error: `no route ${path}` });
  }
}

test("send appends the user turn and the bot reply", async () => {
  const gw = new FakeGateway();
  const controller = new ChatController(gw.client(), "s1");
  await controller.send("hello there");
  const turns = controller.snapshot().turns;
  assert.equal(turns.length, 2);
  assert.equal(turns[0].direction, "user");
  assert.equal(turns[0].text, "hello there");
  assert.equal(turns[1].direction, "bot");
  assert.equal(turns[1].text, "hi s1");
});

test("inspector data is attached to the sent turn", async () => {
  const gw = new FakeGateway();
  const controller = new ChatController(gw.client(), "s1");
  await controller.send("hello");
  const user = controller.snapshot().turns[0];
  const parsed = controller.inspectorFor(user.messageIndex);
  assert.ok(parsed);
  assert.equal(parsed.intent, "greet");
  assert.equal(parsed.intent_ranking.length, 2);
});

test("empty input is not sent", async () => {
  const gw = new FakeGateway();
  const controller = new ChatController(gw.client(), "s1");
  await controller.send("   ");
  assert.equal(controller.snapshot().turns.length, 0);
  assert.deepEqual(gw.requests, []);
});

test("503 raises the model banner and keeps the transcript", async () => {
  const gw = new FakeGateway();
  const controller = new ChatController(gw.client(), "s1");
  await controller.send("hello");
  gw.failNextSend = 503;
  await controller.send("again");
  const state = controller.snapshot();
  assert.equal(state.banner, "model not loaded");
  assert.equal(state.turns.length, 2); // earlier conversation preserved
});

test("network failure offers a retry that eventually sends", async () => {
  const gw = new FakeGateway();
  const controller = new ChatController(gw.client(), "s1");
  gw.failNextSend = 500;
  await controller.send("flaky");
  let state = controller.snapshot();
  assert.equal(state.retryText, "flaky");
  assert.equal(state.turns.length, 0);
  await controller.retry();
  state = controller.snapshot();
  assert.equal(state.retryText, null);
  assert.equal(state.turns.length, 2);
  assert.equal(state.turns[0].text, "flaky");
});

test("sends queue client-side: one in flight at a time", async () => {
  const gw = new FakeGateway();
  let release: () => void = () => {};
  gw.parseDelayed = new Promise((resolve) => { release = resolve; });
  const controller = new ChatController(gw.client(), "s1");
  const first = controller.send("one");
  const second = controller.send("two");
  release();
  await Promise.all([first, second]);
  const texts = controller.snapshot().turns.filter((t) => t.direction === "user")
    .map((t) => t.text);
  assert.deepEqual(texts, ["one", "two"]);
  const webhookCalls = gw.requests.filter((p) => p === "/webhooks/rest");
  assert.equal(webhookCalls.length, 2);
});

test("feedback round trip sets the badge and is idempotent", async () => {
  const gw = new FakeGateway();
  const controller = new ChatController(gw.client(), "s1");
  await controller.send("hello");
  const bot = controller.snapshot().turns.find((t) => t.direction === "bot")!;
  await controller.submitFeedback(bot.messageIndex, "wrong");
  await controller.submitFeedback(bot.messageIndex, "wrong"); // double submit
  assert.equal(gw.feedback.length, 1);
  assert.equal(controller.snapshot().turns.find((t) => t.direction === "bot")!.verdict, "wrong");
});

test("feedback badge survives a transcript rebuild", async () => {
  const gw = new FakeGateway();
  const controller = new ChatController(gw.client(), "s1");
  await controller.send("hello");
  const bot = controller.snapshot().turns.find((t) => t.direction === "bot")!;
  await controller.submitFeedback(bot.messageIndex, "correct");
  await controller.refresh();
  assert.equal(controller.snapshot().turns.find((t) => t.direction === "bot")!.verdict, "correct");
});

test("feedback on an expired session flips the prompt", async () => {
  const gw = new FakeGateway();
  const controller = new ChatController(gw.client(), "s1");
  await controller.send("hello");
  gw.events = []; // server lost the session
  await controller.submitFeedback(1, "correct");
  assert.equal(controller.snapshot().sessionExpired, true);
});

test("reload reproduces the same rendered sequence from the tracker", async () => {
  const gw = new FakeGateway();
  const controller = new ChatController(gw.client(), "s1");
  await controller.send("hello");
  await controller.send("dam koto");
  const before = controller.snapshot().turns.map((t) => [t.direction, t.text]);
  const fresh = new ChatController(gw.client(), "s1");
  await fresh.refresh();
  const after = fresh.snapshot().turns.map((t) => [t.direction, t.text]);
  assert.deepEqual(after, before);
});

test("persistent session id is stable per storage", () => {
  const store = new Map<string, string>();
  const storage = {
    getItem: (k: string) => store.get(k) ?? null,
    setItem: (k: string, v: string) => void store.set(k, v),
  };
  const a = persistentSessionId(storage);
  const b = persistentSessionId(storage);
  assert.equal(a, b);
  assert.match(a, /^web-[0-9a-f]{16}$/);
});
