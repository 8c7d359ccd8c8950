// End-to-end test against a live gateway serving a trained model.
// Skipped unless GATEWAY_URL points at one, e.g.:
//
//   banglabot gen-corpus --out data --seed 42 --intents 6 --examples 6 --entity-types 2
//   banglabot train --data data --pipeline P8 --out model --seed 7
//   banglabot serve --model model/model.bbm --port 5005 &
//   GATEWAY_URL=http://127.0.0.1:5005 npm test
import assert from "node:assert/strict";
import { test } from "node:test";
import { GatewayClient } from "../src/client.js";
import { ChatController, newSessionId } from "../src/controller.js";
const gatewayUrl = process.env.GATEWAY_URL;
test("live conversation with inspector and feedback", { skip: !gatewayUrl }, async () => {
    const client = new GatewayClient(gatewayUrl);
    const status = await client.status();
    assert.equal(status.model_loaded, true);
    const sessionId = newSessionId();
    const controller = new ChatController(client, sessionId);
    await controller.send("salam নমস্কার");
    const turns = controller.snapshot().turns;
    assert.ok(turns.length >= 2, "expected a user turn and at least one bot reply");
    const user = turns[0];
    assert.equal(user.direction, "user");
    assert.equal(user.intent, "greet");
    assert.ok((user.confidence ?? 0) > 0);
    const parsed = controller.inspectorFor(user.messageIndex);
    assert.ok(parsed, "inspector parse attached");
    assert.equal(parsed.intent, "greet");
    assert.ok(parsed.intent_ranking.length >= 2);
    const bot = turns.find((t) => t.direction === "bot");
    assert.ok(bot, "bot reply rendered");
    await controller.submitFeedback(bot.messageIndex, "correct");
    assert.equal(controller.snapshot().turns.find((t) => t.direction === "bot").verdict, "correct");
    // transcript is a pure function of the server tracker
    const fresh = new ChatController(client, sessionId);
    await fresh.refresh();
    assert.deepEqual(fresh.snapshot().turns.map((t) => [t.direction, t.text]), turns.map((t) => [t.direction, t.text]));
});
