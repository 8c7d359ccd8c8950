// DOM wiring for the chat console: transcript & bubbles, NLU inspector
// panel, feedback buttons, retry affordance and status banner. All
// conversation logic lives in controller.ts.
import { GatewayClient } from "./client.js";
import { ChatController, persistentSessionId } from "./controller.js";
import { describeFallback, highlightSegments } from "./transcript.js";
const gatewayUrl = window.BANGLABOT_URL
    ?? window.location.origin;
const client = new GatewayClient(gatewayUrl);
const sessionId = persistentSessionId(window.localStorage);
const transcriptEl = document.getElementById("transcript");
const inspectorEl = document.getElementById("inspector");
const bannerEl = document.getElementById("banner");
const inputEl = document.getElementById("message");
const sendEl = document.getElementById("send");
const sessionEl = document.getElementById("session");
let selectedIndex = null;
const controller = new ChatController(client, sessionId, render);
function el(tag, className, text) {
    const node = document.createElement(tag);
    if (className)
        node.className = className;
    if (text !== undefined)
        node.textContent = text;
    return node;
}
function renderTurn(turn) {
    const row = el("div", `turn ${turn.direction}`);
    const bubble = el("div", "bubble");
    if (turn.direction === "user" && turn.entities && turn.entities.length > 0) {
        for (const segment of highlightSegments(turn.text, turn.entities)) {
            if (segment.entity) {
                const mark = el("mark", "entity", segment.text);
                mark.title = segment.entity;
                bubble.appendChild(mark);
            }
            else {
                bubble.appendChild(document.createTextNode(segment.text));
            }
        }
    }
    else {
        bubble.textContent = turn.text;
    }
    row.appendChild(bubble);
    const meta = el("div", "meta");
    if (turn.direction === "user") {
        const bits = [];
        if (turn.language)
            bits.push(turn.language);
        if (turn.intent !== undefined) {
            bits.push(`${turn.intent} ${(100 * (turn.confidence ?? 0)).toFixed(0)}%`);
        }
        meta.textContent = bits.join(" · ");
        if (turn.fallback)
            meta.appendChild(el("span", "fallback-flag", " fallback"));
        bubble.onclick = () => {
            selectedIndex = turn.messageIndex;
            render(controller.snapshot());
        };
    }
    else {
        meta.textContent = turn.action ?? "";
        const feedback = el("span", "feedback");
        for (const verdict of ["correct", "wrong"]) {
            const button = el("button", `verdict ${verdict}`, verdict === "correct" ? "✓" : "✗");
            button.title = `mark ${verdict}`;
            if (turn.verdict === verdict)
                button.classList.add("chosen");
            button.onclick = () => void controller.submitFeedback(turn.messageIndex, verdict);
            feedback.appendChild(button);
        }
        meta.appendChild(feedback);
        if (turn.verdict)
            meta.appendChild(el("span", "badge", ` marked ${turn.verdict}`));
    }
    row.appendChild(meta);
    return row;
}
function renderInspector(state) {
    inspectorEl.textContent = "";
    const userTurns = state.turns.filter((t) => t.direction === "user");
    const turn = userTurns.reverse().find((t) => selectedIndex === null ? true : t.messageIndex === selectedIndex);
    if (!turn) {
        inspectorEl.appendChild(el("p", "hint", "send a message to inspect its parse"));
        return;
    }
    inspectorEl.appendChild(el("h3", undefined, `"${turn.text}"`));
    const parsed = controller.inspectorFor(turn.messageIndex);
    const ranking = parsed?.intent_ranking ?? turn.ranking ?? [];
    if (turn.fallback) {
        inspectorEl.appendChild(el("p", "fallback-flag", describeFallback(parsed?.fallback_reason ?? turn.fallbackReason)));
    }
    for (const r of ranking.slice(0, 6)) {
        const row = el("div", "rank-row");
        row.appendChild(el("span", "rank-name", r.intent));
        const bar = el("div", "bar");
        const fill = el("div", "fill");
        fill.style.width = `${Math.round(100 * r.confidence)}%`;
        bar.appendChild(fill);
        row.appendChild(bar);
        row.appendChild(el("span", "rank-val", r.confidence.toFixed(3)));
        inspectorEl.appendChild(row);
    }
    const entities = parsed?.entities ?? turn.entities ?? [];
    if (entities.length > 0) {
        const list = el("ul", "entities");
        for (const e of entities) {
            list.appendChild(el("li", undefined, `${e.entity} = ${e.value}`));
        }
        inspectorEl.appendChild(el("h4", undefined, "entities"));
        inspectorEl.appendChild(list);
    }
}
function render(state) {
    transcriptEl.textContent = "";
    for (const turn of state.turns) {
        transcriptEl.appendChild(renderTurn(turn));
    }
    if (state.retryText !== null) {
        const row = el("div", "retry-row");
        row.appendChild(el("span", "error", "message failed to send"));
        const retry = el("button", "retry", "retry");
        retry.onclick = () => void controller.retry();
        row.appendChild(retry);
        transcriptEl.appendChild(row);
    }
    transcriptEl.scrollTop = transcriptEl.scrollHeight;
    bannerEl.hidden = state.banner === null && !state.sessionExpired;
    bannerEl.textContent = state.sessionExpired
        ? "session expired on the server; reload to start a new one"
        : state.banner ?? "";
    sendEl.disabled = inputEl.value.trim().length === 0;
    renderInspector(state);
}
async function start() {
    sessionEl.textContent = sessionId;
    try {
        const status = await client.status();
        if (!status.model_loaded)
            bannerEl.hidden = false, bannerEl.textContent = "model not loaded";
    }
    catch {
        bannerEl.hidden = false;
        bannerEl.textContent = `cannot reach gateway at ${gatewayUrl}`;
    }
    await controller.refresh().catch(() => undefined); // fresh session has no tracker yet
    inputEl.addEventListener("input", () => {
        sendEl.disabled = inputEl.value.trim().length === 0;
    });
    const submit = () => {
        const text = inputEl.value;
        if (!text.trim())
            return;
        inputEl.value = "";
        sendEl.disabled = true;
        void controller.send(text);
    };
    sendEl.addEventListener("click", submit);
    inputEl.addEventListener("keydown", (event) => {
        if (event.key === "Enter")
            submit();
    });
    render(controller.snapshot());
}
void start();
