// Thin typed client over the gateway endpoints. fetch is injectable so the
// tests can run against a scripted fake.
export class GatewayError extends Error {
    status;
    constructor(status, message) {
        super(message);
        this.status = status;
    }
}
export class GatewayClient {
    baseUrl;
    fetchFn;
    constructor(baseUrl, fetchFn = (url, init) => fetch(url, init)) {
        this.baseUrl = baseUrl;
        this.fetchFn = fetchFn;
        this.baseUrl = baseUrl.replace(/\/+$/, "");
    }
    async request(path, init) {
        const response = await this.fetchFn(this.baseUrl + path, init);
        if (!response.ok && response.status !== 204) {
            let detail = response.statusText;
            try {
                const body = await response.json();
                if (body && typeof body.error === "string")
                    detail = body.error;
            }
            catch {
                // non-JSON error body; keep the status text
            }
            throw new GatewayError(response.status, detail);
        }
        return response;
    }
    post(path, payload) {
        return this.request(path, {
            method: "POST",
            headers: { "Content-Type": "application/json" },
            body: JSON.stringify(payload),
        });
    }
    async status() {
        return (await this.request("/status")).json();
    }
    async parse(text) {
        return (await this.post("/model/parse", { text })).json();
    }
    async sendMessage(sender, message) {
        return (await this.post("/webhooks/rest", { sender, message })).json();
    }
    async fetchTracker(sessionId) {
        const response = await this.request(`/sessions/${encodeURIComponent(sessionId)}/tracker`);
        return parseTrackerNdjson(await response.text());
    }
    async submitFeedback(sessionId, messageIndex, verdict) {
        await this.post(`/sessions/${encodeURIComponent(sessionId)}/feedback`, { message_index: messageIndex, verdict });
    }
}
export function parseTrackerNdjson(text) {
    return text
        .split("\n")
        .filter((line) => line.trim().length > 0)
        .map((line) => JSON.parse(line));
}
