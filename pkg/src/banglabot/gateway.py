"""HTTP gateway: parse and converse endpoints, sessions, feedback capture.

Endpoints (JSON over HTTP/1.1, UTF-8):

    POST /model/parse        {"text": ..., "session_id"?: ...}
    POST /webhooks/rest      {"sender": ..., "message": ...}
    GET  /status
    GET  /sessions/{id}/tracker      (one JSON event per line)
    POST /sessions/{id}/feedback     {"message_index": int, "verdict": "correct"|"wrong"}
    GET  /ui/...                     (static chat console, when configured)

Sessions are per-sender trackers; requests for one session are serialized
while distinct sessions proceed in parallel.  Feedback is appended to a
newline-delimited JSON log.  Built on the standard library HTTP server so
the deployment path has no framework dependency.
"""

from __future__ import annotations

import json
import os
import threading
import time
from dataclasses import dataclass
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path

from .dialogue import Tracker
from .language import IdentityStub, RuleTable, TransliterationClient, route_message
from .modelio import TrainedBot, load_bot

_STATIC_TYPES = {
    ".html": "text/html; charset=utf-8",
    ".js": "application/javascript; charset=utf-8",
    ".css": "text/css; charset=utf-8",
    ".svg": "image/svg+xml",
    ".json": "application/json; charset=utf-8",
    ".map": "application/json; charset=utf-8",
}


@dataclass
class GatewayConfig:
    port: int = 5005
    host: str = "127.0.0.1"
    model_path: str | None = None
    feedback_log: str = "feedback.ndjson"
    static_dir: str | None = None
    transliteration: str = "identity"  # "identity" | "ruletable"

    @classmethod
    def load(cls, path: str | None = None) -> GatewayConfig:
        """Flat key=value file plus BANGLABOT_PORT / BANGLABOT_MODEL overrides."""
        config = cls()
        if path:
            for no, raw in enumerate(Path(path).read_text("utf-8").split("\n"), start=1):
                line = raw.strip()
                if not line or line.startswith("#"):
                    continue
                if "=" not in line:
                    raise ValueError(f"{path}:{no}: expected key=value")
                key, _, value = line.partition("=")
                key, value = key.strip(), value.strip()
                if key == "port":
                    config.port = int(value)
                elif key == "host":
                    config.host = value
                elif key == "model":
                    config.model_path = value
                elif key == "feedback_log":
                    config.feedback_log = value
                elif key == "static_dir":
                    config.static_dir = value
                elif key == "transliteration":
                    config.transliteration = value
                else:
                    raise ValueError(f"{path}:{no}: unknown key {key!r}")
        if os.environ.get("BANGLABOT_PORT"):
            config.port = int(os.environ["BANGLABOT_PORT"])
        if os.environ.get("BANGLABOT_MODEL"):
            config.model_path = os.environ["BANGLABOT_MODEL"]
        return config

    def client(self) -> TransliterationClient:
        if self.transliteration == "ruletable":
            return RuleTable()
        return IdentityStub()


class GatewayState:
    """Shared mutable state behind the handler: model, sessions, feedback."""

    def __init__(self, bot: TrainedBot | None, config: GatewayConfig):
        self.config = config
        self.client = config.client()
        self.sessions: dict[str, Tracker] = {}
        self._locks: dict[str, threading.Lock] = {}
        self._registry_lock = threading.Lock()
        self._feedback_lock = threading.Lock()
        self.set_bot(bot)

    def set_bot(self, bot: TrainedBot | None) -> None:
        self.bot = bot
        self.engine = bot.engine() if bot else None

    def session_lock(self, session_id: str) -> threading.Lock:
        with self._registry_lock:
            return self._locks.setdefault(session_id, threading.Lock())

    def tracker(self, session_id: str, create: bool = False) -> Tracker | None:
        with self._registry_lock:
            tracker = self.sessions.get(session_id)
            if tracker is None and create:
                tracker = Tracker(session_id)
                self.sessions[session_id] = tracker
            return tracker

    def record_feedback(self, entry: dict) -> None:
        line = json.dumps(entry, ensure_ascii=False, sort_keys=True)
        with self._feedback_lock:
            with open(self.config.feedback_log, "a", encoding="utf-8") as fh:
                fh.write(line + "\n")

    # ----- request-level operations -------------------------------------

    def parse_message(self, text: str) -> dict:
        routed = route_message(text, self.client)
        prediction = self.bot.pipeline.parse(routed.text)
        intent, confidence = prediction.ranking.top
        return {
            "text": text,
            "routed_text": routed.text,
            "language": routed.language.kind,
            "intent": intent,
            "confidence": confidence,
            "intent_ranking": [{"intent": i, "confidence": c}
                               for i, c in prediction.ranking.ranked],
            "entities": [{"entity": s.entity, "value": s.value,
                          "start": s.start, "end": s.end}
                         for s in prediction.entities],
            "fallback": prediction.fallback,
            "fallback_reason": prediction.fallback_reason,
        }

    def webhook_turn(self, sender: str, message: str) -> list[dict]:
        with self.session_lock(sender):
            tracker = self.tracker(sender, create=True)
            routed = route_message(message, self.client)
            prediction = self.bot.pipeline.parse(routed.text)
            replies = self.engine.run_turn(tracker, prediction, message,
                                           language=routed.language.kind)
        return [{"recipient_id": sender, "text": text} for text in replies]


class _Handler(BaseHTTPRequestHandler):
    state: GatewayState  # assigned by make_server

    # ----- plumbing ------------------------------------------------------

    def log_message(self, fmt, *args):  # quiet by default
        if os.environ.get("BANGLABOT_HTTP_LOG"):
            super().log_message(fmt, *args)

    def _send(self, code: int, body: bytes | None = None,
              content_type: str = "application/json; charset=utf-8") -> None:
        self.send_response(code)
        self.send_header("Access-Control-Allow-Origin", "*")
        self.send_header("Access-Control-Allow-Headers", "Content-Type")
        self.send_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS")
        if body is not None:
            self.send_header("Content-Type", content_type)
            self.send_header("Content-Length", str(len(body)))
        else:
            self.send_header("Content-Length", "0")
        self.end_headers()
        if body is not None:
            self.wfile.write(body)

    def _send_json(self, code: int, payload) -> None:
        self._send(code, json.dumps(payload, ensure_ascii=False).encode("utf-8"))

    def _error(self, code: int, message: str) -> None:
        self._send_json(code, {"error": message})

    def _read_json(self) -> dict | None:
        length = int(self.headers.get("Content-Length") or 0)
        raw = self.rfile.read(length) if length else b""
        if not raw:
            return None
        try:
            body = json.loads(raw.decode("utf-8"))
        except (ValueError, UnicodeDecodeError):
            return None
        return body if isinstance(body, dict) else None

    # ----- routes ----------------------------------------------------------

    def do_OPTIONS(self):
        self._send(204)

    def do_GET(self):
        path = self.path.split("?", 1)[0]
        if path == "/status":
            bot = self.state.bot
            return self._send_json(200, {
                "model_loaded": bot is not None,
                "pipeline": bot.pipeline.config.name if bot else None,
            })
        if path.startswith("/sessions/") and path.endswith("/tracker"):
            session_id = path[len("/sessions/"):-len("/tracker")]
            tracker = self.state.tracker(session_id)
            if tracker is None:
                return self._error(404, f"unknown session {session_id!r}")
            with self.state.session_lock(session_id):
                body = tracker.export()
            return self._send(200, body.encode("utf-8"), "application/x-ndjson; charset=utf-8")
        if path == "/" and self.state.config.static_dir:
            return self._static("index.html")
        if path.startswith("/ui/") and self.state.config.static_dir:
            return self._static(path[len("/ui/"):] or "index.html")
        return self._error(404, f"no route for GET {path}")

    def do_POST(self):
        path = self.path.split("?", 1)[0]
        if path == "/model/parse":
            return self._parse()
        if path == "/webhooks/rest":
            return self._webhook()
        if path.startswith("/sessions/") and path.endswith("/feedback"):
            return self._feedback(path[len("/sessions/"):-len("/feedback")])
        return self._error(404, f"no route for POST {path}")

    def _parse(self):
        body = self._read_json()
        if body is None or not isinstance(body.get("text"), str) or not body["text"].strip():
            return self._error(400, "body must be JSON with a non-empty 'text'")
        if self.state.bot is None:
            return self._error(503, "model not loaded")
        self._send_json(200, self.state.parse_message(body["text"]))

    def _webhook(self):
        body = self._read_json()
        if (body is None or not isinstance(body.get("sender"), str) or not body["sender"]
                or not isinstance(body.get("message"), str) or not body["message"].strip()):
            return self._error(400, "body must be JSON with 'sender' and 'message'")
        if self.state.bot is None:
            return self._error(503, "model not loaded")
        self._send_json(200, self.state.webhook_turn(body["sender"], body["message"]))

    def _feedback(self, session_id: str):
        tracker = self.state.tracker(session_id)
        if tracker is None:
            return self._error(404, f"unknown session {session_id!r}")
        body = self._read_json()
        if body is None or body.get("verdict") not in ("correct", "wrong") \
                or not isinstance(body.get("message_index"), int):
            return self._error(400, "body must carry integer 'message_index' and verdict correct|wrong")
        if not (0 <= body["message_index"] < len(tracker.events)):
            return self._error(400, f"message_index {body['message_index']} out of range")
        self.state.record_feedback({
            "session_id": session_id,
            "message_index": body["message_index"],
            "verdict": body["verdict"],
            "timestamp": int(time.time()),
        })
        self._send(204)

    def _static(self, rel: str):
        root = Path(self.state.config.static_dir).resolve()
        target = (root / rel).resolve()
        if not str(target).startswith(str(root)) or not target.is_file():
            return self._error(404, f"no static file {rel!r}")
        body = target.read_bytes()
        self._send(200, body, _STATIC_TYPES.get(target.suffix, "application/octet-stream"))


def make_server(state: GatewayState, host: str | None = None,
                port: int | None = None) -> ThreadingHTTPServer:
    handler = type("BoundHandler", (_Handler,), {"state": state})
    server = ThreadingHTTPServer(
        (host if host is not None else state.config.host,
         port if port is not None else state.config.port),
        handler)
    return server


def serve(config: GatewayConfig) -> None:
    bot = load_bot(config.model_path) if config.model_path else None
    state = GatewayState(bot, config)
    server = make_server(state)
    name = bot.pipeline.config.name if bot else "no model"
    print(f"banglabot gateway on http://{config.host}:{server.server_address[1]} ({name})")
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        server.server_close()
