"""HTTP/JSON surface for the operator console.

Plain stdlib server, desk scale: reads are consistent snapshots under one
lock, every mutating call funnels through the engine's serialized command
path and is journaled before it has any effect. Party credentials are shared
tokens mapped to party ids; answers are accepted only from the addressed
party. The pending-authorization list supports long-polling via ?wait_ms=.
"""

from __future__ import annotations

import json
import threading
import time
from datetime import timedelta
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from urllib.parse import parse_qs, urlparse

from .engine import Engine
from .errors import AlreadyStopped, EngineStopped, OutOfOrderDate
from .journal import wire_date

POLL_INTERVAL_SECONDS = 0.05


def tokens_from_config(config: dict) -> dict[str, str]:
    """token -> party id; parties without an api_token use their id as token."""
    tokens = {}
    for raw in config.get("parties", []):
        tokens[raw.get("api_token", raw["party_id"])] = raw["party_id"]
    return tokens


class EngineServer:
    def __init__(self, engine: Engine, tokens: dict[str, str], host: str = "127.0.0.1", port: int = 0):
        self.engine = engine
        self.tokens = tokens
        self.lock = threading.RLock()
        handler = _build_handler(self)
        self.httpd = ThreadingHTTPServer((host, port), handler)
        self.thread: threading.Thread | None = None

    @property
    def address(self) -> str:
        host, port = self.httpd.server_address[:2]
        return f"http://{host}:{port}"

    def start(self) -> None:
        self.thread = threading.Thread(target=self.httpd.serve_forever, daemon=True)
        self.thread.start()

    def shutdown(self) -> None:
        self.httpd.shutdown()
        self.httpd.server_close()
        if self.thread is not None:
            self.thread.join(timeout=5)


def _build_handler(server: EngineServer):
    engine = server.engine

    class Handler(BaseHTTPRequestHandler):
        protocol_version = "HTTP/1.1"

        def log_message(self, fmt, *args):  # silence default stderr noise
            pass

        # -- plumbing ------------------------------------------------------

        def _send(self, status: int, body: dict | list) -> None:
            data = json.dumps(body).encode("utf-8")
            self.send_response(status)
            self.send_header("Content-Type", "application/json")
            self.send_header("Content-Length", str(len(data)))
            self.send_header("Access-Control-Allow-Origin", "*")
            self.send_header("Access-Control-Allow-Headers", "Content-Type, X-Party-Token")
            self.send_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS")
            self.end_headers()
            self.wfile.write(data)

        def _party(self) -> str | None:
            token = self.headers.get("X-Party-Token", "")
            return server.tokens.get(token)

        def _read_body(self) -> dict:
            length = int(self.headers.get("Content-Length", "0"))
            if not length:
                return {}
            try:
                return json.loads(self.rfile.read(length) or b"{}")
            except json.JSONDecodeError:
                return {}

        def do_OPTIONS(self):  # CORS preflight for the console; 204 carries no body
            self.send_response(204)
            self.send_header("Access-Control-Allow-Origin", "*")
            self.send_header("Access-Control-Allow-Headers", "Content-Type, X-Party-Token")
            self.send_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS")
            self.send_header("Content-Length", "0")
            self.end_headers()

        # -- reads -----------------------------------------------------------

        def do_GET(self):
            url = urlparse(self.path)
            query = {k: v[0] for k, v in parse_qs(url.query).items()}
            party = self._party()
            if party is None:
                self._send(401, {"error": "unknown party credential"})
                return
            with server.lock:
                if url.path == "/state":
                    self._send(200, engine.state_view())
                    return
                if url.path == "/obligations":
                    self._send(200, engine.obligations_view(status=query.get("status")))
                    return
                if url.path == "/events":
                    self._send(200, engine.events_view())
                    return
                if url.path == "/journal":
                    start = int(query.get("from", "0"))
                    entries = [
                        {"seq": e.seq, "kind": e.kind, "payload": e.payload, "digest": e.digest}
                        for e in engine.journal.since(start)
                    ]
                    self._send(200, {"entries": entries, "head": engine.journal.head_digest})
                    return
            if url.path == "/authorizations/pending":
                self._pending(query)
                return
            self._send(404, {"error": "not found"})

        def _pending(self, query: dict) -> None:
            wait_ms = int(query.get("wait_ms", "0"))
            deadline = time.monotonic() + wait_ms / 1000.0
            while True:
                with server.lock:
                    items = [r.snapshot() for r in engine.open_authorizations(query.get("party"))]
                if items or time.monotonic() >= deadline:
                    self._send(200, items)
                    return
                time.sleep(POLL_INTERVAL_SECONDS)

        # -- mutations -----------------------------------------------------------

        def do_POST(self):
            url = urlparse(self.path)
            body = self._read_body()  # always drain: keep-alive reuses the stream
            party = self._party()
            if party is None:
                self._send(401, {"error": "unknown party credential"})
                return
            parts = [p for p in url.path.split("/") if p]
            try:
                with server.lock:
                    if parts[:1] == ["authorizations"] and parts[2:] == ["answer"]:
                        self._answer(parts[1], party, body)
                        return
                    if parts == ["observations"]:
                        datum = {"type": "observation", **body}
                        datum.setdefault("notifier", party)
                        entry = engine.consume(datum)
                        self._send(200, {"queued_seq": entry.seq})
                        return
                    if parts[:1] == ["control"] and len(parts) == 2:
                        self._control(parts[1], body)
                        return
                    if parts == ["commands"]:
                        entry = engine.consume(dict(body))
                        self._send(200, {"queued_seq": entry.seq})
                        return
                self._send(404, {"error": "not found"})
            except EngineStopped:
                self._send(409, {"error": "engine is stopped"})
            except AlreadyStopped:
                self._send(409, {"error": "already stopped"})
            except OutOfOrderDate as exc:
                self._send(409, {"error": str(exc)})

        def _answer(self, request_id: str, party: str, body: dict) -> None:
            response = body.get("response", "")
            reason = engine.answer_precheck(request_id, party, response)
            if reason == "unknown-request":
                self._send(404, {"error": reason})
                return
            if reason == "already-answered":
                self._send(409, {"error": reason})
                return
            if reason == "wrong-party":
                self._send(401, {"error": reason})
                return
            if reason is not None:
                self._send(400, {"error": reason})
                return
            entry = engine.consume({
                "type": "answer", "request_id": request_id,
                "party": party, "response": response,
            })
            self._send(200, {"queued_seq": entry.seq, "status": "answered"})

        def _control(self, command: str, body: dict) -> None:
            if command in ("pause", "resume", "stop"):
                entry = engine.consume({"type": command, "reason": body.get("reason")})
                self._send(200, {"queued_seq": entry.seq, "mode": engine.mode})
                return
            if command == "step":
                if body.get("date"):
                    day = wire_date(body["date"])
                elif engine.last_step_date is not None:
                    day = engine.last_step_date + timedelta(days=1)
                else:
                    self._send(400, {"error": "no prior step; a date is required"})
                    return
                entry = engine.consume({"type": "step-day", "date": day})
                report = engine.last_report
                self._send(200, {
                    "queued_seq": entry.seq,
                    "date": day.isoformat(),
                    "settled": report.settled if report else [],
                    "suspended": report.suspended if report else [],
                })
                return
            self._send(404, {"error": "unknown control command"})

    return Handler
