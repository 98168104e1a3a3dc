"""A small deterministic HTTP server for tests and demos.

Files under a document root are served as-is. An override table can script
other responses, one per line::

    /gone          404
    /old           301  /new.html
    /slowpage      200  12000        # 200 after a 12 s delay
    /echo-form     200  ECHO         # echo method, query and body

Every request is recorded as ``(method, path_and_query)``.
"""

from __future__ import annotations

import mimetypes
import os
import posixpath
import threading
from dataclasses import dataclass
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from urllib.parse import parse_qs, unquote, urlsplit

__all__ = ["Override", "FixtureServer", "parse_overrides", "load_overrides"]

FIXED_DATE = "Thu, 01 Jan 1998 00:00:00 GMT"


@dataclass(frozen=True)
class Override:
    status: int
    location: str | None = None
    delay_ms: int = 0
    echo: bool = False


def parse_overrides(text: str) -> dict[str, Override]:
    table = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        fields = line.split()
        if len(fields) not in (2, 3):
            raise ValueError(f"line {lineno}: expected PATH STATUS [LOCATION|DELAY_MS|ECHO]")
        path, status = fields[0], fields[1]
        if not status.isdigit():
            raise ValueError(f"line {lineno}: bad status {status!r}")
        extra = fields[2] if len(fields) == 3 else None
        code = int(status)
        if extra is None:
            table[path] = Override(code)
        elif extra == "ECHO":
            table[path] = Override(code, echo=True)
        elif extra.isdigit() and not 300 <= code < 400:
            table[path] = Override(code, delay_ms=int(extra))
        else:
            table[path] = Override(code, location=extra)
    return table


def load_overrides(path: str) -> dict[str, Override]:
    with open(path, encoding="utf-8") as fh:
        return parse_overrides(fh.read())


class _Handler(BaseHTTPRequestHandler):
    server_version = "fixture/1.0"
    sys_version = ""
    protocol_version = "HTTP/1.0"

    def log_message(self, format, *args):
        pass

    def version_string(self):
        return self.server_version

    def date_time_string(self, timestamp=None):
        return FIXED_DATE

    def do_GET(self):
        self._handle(b"")

    def do_HEAD(self):
        self._handle(b"", head=True)

    def do_POST(self):
        length = int(self.headers.get("Content-Length") or 0)
        self._handle(self.rfile.read(length) if length else b"")

    def _send(self, status, body: bytes, ctype="text/html; charset=utf-8", extra=(), head=False):
        self.send_response(status)
        self.send_header("Content-Type", ctype)
        self.send_header("Content-Length", str(len(body)))
        for key, value in extra:
            self.send_header(key, value)
        self.end_headers()
        if not head:
            self.wfile.write(body)

    def _handle(self, body: bytes, head=False):
        fixture: FixtureServer = self.server.fixture
        fixture._record(self.command, self.path)
        parts = urlsplit(self.path)
        path = unquote(parts.path)
        rule = fixture.overrides.get(path)
        if rule is None and path == "/slow":
            ms = parse_qs(parts.query).get("ms", ["0"])[0]
            rule = Override(200, delay_ms=int(ms) if ms.isdigit() else 0)
            if not fixture._pause(rule.delay_ms):
                return
            return self._send(200, f"<html><body>slept {rule.delay_ms} ms</body></html>".encode(), head=head)
        if rule is not None:
            if rule.delay_ms and not fixture._pause(rule.delay_ms):
                return
            if rule.echo:
                text = f"{self.command} {parts.query} {body.decode('utf-8', 'replace')}"
                return self._send(rule.status, text.encode("utf-8"), "text/plain; charset=utf-8", head=head)
            if rule.location is not None:
                return self._send(rule.status, b"", extra=[("Location", rule.location)], head=head)
            if rule.status != 200:
                msg = f"<html><body>{rule.status}</body></html>".encode()
                return self._send(rule.status, msg, head=head)
        self._serve_file(path, head)

    def _serve_file(self, path, head):
        fixture: FixtureServer = self.server.fixture
        rel = posixpath.normpath(path).lstrip("/")
        if rel.startswith(".."):
            return self._send(404, b"<html><body>404</body></html>", head=head)
        full = os.path.join(fixture.root, *[p for p in rel.split("/") if p and p != "."])
        if os.path.isdir(full):
            full = os.path.join(full, "index.html")
        if not os.path.isfile(full):
            return self._send(404, b"<html><body>404</body></html>", head=head)
        with open(full, "rb") as fh:
            data = fh.read()
        ctype, _ = mimetypes.guess_type(full)
        if ctype is None:
            ctype = "text/html"
        if ctype.startswith("text/"):
            ctype += "; charset=utf-8"
        self._send(200, data, ctype, head=head)


class FixtureServer:
    """Threaded HTTP server over ``root``; use as a context manager or call start/stop."""

    def __init__(self, root: str, overrides: dict[str, Override] | None = None,
                 host: str = "127.0.0.1", port: int = 0):
        if not os.path.isdir(root):
            raise FileNotFoundError(f"fixture root {root!r} is not a directory")
        self.root = root
        self.overrides = dict(overrides or {})
        self._log: list[tuple[str, str]] = []
        self._lock = threading.Lock()
        self._stop = threading.Event()
        self._httpd = ThreadingHTTPServer((host, port), _Handler)
        self._httpd.daemon_threads = True
        self._httpd.fixture = self
        self._thread: threading.Thread | None = None

    @property
    def port(self) -> int:
        return self._httpd.server_address[1]

    @property
    def base_url(self) -> str:
        return f"http://{self._httpd.server_address[0]}:{self.port}"

    def url(self, path: str = "/") -> str:
        return self.base_url + path

    def _record(self, method, target):
        with self._lock:
            self._log.append((method, target))

    def _pause(self, ms) -> bool:
        """Sleep ``ms`` unless the server stops first; False if stopped."""
        return not self._stop.wait(ms / 1000)

    @property
    def log(self) -> list[tuple[str, str]]:
        with self._lock:
            return list(self._log)

    def reset_log(self) -> None:
        with self._lock:
            self._log.clear()

    def start(self) -> "FixtureServer":
        self._thread = threading.Thread(target=self._httpd.serve_forever, name="fixture-server", daemon=True)
        self._thread.start()
        return self

    def stop(self) -> None:
        self._stop.set()
        self._httpd.shutdown()
        self._httpd.server_close()

    def serve_forever(self) -> None:
        self._httpd.serve_forever()

    def __enter__(self):
        return self.start()

    def __exit__(self, *exc):
        self.stop()
