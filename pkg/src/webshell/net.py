"""HTTP retrieval: GET/POST with redirects, link validation, URL helpers."""

from __future__ import annotations

import http.client
from dataclasses import dataclass, field
from urllib.parse import quote, unquote, urldefrag, urljoin, urlsplit

from . import tasks

__all__ = [
    "NetError",
    "HttpError",
    "HttpResponse",
    "url_encode",
    "url_decode",
    "fetch",
    "request",
    "get_page",
    "post_page",
    "validate_link",
    "resolve_url",
    "UrlConnection",
    "USER_AGENT",
    "DEFAULT_TIMEOUT",
    "MAX_REDIRECTS",
    "same_host",
]

USER_AGENT = "webshell/0.1"
DEFAULT_TIMEOUT = 30.0
MAX_REDIRECTS = 5
REDIRECT_CODES = frozenset({301, 302, 303, 307, 308})
FORM_TYPE = "application/x-www-form-urlencoded"


class NetError(Exception):
    pass


class HttpError(NetError):
    def __init__(self, status: int, reason: str, url: str):
        super().__init__(f"HTTP {status} {reason} for {url}")
        self.status = status
        self.reason = reason
        self.url = url


@dataclass
class HttpResponse:
    status: int
    reason: str
    headers: list[tuple[str, str]] = field(default_factory=list)
    body: str = ""
    url: str = ""
    version: str = "HTTP/1.1"

    def header(self, name: str) -> str | None:
        name = name.lower()
        for key, value in self.headers:
            if key.lower() == name:
                return value
        return None

    @property
    def status_line(self) -> str:
        return f"{self.version} {self.status} {self.reason}"


def _pairs(params) -> list[tuple[str, str]]:
    if params is None:
        return []
    if isinstance(params, dict):
        return [(str(k), str(v)) for k, v in params.items()]
    return [(str(k), str(v)) for k, v in params]


def url_encode(params) -> str:
    return "&".join(f"{quote(k, safe='')}={quote(v, safe='')}" for k, v in _pairs(params))


def url_decode(encoded: str) -> list[tuple[str, str]]:
    if not encoded:
        return []
    out = []
    for part in encoded.split("&"):
        key, _, value = part.partition("=")
        out.append((unquote(key), unquote(value)))
    return out


def _split(url: str):
    try:
        parts = urlsplit(url)
    except ValueError as exc:
        raise NetError(f"unparseable URL {url!r}") from exc
    if parts.scheme not in ("http", "https") or not parts.hostname:
        raise NetError(f"not an absolute http URL: {url!r}")
    try:
        parts.port
    except ValueError as exc:
        raise NetError(f"bad port in URL {url!r}") from exc
    return parts


def _once(method: str, url: str, body: bytes | None, headers, timeout: float) -> HttpResponse:
    tasks.checkpoint()
    parts = _split(url)
    conn_cls = http.client.HTTPSConnection if parts.scheme == "https" else http.client.HTTPConnection
    target = parts.path or "/"
    if parts.query:
        target += "?" + parts.query
    send = {"User-Agent": USER_AGENT, "Connection": "close"}
    if body is not None:
        send["Content-Type"] = FORM_TYPE
    for key, value in headers:
        send[key] = value
    conn = conn_cls(parts.hostname, parts.port, timeout=timeout)
    try:
        conn.request(method, target, body=body, headers=send)
        resp = conn.getresponse()
        raw = resp.read()
    except (OSError, ValueError, http.client.HTTPException) as exc:
        raise NetError(f"{method} {url} failed: {exc}") from exc
    finally:
        conn.close()
    version = "HTTP/1.0" if resp.version == 10 else "HTTP/1.1"
    return HttpResponse(
        status=resp.status,
        reason=resp.reason,
        headers=list(resp.getheaders()),
        body=raw.decode("utf-8", errors="replace"),
        url=url,
        version=version,
    )


def request(method: str, url: str, form=None, headers=None, *,
            follow_redirects: bool = True, timeout: float = DEFAULT_TIMEOUT) -> HttpResponse:
    """One HTTP exchange, following up to MAX_REDIRECTS redirects if asked."""
    header_list = _pairs(headers)
    body = url_encode(form).encode("ascii") if method == "POST" else None
    hops = 0
    while True:
        resp = _once(method, url, body, header_list, timeout)
        location = resp.header("Location")
        if not follow_redirects or resp.status not in REDIRECT_CODES or location is None:
            return resp
        hops += 1
        if hops > MAX_REDIRECTS:
            raise NetError(f"more than {MAX_REDIRECTS} redirects starting from {url}")
        url = urljoin(url, location)
        if resp.status in (301, 302, 303) and method == "POST":
            method, body = "GET", None


def _with_query(url: str, params) -> str:
    query = url_encode(params)
    if not query:
        return url
    base, frag = urldefrag(url)
    sep = "&" if urlsplit(base).query else "?"
    return base + sep + query


def fetch(url: str, params=None, headers=None, *, timeout: float = DEFAULT_TIMEOUT) -> HttpResponse:
    """GET with redirects; raises HttpError unless the final status is 2xx."""
    resp = request("GET", _with_query(url, params), headers=headers, timeout=timeout)
    if not 200 <= resp.status < 300:
        raise HttpError(resp.status, resp.reason, resp.url)
    return resp


def get_page(url: str, params=None, headers=None, *, timeout: float = DEFAULT_TIMEOUT) -> str:
    return fetch(url, params, headers, timeout=timeout).body


def post_page(url: str, form=None, headers=None, *, timeout: float = DEFAULT_TIMEOUT) -> str:
    resp = request("POST", url, form or [], headers, timeout=timeout)
    if not 200 <= resp.status < 300:
        raise HttpError(resp.status, resp.reason, resp.url)
    return resp.body


class UrlConnection:
    """Lazy single-request connection; nothing is sent until a header is read."""

    def __init__(self, url: str, timeout: float = DEFAULT_TIMEOUT):
        self.url = url
        self.timeout = timeout
        self._response: HttpResponse | None = None

    @property
    def response(self) -> HttpResponse:
        if self._response is None:
            self._response = request("GET", self.url, follow_redirects=False, timeout=self.timeout)
        return self._response

    def header_field(self, key) -> str | None:
        """Index 0 is the status line; otherwise ``key`` is a header name."""
        if isinstance(key, int) or (isinstance(key, str) and key.isdigit()):
            if int(key) != 0:
                raise NetError("only header field index 0 (the status line) is supported")
            return self.response.status_line
        return self.response.header(key)


def validate_link(url: str, *, timeout: float = DEFAULT_TIMEOUT) -> bool:
    """True iff a single GET (redirects not followed) answers 200."""
    try:
        return UrlConnection(url, timeout).response.status == 200
    except Exception:
        return False


def resolve_url(base: str, href: str) -> str | None:
    href = (href or "").strip()
    if not href or href.startswith("#"):
        return None
    try:
        joined = urljoin(base, href)
        resolved, _ = urldefrag(joined)
        parts = urlsplit(resolved)
    except ValueError:
        return None
    if parts.scheme not in ("http", "https") or not parts.netloc:
        return None
    return resolved


def same_host(a: str, b: str) -> bool:
    try:
        return urlsplit(a).netloc.lower() == urlsplit(b).netloc.lower()
    except ValueError:
        return False

