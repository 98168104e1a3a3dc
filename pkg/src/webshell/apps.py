"""Applications built on the toolkit: a grep that follows links, a link
checker that strikes out dead anchors, and a small site mirror."""

from __future__ import annotations

import hashlib
import os
import posixpath
import re
from dataclasses import dataclass, field
from urllib.parse import unquote, urldefrag, urlsplit

from . import net, tasks
from .dtd import dtd_builtin
from .iterate import TreeIterator
from .parser import parse
from .tree import Element, TagData, TagTree, node_create

__all__ = [
    "GrepResult",
    "LinkEntry",
    "ValidationReport",
    "webgrep",
    "annotate_links",
    "webcopy",
    "anchors",
    "local_path",
    "WebCopyError",
    "DEFAULT_FETCH_TIMEOUT_MS",
    "PARALLEL_FANOUT",
]

DEFAULT_FETCH_TIMEOUT_MS = 10000
PARALLEL_FANOUT = 8


class WebCopyError(OSError):
    pass


@dataclass
class GrepResult:
    matches: list[str] = field(default_factory=list)
    visited: int = 0
    failed: list[str] = field(default_factory=list)


@dataclass(frozen=True)
class LinkEntry:
    href: str
    resolved: str | None
    verdict: str  # valid | broken | skipped


@dataclass
class ValidationReport:
    page_url: str
    links: list[LinkEntry]
    annotated_html: str

    def broken(self) -> list[LinkEntry]:
        return [e for e in self.links if e.verdict == "broken"]


def anchors(tree: TagTree) -> list[int]:
    """Anchor element ids with an href attribute, in document order."""
    out = []
    for nid in TreeIterator(tree, tree.root, "dfs", "tag"):
        tag = tree._nodes[nid].content.tag
        if tag.name == "a" and tag.has_attrib("href"):
            out.append(nid)
    return out


def _href(tree: TagTree, nid) -> str:
    return tree._nodes[nid].content.tag.get_attrib("href") or ""


def _fetch(url: str, timeout_ms: int) -> net.HttpResponse:
    # socket timeout a little past the task timeout so abandoned workers end
    sock_timeout = timeout_ms / 1000 + 1
    box = {}

    def work():
        box["resp"] = net.fetch(url, timeout=sock_timeout)
        return ""

    tasks.with_timeout(work, timeout_ms, min(timeout_ms, 500))
    return box["resp"]


def _fetch_level(urls, timeout_ms, parallel):
    """Yield (url, response or None) in the given order."""
    if not parallel:
        for url in urls:
            try:
                yield url, _fetch(url, timeout_ms)
            except tasks.TaskFailed:
                yield url, None
        return
    for start in range(0, len(urls), PARALLEL_FANOUT):
        batch = urls[start:start + PARALLEL_FANOUT]
        got = {}

        def work(u):
            try:
                got[u] = _fetch(u, timeout_ms)
            except tasks.TaskFailed:
                got[u] = None
            return ""

        workers = [tasks.spawn(lambda u=u: work(u)) for u in batch]
        for w in workers:
            w.wait()
            w.destroy()
        for url in batch:
            yield url, got.get(url)


def _crawl(start_url, depth, timeout_ms, parallel, raw_hrefs, same_host_only, on_page):
    """Level-by-level crawl; ``on_page(url, resp, tree)`` sees each fetched page."""
    levels = [[start_url]]
    seen = {start_url}
    failed = []
    dtd = dtd_builtin("frameset")
    for i in range(depth):
        nxt = []
        levels.append(nxt)
        for url, resp in _fetch_level(levels[i], timeout_ms, parallel):
            if resp is None:
                failed.append(url)
                continue
            tree = parse(resp.body, dtd)
            for nid in anchors(tree):
                href = _href(tree, nid)
                link = href if raw_hrefs else net.resolve_url(resp.url, href)
                if not link:
                    continue
                if same_host_only and not net.same_host(link, start_url):
                    continue
                if link not in seen:
                    nxt.append(link)
                    seen.add(link)
            on_page(url, resp, tree)
    return failed


def webgrep(start_url: str, depth: int, pattern: str, *, timeout_ms: int = DEFAULT_FETCH_TIMEOUT_MS,
            parallel: bool = False, raw_hrefs: bool = False) -> GrepResult:
    """Pages fewer than ``depth`` links from ``start_url`` whose body matches ``pattern``."""
    if depth < 0:
        raise ValueError("depth must be non-negative")
    regex = re.compile(pattern, re.IGNORECASE)
    result = GrepResult()

    def on_page(url, resp, tree):
        result.visited += 1
        if regex.search(resp.body):
            result.matches.append(url)

    result.failed = _crawl(start_url, depth, timeout_ms, parallel, raw_hrefs, False, on_page)
    return result


def annotate_links(page_url: str, *, timeout: float = net.DEFAULT_TIMEOUT) -> ValidationReport:
    """Check every anchor on a page and wrap the broken ones in <strike>."""
    resp = net.fetch(page_url, timeout=timeout)
    tree = parse(resp.body, dtd_builtin("frameset"))
    found = anchors(tree)
    resolved = [net.resolve_url(resp.url, _href(tree, nid)) for nid in found]

    checks = {}
    for url in resolved:
        if url is not None and url not in checks:
            checks[url] = tasks.spawn(lambda u=url: "1" if net.validate_link(u, timeout=timeout) else "0")
    verdicts = {}
    for url, task in checks.items():
        task.wait()
        verdicts[url] = "valid" if task.status is tasks.TaskStatus.DONE and task.result() == "1" else "broken"
        task.destroy()

    links = []
    for nid, url in zip(found, resolved):
        verdict = "skipped" if url is None else verdicts[url]
        links.append(LinkEntry(_href(tree, nid), url, verdict))
        if verdict == "broken":
            _wrap(tree, nid, "strike")
    return ValidationReport(page_url, links, tree.dump())


def _wrap(tree: TagTree, nid, name: str) -> int:
    parent = tree.parent(nid)
    index = tree.children(parent).index(nid)
    wrapper = tree.paste(parent, index, node_create(Element(TagData(name))))
    tree.move(nid, wrapper, 0)
    return wrapper


def local_path(url: str) -> str:
    """Relative file path for a mirrored URL (posix separators)."""
    parts = urlsplit(url)
    path = unquote(parts.path) or "/"
    if path.endswith("/"):
        path += "index.html"
    segs = [s for s in posixpath.normpath(path).split("/") if s not in ("", ".", "..")]
    if not segs:
        segs = ["index.html"]
    if parts.query:
        stem, ext = posixpath.splitext(segs[-1])
        digest = hashlib.sha1(parts.query.encode("utf-8")).hexdigest()[:10]
        segs[-1] = f"{stem}_{digest}{ext}"
    return "/".join(segs)


def webcopy(start_url: str, depth: int, out_dir: str, *,
            timeout_ms: int = DEFAULT_FETCH_TIMEOUT_MS) -> int:
    """Mirror same-host pages within ``depth`` links; returns the number of files written."""
    if depth < 0:
        raise ValueError("depth must be non-negative")
    pages = []  # (url, final url, tree)

    def on_page(url, resp, tree):
        pages.append((url, resp.url, tree))

    _crawl(start_url, depth, timeout_ms, False, False, True, on_page)

    saved = {}
    for url, final, _ in pages:
        saved.setdefault(url, local_path(url))
    for url, final, _ in pages:
        saved.setdefault(final, saved[url])

    written = set()
    for url, final, tree in pages:
        rel = saved[url]
        if rel in written:
            continue
        here = posixpath.dirname(rel)
        for nid in anchors(tree):
            href = _href(tree, nid)
            target = net.resolve_url(final, href)
            if target is None or target not in saved:
                continue
            frag = urldefrag(href)[1]
            new = posixpath.relpath(saved[target], here or ".")
            if frag:
                new += "#" + frag
            tag = tree.content(nid).tag
            tag.set_attrib("href", new)
            tree.set_content(nid, Element(tag))
        dest = os.path.join(out_dir, *rel.split("/"))
        try:
            os.makedirs(os.path.dirname(dest), exist_ok=True)
            with open(dest, "w", encoding="utf-8") as fh:
                fh.write(tree.dump())
        except OSError as exc:
            raise WebCopyError(f"cannot write {dest}: {exc.strerror or exc}") from exc
        written.add(rel)
    return len(written)
