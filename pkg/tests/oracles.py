"""Reference implementations used to cross-check the library.

They work straight from the fixture files (no HTTP) and use the standard
library's HTML parser, so they share no code with the package under test.
"""

import os
import re
from collections import deque
from html.parser import HTMLParser
from urllib.parse import urldefrag, urljoin, urlsplit


class _Anchors(HTMLParser):
    def __init__(self):
        super().__init__(convert_charrefs=False)
        self.hrefs = []

    def handle_starttag(self, tag, attrs):
        if tag == "a":
            for k, v in attrs:
                if k == "href":
                    self.hrefs.append(v or "")
                    break


def anchor_hrefs(html):
    p = _Anchors()
    p.feed(html)
    p.close()
    return p.hrefs


def site_file(root, path):
    full = os.path.join(root, *[p for p in path.split("/") if p])
    if os.path.isdir(full):
        full = os.path.join(full, "index.html")
    return full if os.path.isfile(full) else None


def resolve(base, href):
    if not href or href.startswith("#"):
        return None
    url = urldefrag(urljoin(base, href))[0]
    parts = urlsplit(url)
    return url if parts.scheme in ("http", "https") and parts.netloc else None


def crawl(root, base_url, start_path, depth, failing=(), same_host=False):
    """Level-bounded crawl over files; returns (fetched urls in order, failed urls, bodies)."""
    start = base_url + start_path
    host = urlsplit(start).netloc
    seen = {start}
    level = [start]
    fetched, failed, bodies = [], [], {}
    for _ in range(depth):
        nxt = []
        for url in level:
            parts = urlsplit(url)
            path = parts.path
            local = site_file(root, path) if parts.netloc == host else None
            if local is None or path in failing:
                failed.append(url)
                continue
            with open(local, encoding="utf-8") as fh:
                body = fh.read()
            fetched.append(url)
            bodies[url] = body
            for href in anchor_hrefs(body):
                link = resolve(url, href)
                if link is None or (same_host and urlsplit(link).netloc != host):
                    continue
                if link not in seen:
                    seen.add(link)
                    nxt.append(link)
        level = nxt
    return fetched, failed, bodies


def grep(root, base_url, start_path, depth, pattern, failing=()):
    fetched, failed, bodies = crawl(root, base_url, start_path, depth, failing)
    rx = re.compile(pattern, re.IGNORECASE)
    return [u for u in fetched if rx.search(bodies[u])], fetched, failed


def mirror_audit(root, base_url, start_path, depth, out_dir, file_for):
    """Check a mirror anchor by anchor against the source pages.

    ``file_for(url)`` gives the relative output path for a saved URL. A link
    whose target was saved must lead, relative to its own file, to that
    target's file; any other link must be left exactly as written. Returns
    (dangling, altered, files): lists of (file, href) breaking each rule,
    and the number of distinct files the mirror should hold.
    """
    fetched, _, bodies = crawl(root, base_url, start_path, depth, same_host=True)
    saved = {u: file_for(u) for u in fetched}
    dangling, altered = [], []
    for url in fetched:
        rel = saved[url]
        with open(os.path.join(out_dir, rel), encoding="utf-8") as fh:
            out_hrefs = anchor_hrefs(fh.read())
        src_hrefs = anchor_hrefs(bodies[url])
        if len(out_hrefs) != len(src_hrefs):
            altered.append((rel, "<anchor count changed>"))
            continue
        here = os.path.dirname(os.path.join(out_dir, rel))
        for orig, new in zip(src_hrefs, out_hrefs):
            target = resolve(url, orig)
            if target in saved:
                landed = os.path.normpath(os.path.join(here, urldefrag(new)[0]))
                want = os.path.normpath(os.path.join(out_dir, saved[target]))
                if landed != want or not os.path.isfile(landed):
                    dangling.append((rel, new))
            elif new != orig:
                altered.append((rel, new))
    return dangling, altered, len(set(saved.values()))


def strike_wrapped_anchors(html):
    """Count <strike><a ...> openings by a plain text scan."""
    return len(re.findall(r"<strike><a\b", html))


def unwrap(tree, name):
    """Splice the children of every ``name`` element into its parent, in place."""
    for nid in list(tree.walk()):
        if nid in tree and tree.tag_name(nid) == name:
            parent = tree.parent(nid)
            idx = tree.children(parent).index(nid)
            for k, child in enumerate(tree.children(nid)):
                tree.move(child, parent, idx + k)
            tree.cut(nid)
    return tree


class _DepthProbe(HTMLParser):
    VOID = {"br", "img", "hr", "meta", "link", "input", "area", "base", "col", "param",
            "basefont", "frame", "isindex"}

    def __init__(self):
        super().__init__(convert_charrefs=True)
        self.stack = []
        self.deepest = 0

    def handle_starttag(self, tag, attrs):
        if tag in self.VOID:
            self.deepest = max(self.deepest, len(self.stack))
            return
        self.stack.append(tag)
        self.deepest = max(self.deepest, len(self.stack) - 1)

    def handle_endtag(self, tag):
        if tag in self.stack:
            while self.stack.pop() != tag:
                pass

    def handle_data(self, data):
        if data.strip():
            self.deepest = max(self.deepest, len(self.stack))


def max_depth(html):
    """Deepest nesting level of elements and text, counting top-level nodes as 0.

    Only closed elements count as containers, so pages must close what they open.
    """
    probe = _DepthProbe()
    probe.feed(html)
    probe.close()
    return probe.deepest


def isomorphic(t1, n1, t2, n2):
    """Same content at every position, ignoring node ids."""
    if t1.content(n1) != t2.content(n2):
        return False
    k1, k2 = t1.children(n1), t2.children(n2)
    return len(k1) == len(k2) and all(isomorphic(t1, a, t2, b) for a, b in zip(k1, k2))
