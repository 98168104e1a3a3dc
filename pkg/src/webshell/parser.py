"""Merciful HTML parsing: any text in, a tag tree out.

The tokenizer never fails: markup it cannot make sense of is handed on as
literal text. The tree builder then consults the DTD to imply end tags that
the page left out, and drops end tags it cannot place.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from .dtd import Dtd, dtd_builtin
from .tree import RAW_TEXT_ELEMENTS, Comment, Element, TagData, TagTree, Text

__all__ = [
    "StartTag",
    "EndTag",
    "TextToken",
    "CommentToken",
    "Doctype",
    "tokenize",
    "parse",
    "Parser",
]


@dataclass
class StartTag:
    name: str
    attributes: list = field(default_factory=list)
    self_closing: bool = False


@dataclass
class EndTag:
    name: str


@dataclass
class TextToken:
    raw: str


@dataclass
class CommentToken:
    raw: str


@dataclass
class Doctype:
    raw: str


_TAG_NAME = re.compile(r"[A-Za-z][^\s/>]*")
_SEP = re.compile(r"(?:\s|/(?!>))*")
_SPACE = re.compile(r"\s*")
_ATTR_NAME = re.compile(r"[^\s/>=]+|=[^\s/>=]*")
_UNQUOTED = re.compile(r"[^\s>]*")
_RAW_CLOSE = {n: re.compile(rf"</{n}(?=[\s/>])", re.IGNORECASE) for n in RAW_TEXT_ELEMENTS}


def _start_tag(text: str, pos: int):
    """Scan a start tag at ``text[pos] == '<'``; None if input ends first."""
    n = len(text)
    m = _TAG_NAME.match(text, pos + 1)
    name = m.group().lower()
    p = m.end()
    attrs: list[tuple[str, str | None]] = []
    while True:
        p = _SEP.match(text, p).end()
        if p >= n:
            return None
        ch = text[p]
        if ch == ">":
            return StartTag(name, attrs, False), p + 1
        if ch == "/":  # only "/>" survives _SEP
            return StartTag(name, attrs, True), p + 2
        am = _ATTR_NAME.match(text, p)
        key = am.group().lower()
        p = am.end()
        q = _SPACE.match(text, p).end()
        value = None
        if q < n and text[q] == "=":
            p = _SPACE.match(text, q + 1).end()
            if p >= n:
                return None
            quote = text[p]
            if quote in "\"'":
                end = text.find(quote, p + 1)
                if end < 0:
                    return None
                value = text[p + 1:end]
                p = end + 1
            else:
                vm = _UNQUOTED.match(text, p)
                value = vm.group()
                p = vm.end()
        attrs.append((key, value))


def _markup(text: str, pos: int):
    """Token starting at ``pos`` plus the index after it, or None."""
    nxt = text[pos + 1:pos + 2]
    if text.startswith("<!--", pos):
        end = text.find("-->", pos + 4)
        if end < 0:
            return CommentToken(text[pos + 4:]), len(text)
        return CommentToken(text[pos + 4:end]), end + 3
    if nxt in ("!", "?"):
        end = text.find(">", pos + 2)
        if end < 0:
            return None
        return Doctype(text[pos:end + 1]), end + 1
    if nxt == "/":
        m = _TAG_NAME.match(text, pos + 2)
        if not m:
            return None
        end = text.find(">", m.end())
        if end < 0:
            return None
        return EndTag(m.group().lower()), end + 1
    if nxt.isascii() and nxt.isalpha():
        return _start_tag(text, pos)
    return None


def tokenize(text: str) -> list:
    tokens: list = []
    emit = tokens.append
    n = len(text)
    i = 0
    while i < n:
        j = text.find("<", i)
        if j < 0:
            emit(TextToken(text[i:]))
            break
        if j > i:
            emit(TextToken(text[i:j]))
        found = _markup(text, j)
        if found is None:
            k = text.find("<", j + 1)
            k = n if k < 0 else k
            emit(TextToken(text[j:k]))
            i = k
            continue
        tok, i = found
        emit(tok)
        if isinstance(tok, StartTag) and tok.name in RAW_TEXT_ELEMENTS and not tok.self_closing:
            m = _RAW_CLOSE[tok.name].search(text, i)
            end = m.start() if m else n
            if end > i:
                emit(TextToken(text[i:end]))
            i = end
    return tokens


def _build(tokens, dtd: Dtd) -> TagTree:
    tree = TagTree(dtd)
    nodes = tree._nodes
    lookup = dtd.lookup
    stack = [tree.root]
    names: list[str | None] = [None]

    def auto_close(name):
        while True:
            for k in range(len(stack) - 1, 0, -1):
                rule = lookup(names[k])
                if name in rule.auto_close_on:
                    del stack[k:], names[k:]
                    break
                if not rule.end_optional:
                    return
            else:
                return

    def add_text(cls, value):
        parent = stack[-1]
        kids = nodes[parent].children
        if cls is Text and kids:
            last = nodes[kids[-1]]
            if type(last.content) is Text:
                last.content = Text(last.content.value + value)
                return
        tree._add(cls(value), parent)

    for tok in tokens:
        kind = type(tok)
        if kind is TextToken:
            add_text(Text, tok.raw)
        elif kind is StartTag:
            auto_close(tok.name)
            nid = tree._add(Element(TagData(tok.name, tok.attributes)), stack[-1])
            if not (tok.self_closing or lookup(tok.name).void):
                stack.append(nid)
                names.append(tok.name)
        elif kind is EndTag:
            for k in range(len(stack) - 1, 0, -1):
                if names[k] == tok.name:
                    break
            else:
                continue
            if all(lookup(x).end_optional for x in names[k + 1:]):
                del stack[k:], names[k:]
        elif kind is CommentToken:
            add_text(Comment, tok.raw)
    return tree


def parse(text: str | bytes, dtd: Dtd | None = None) -> TagTree:
    """Parse ``text`` into a tree rooted at a synthetic ``#root`` element.

    Bytes are decoded as UTF-8, with undecodable bytes replaced.
    """
    if isinstance(text, (bytes, bytearray)):
        text = bytes(text).decode("utf-8", errors="replace")
    return _build(tokenize(text), dtd or dtd_builtin("frameset"))


class Parser:
    """A parser bound to one DTD; the DTD may be overridden per call."""

    def __init__(self, dtd: Dtd | None = None):
        self.dtd = dtd or dtd_builtin("frameset")

    def parse(self, text: str, dtd: Dtd | None = None) -> TagTree:
        return parse(text, dtd or self.dtd)
