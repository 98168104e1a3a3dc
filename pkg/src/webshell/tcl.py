"""Tcl-subset syntax: script parsing, list quoting, and ``expr`` parsing.

Nothing here evaluates anything; the parsed forms are consumed by
:mod:`webshell.interp`.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from functools import lru_cache

__all__ = [
    "TclError",
    "Word",
    "VarSub",
    "CmdSub",
    "Command",
    "parse_script",
    "parse_list",
    "format_list",
    "parse_expr",
    "line_of",
]


class TclError(Exception):
    """A script-level error; ``code`` mirrors Tcl's errorCode."""

    def __init__(self, message: str, code: str | None = None):
        super().__init__(message)
        self.code = code


@dataclass(frozen=True)
class VarSub:
    name: str
    index: tuple | None = None  # parts, substituted at run time


@dataclass(frozen=True)
class CmdSub:
    commands: tuple
    raw: str


@dataclass(frozen=True)
class Word:
    parts: tuple
    kind: str  # "bare", "brace" or "quote"
    raw: str

    @property
    def literal(self) -> str | None:
        if not self.parts:
            return ""
        if len(self.parts) == 1 and type(self.parts[0]) is str:
            return self.parts[0]
        return None


@dataclass(frozen=True)
class Command:
    words: tuple
    pos: int
    source: str


def line_of(source: str, pos: int) -> int:
    return source.count("\n", 0, pos) + 1


_VAR_NAME = re.compile(r"(?:[A-Za-z0-9_]|::)+")
_OCTAL = re.compile(r"[0-7]{1,3}")
_HEX = re.compile(r"[0-9a-fA-F]{1,2}")
_UNI = re.compile(r"[0-9a-fA-F]{1,4}")
_SIMPLE_ESCAPES = {"n": "\n", "t": "\t", "r": "\r", "a": "\a", "b": "\b", "f": "\f", "v": "\v"}


def backslash(src: str, pos: int) -> tuple[str, int]:
    """Decode the escape at ``src[pos] == '\\'``; return (text, next position)."""
    if pos + 1 >= len(src):
        return "\\", pos + 1
    c = src[pos + 1]
    if c == "\n":
        end = pos + 2
        while end < len(src) and src[end] in " \t":
            end += 1
        return " ", end
    if c in _SIMPLE_ESCAPES:
        return _SIMPLE_ESCAPES[c], pos + 2
    if c == "x":
        m = _HEX.match(src, pos + 2)
        if m:
            return chr(int(m.group(), 16)), m.end()
        return "x", pos + 2
    if c == "u":
        m = _UNI.match(src, pos + 2)
        if m:
            return chr(int(m.group(), 16)), m.end()
        return "u", pos + 2
    m = _OCTAL.match(src, pos + 1)
    if m:
        return chr(int(m.group(), 8) & 0xFF), m.end()
    return c, pos + 2


class _Parser:
    def __init__(self, src: str):
        self.src = src
        self.pos = 0
        self.n = len(src)

    def fail(self, msg: str, pos: int | None = None):
        p = self.pos if pos is None else pos
        raise TclError(f"line {line_of(self.src, p)}: {msg}")

    # -- scripts --------------------------------------------------------

    def script(self, nested: bool = False) -> list[Command]:
        src, cmds = self.src, []
        open_pos = self.pos - 1
        while True:
            while self.pos < self.n:
                c = src[self.pos]
                if c in " \t\r\n;":
                    self.pos += 1
                elif c == "\\" and src.startswith("\\\n", self.pos):
                    self.pos += 2
                else:
                    break
            if self.pos >= self.n:
                if nested:
                    self.fail("missing close-bracket", open_pos)
                return cmds
            c = src[self.pos]
            if nested and c == "]":
                self.pos += 1
                return cmds
            if c == "#":
                self._comment()
                continue
            cmd = self._command(nested)
            if cmd.words:
                cmds.append(cmd)

    def _comment(self):
        src = self.src
        while self.pos < self.n:
            c = src[self.pos]
            if c == "\\":
                self.pos += 2
                continue
            self.pos += 1
            if c == "\n":
                return

    def _command(self, nested: bool) -> Command:
        src, start, words = self.src, self.pos, []
        while True:
            while self.pos < self.n:
                c = src[self.pos]
                if c in " \t\r":
                    self.pos += 1
                elif c == "\\" and src.startswith("\\\n", self.pos):
                    self.pos += 2
                else:
                    break
            if self.pos >= self.n:
                break
            c = src[self.pos]
            if c in "\n;":
                self.pos += 1
                break
            if nested and c == "]":
                break
            words.append(self._word(nested))
        return Command(tuple(words), start, src)

    # -- words ----------------------------------------------------------

    def _word(self, nested: bool) -> Word:
        src, start = self.src, self.pos
        c = src[start]
        if c == "{":
            text = self._braced()
            return Word((text,), "brace", src[start:self.pos])
        if c == '"':
            self.pos += 1
            parts = self._parts(lambda ch: ch == '"', quoted=True)
            if self.pos >= self.n:
                self.fail('missing "', start)
            self.pos += 1
            return Word(tuple(parts), "quote", src[start:self.pos])
        stops = " \t\r\n;]" if nested else " \t\r\n;"
        parts = self._parts(lambda ch: ch in stops, quoted=False)
        return Word(tuple(parts), "bare", src[start:self.pos])

    def _braced(self) -> str:
        src, start = self.src, self.pos
        depth, i = 0, start
        chunks = []
        seg = start + 1
        while i < self.n:
            c = src[i]
            if c == "\\":
                if src.startswith("\\\n", i):
                    chunks.append(src[seg:i])
                    _, i = backslash(src, i)
                    chunks.append(" ")
                    seg = i
                    continue
                i += 2
                continue
            if c == "{":
                depth += 1
            elif c == "}":
                depth -= 1
                if depth == 0:
                    chunks.append(src[seg:i])
                    self.pos = i + 1
                    return "".join(chunks)
            i += 1
        self.fail("missing close-brace", start)

    def _parts(self, stop, quoted: bool) -> list:
        src, parts, buf = self.src, [], []

        def flush():
            if buf:
                parts.append("".join(buf))
                buf.clear()

        while self.pos < self.n:
            c = src[self.pos]
            if stop(c):
                break
            if c == "\\":
                text, self.pos = backslash(src, self.pos)
                buf.append(text)
            elif c == "$":
                var = self._var()
                if var is None:
                    buf.append("$")
                    self.pos += 1
                else:
                    flush()
                    parts.append(var)
            elif c == "[":
                flush()
                open_at = self.pos
                self.pos += 1
                cmds = self.script(nested=True)
                parts.append(CmdSub(tuple(cmds), src[open_at:self.pos]))
                # "[cmd]{" ends a bare word: the brace opens the next word.
                if not quoted and self.pos < self.n and src[self.pos] == "{":
                    break
            else:
                buf.append(c)
                self.pos += 1
        flush()
        return parts

    def _var(self) -> VarSub | None:
        src, p = self.src, self.pos + 1
        if p < self.n and src[p] == "{":
            end = src.find("}", p + 1)
            if end < 0:
                self.fail("missing close-brace for variable name")
            self.pos = end + 1
            return VarSub(src[p + 1:end])
        m = _VAR_NAME.match(src, p)
        if not m:
            return None
        self.pos = m.end()
        index = None
        if self.pos < self.n and src[self.pos] == "(":
            open_at = self.pos
            self.pos += 1
            index = tuple(self._parts(lambda ch: ch == ")", quoted=True))
            if self.pos >= self.n:
                self.fail("missing )", open_at)
            self.pos += 1
        return VarSub(m.group(), index)


@lru_cache(maxsize=4096)
def parse_script(source: str) -> tuple:
    return tuple(_Parser(source).script())


# -- lists ----------------------------------------------------------------

_LIST_SPACE = " \t\n\r\f\v"


def parse_list(text: str) -> list[str]:
    items: list[str] = []
    i, n = 0, len(text)
    while True:
        while i < n and text[i] in _LIST_SPACE:
            i += 1
        if i >= n:
            return items
        c = text[i]
        if c == "{":
            depth, j = 1, i + 1
            while j < n and depth:
                ch = text[j]
                if ch == "\\":
                    j += 2
                    continue
                if ch == "{":
                    depth += 1
                elif ch == "}":
                    depth -= 1
                j += 1
            if depth:
                raise TclError("unmatched open brace in list")
            items.append(text[i + 1:j - 1])
            i = j
        elif c == '"':
            j, buf = i + 1, []
            while j < n and text[j] != '"':
                if text[j] == "\\":
                    s, j = backslash(text, j)
                    buf.append(s)
                else:
                    buf.append(text[j])
                    j += 1
            if j >= n:
                raise TclError("unmatched open quote in list")
            items.append("".join(buf))
            i = j + 1
        else:
            buf = []
            while i < n and text[i] not in _LIST_SPACE:
                if text[i] == "\\":
                    s, i = backslash(text, i)
                    buf.append(s)
                else:
                    buf.append(text[i])
                    i += 1
            items.append("".join(buf))
        if i < n and text[i] not in _LIST_SPACE:
            raise TclError("list element in braces or quotes followed by garbage")


_NEEDS_QUOTING = re.compile(r'[\s{}\[\]$;\\"]')
_ESCAPE_CHARS = {"\n": "\\n", "\t": "\\t", "\r": "\\r", "\f": "\\f", "\v": "\\v"}


def _brace_safe(s: str) -> bool:
    depth = 0
    i = 0
    while i < len(s):
        c = s[i]
        if c == "\\":
            if i + 1 >= len(s):
                return False
            i += 2
            continue
        if c == "{":
            depth += 1
        elif c == "}":
            depth -= 1
            if depth < 0:
                return False
        i += 1
    return depth == 0


def _quote_element(s: str) -> str:
    if s == "":
        return "{}"
    if not _NEEDS_QUOTING.search(s) and not s.startswith("#"):
        return s
    if _brace_safe(s):
        return "{" + s + "}"
    out = []
    for c in s:
        if c in _ESCAPE_CHARS:
            out.append(_ESCAPE_CHARS[c])
        elif c in ' {}[]$;\\"':
            out.append("\\" + c)
        else:
            out.append(c)
    text = "".join(out)
    return "\\" + text if text.startswith("#") else text


def format_list(items) -> str:
    return " ".join(_quote_element(str(x)) for x in items)


# -- expr -----------------------------------------------------------------

_EXPR_TOKEN = re.compile(
    r"""\s*(?:
        (?P<num>0[xX][0-9a-fA-F]+|(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)
      | (?P<op>\*\*|<<|>>|<=|>=|==|!=|&&|\|\||[-+*/%<>!~&|^?:()])
      | (?P<word>[A-Za-z_][A-Za-z0-9_]*)
    )""",
    re.VERBOSE,
)

_BINARY_LEVELS = [
    ("||",),
    ("&&",),
    ("|",),
    ("^",),
    ("&",),
    ("eq", "ne"),
    ("==", "!="),
    ("<", ">", "<=", ">="),
    ("<<", ">>"),
    ("+", "-"),
    ("*", "/", "%"),
]


class _ExprParser:
    def __init__(self, src: str):
        self.src = src
        self.pos = 0
        self.n = len(src)
        self.peeked = None

    def fail(self, msg):
        raise TclError(f'syntax error in expression "{self.src}": {msg}')

    def _skip(self):
        while self.pos < self.n and self.src[self.pos].isspace():
            self.pos += 1

    def peek_op(self) -> str | None:
        self._skip()
        if self.pos >= self.n:
            return None
        m = _EXPR_TOKEN.match(self.src, self.pos)
        if m and m.group("op"):
            return m.group("op")
        if m and m.group("word") in ("eq", "ne"):
            return m.group("word")
        return None

    def take_op(self, op):
        self._skip()
        self.pos += len(op)

    def parse(self):
        node = self.ternary()
        self._skip()
        if self.pos < self.n:
            self.fail(f"unexpected {self.src[self.pos:]!r}")
        return node

    def ternary(self):
        cond = self.binary(0)
        if self.peek_op() == "?":
            self.take_op("?")
            a = self.ternary()
            if self.peek_op() != ":":
                self.fail("missing ':'")
            self.take_op(":")
            b = self.ternary()
            return ("?", cond, a, b)
        return cond

    def binary(self, level):
        if level >= len(_BINARY_LEVELS):
            return self.unary()
        left = self.binary(level + 1)
        ops = _BINARY_LEVELS[level]
        while True:
            op = self.peek_op()
            if op not in ops:
                return left
            self.take_op(op)
            right = self.binary(level + 1)
            left = ("bin", op, left, right)

    def unary(self):
        op = self.peek_op()
        if op in ("-", "+", "!", "~"):
            self.take_op(op)
            return ("un", op, self.unary())
        return self.primary()

    def primary(self):
        self._skip()
        if self.pos >= self.n:
            self.fail("premature end of expression")
        src = self.src
        c = src[self.pos]
        if c == "(":
            self.pos += 1
            node = self.ternary()
            if self.peek_op() != ")":
                self.fail("missing close parenthesis")
            self.take_op(")")
            return node
        if c in '$["{':
            sub = _Parser(src)
            sub.pos = self.pos
            if c == "$":
                var = sub._var()
                if var is None:
                    self.fail("bad variable reference")
                self.pos = sub.pos
                return ("var", var)
            if c == "[":
                sub.pos += 1
                cmds = sub.script(nested=True)
                node = ("cmd", CmdSub(tuple(cmds), src[self.pos:sub.pos]))
                self.pos = sub.pos
                return node
            if c == "{":
                text = sub._braced()
                self.pos = sub.pos
                return ("lit", text)
            sub.pos += 1
            parts = sub._parts(lambda ch: ch == '"', quoted=True)
            if sub.pos >= self.n:
                self.fail('missing "')
            self.pos = sub.pos + 1
            return ("str", tuple(parts))
        m = _EXPR_TOKEN.match(src, self.pos)
        if m and m.group("num"):
            self.pos = m.end()
            return ("lit", m.group("num"))
        if m and m.group("word"):
            word = m.group("word")
            if word.lower() in ("true", "false", "yes", "no", "on", "off"):
                self.pos = m.end()
                return ("lit", word)
            self.fail(f'invalid bareword "{word}"')
        self.fail(f"unexpected {src[self.pos:]!r}")


@lru_cache(maxsize=4096)
def parse_expr(source: str):
    return _ExprParser(source).parse()
