"""Simplified document-type definitions.

A DTD here carries only what the tree builder needs to recover from broken
markup: which elements are void, which may omit their end tag, and which
start tags implicitly close an open element.

File format, one declaration per line::

    <name> [VOID] [END_OPTIONAL] [CLOSES(a,b,...)]
    DEFAULT [END_OPTIONAL]

``#`` starts a comment and blank lines are ignored.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from importlib import resources

__all__ = [
    "DtdError",
    "ElementRule",
    "Dtd",
    "dtd_load",
    "dtd_builtin",
    "BUILTINS",
]

BUILTINS = ("frameset",)

_NAME_RE = re.compile(r"^[a-z][a-z0-9._:-]*$")
_CLOSES_RE = re.compile(r"^CLOSES\((.*)\)$", re.IGNORECASE)

DEFAULT_NAME = "#default"


class DtdError(ValueError):
    pass


@dataclass(frozen=True)
class ElementRule:
    name: str
    void: bool = False
    end_optional: bool = False
    auto_close_on: frozenset = field(default_factory=frozenset)

    def __post_init__(self):
        if not self.name or self.name != self.name.lower() or not self.name.isascii():
            raise DtdError(f"invalid element name {self.name!r}")
        if self.void and self.auto_close_on:
            raise DtdError("VOID element cannot declare CLOSES")
        if self.void and not self.end_optional:
            object.__setattr__(self, "end_optional", True)
        object.__setattr__(self, "auto_close_on", frozenset(self.auto_close_on))

    @property
    def flow_container(self) -> bool:
        return not self.void

    def to_line(self) -> str:
        parts = [self.name]
        if self.void:
            parts.append("VOID")
        elif self.end_optional:
            parts.append("END_OPTIONAL")
        if self.auto_close_on:
            parts.append("CLOSES(%s)" % ",".join(sorted(self.auto_close_on)))
        return " ".join(parts)


class Dtd:
    """Immutable rule table; ``lookup`` never fails."""

    def __init__(self, name: str, rules: dict[str, ElementRule], default_rule: ElementRule | None = None):
        self.name = name
        self._rules = dict(rules)
        self.default_rule = default_rule or ElementRule(DEFAULT_NAME)

    @property
    def rules(self) -> dict[str, ElementRule]:
        return dict(self._rules)

    def lookup(self, name: str) -> ElementRule:
        return self._rules.get(name.lower(), self.default_rule)

    def is_void(self, name: str) -> bool:
        return self.lookup(name).void

    def dump(self) -> str:
        lines = [f"# {self.name}"]
        if self.default_rule.end_optional:
            lines.append("DEFAULT END_OPTIONAL")
        lines.extend(self._rules[n].to_line() for n in sorted(self._rules))
        return "\n".join(lines) + "\n"

    def __eq__(self, other):
        if not isinstance(other, Dtd):
            return NotImplemented
        return self._rules == other._rules and self.default_rule == other.default_rule

    def __repr__(self):
        return f"Dtd({self.name!r}, {len(self._rules)} rules)"


def _parse_line(lineno: int, tokens: list[str]) -> ElementRule:
    name = tokens[0].lower()
    if not _NAME_RE.match(name):
        raise DtdError(f"line {lineno}: invalid element name {tokens[0]!r}")
    void = end_optional = False
    closes: set[str] = set()
    for tok in tokens[1:]:
        upper = tok.upper()
        if upper == "VOID":
            void = True
        elif upper == "END_OPTIONAL":
            end_optional = True
        elif m := _CLOSES_RE.match(tok):
            names = [n.strip().lower() for n in m.group(1).split(",")]
            if not names or not all(_NAME_RE.match(n) for n in names):
                raise DtdError(f"line {lineno}: malformed CLOSES list {tok!r}")
            closes.update(names)
        else:
            raise DtdError(f"line {lineno}: unknown token {tok!r}")
    if void and closes:
        raise DtdError(f"line {lineno}: VOID element cannot declare CLOSES")
    return ElementRule(name, void=void, end_optional=end_optional or void, auto_close_on=frozenset(closes))


def dtd_load(source: str, name: str = "custom") -> Dtd:
    rules: dict[str, ElementRule] = {}
    default = None
    seen_any = False
    for lineno, line in enumerate(source.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        seen_any = True
        tokens = line.split()
        if tokens[0] == "DEFAULT":
            extra = [t.upper() for t in tokens[1:]]
            if any(t != "END_OPTIONAL" for t in extra):
                raise DtdError(f"line {lineno}: DEFAULT accepts only END_OPTIONAL")
            default = ElementRule(DEFAULT_NAME, end_optional=bool(extra))
            continue
        rule = _parse_line(lineno, tokens)
        rules[rule.name] = rule
    if not seen_any:
        raise DtdError("empty DTD source")
    return Dtd(name, rules, default)


_builtin_cache: dict[str, Dtd] = {}


def dtd_builtin(name: str) -> Dtd:
    key = name.lower()
    if key.endswith(".dtd"):
        key = key[:-4]
    if key not in BUILTINS:
        raise DtdError(f"unknown builtin DTD {name!r}; available: {', '.join(BUILTINS)}")
    if key not in _builtin_cache:
        text = resources.files("webshell.data").joinpath(f"{key}.dtd").read_text(encoding="utf-8")
        _builtin_cache[key] = dtd_load(text, key)
    return _builtin_cache[key]
