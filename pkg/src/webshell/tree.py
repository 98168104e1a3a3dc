"""Tag trees: an arena of text, comment and element nodes.

Node ids are plain integers drawn from one process-wide counter, so an id
is never valid in two trees at once and a stale id (cut away, or from a
different tree) is always detected instead of silently aliasing a node.
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass
from typing import Iterator, Union

__all__ = [
    "TreeError",
    "StaleNodeError",
    "Text",
    "Comment",
    "TagData",
    "Element",
    "NodeContent",
    "TagTree",
    "DetachedTree",
    "node_create",
    "ROOT_NAME",
    "RAW_TEXT_ELEMENTS",
]

ROOT_NAME = "#root"
RAW_TEXT_ELEMENTS = frozenset({"script", "style"})

_ids = itertools.count(1)

# A '<' in text that the tokenizer would read as markup on a second pass.
_MARKUP_LT = re.compile(r"<(?=[A-Za-z!?]|/[A-Za-z])")
# An end tag inside raw text would terminate the element early on re-parse.
_RAW_END = {name: re.compile(rf"</(?={name}[\s/>])", re.IGNORECASE) for name in RAW_TEXT_ELEMENTS}


class TreeError(Exception):
    pass


class StaleNodeError(TreeError):
    pass


@dataclass(frozen=True)
class Text:
    value: str


@dataclass(frozen=True)
class Comment:
    value: str


class TagData:
    """Element name plus ordered attributes; names are kept lowercase."""

    __slots__ = ("_name", "_attrs")

    def __init__(self, name: str, attributes=()):
        self._name = ""
        self.set_name(name)
        self._attrs: list[tuple[str, str | None]] = []
        for key, value in attributes:
            self.set_attrib(key, value)

    @property
    def name(self) -> str:
        return self._name

    @property
    def attributes(self) -> list[tuple[str, str | None]]:
        return list(self._attrs)

    def get_name(self) -> str:
        return self._name

    def set_name(self, name: str) -> None:
        if not name:
            raise TreeError("empty tag name")
        self._name = name.lower()

    def has_attrib(self, key: str) -> bool:
        key = key.lower()
        return any(k == key for k, _ in self._attrs)

    def get_attrib(self, key: str) -> str | None:
        """Value of ``key``; None both when absent and when valueless (see has_attrib)."""
        key = key.lower()
        for k, v in self._attrs:
            if k == key:
                return v
        return None

    def set_attrib(self, key: str, value: str | None) -> None:
        key = key.lower()
        if not key:
            raise TreeError("empty attribute name")
        for i, (k, _) in enumerate(self._attrs):
            if k == key:
                self._attrs[i] = (key, value)
                return
        self._attrs.append((key, value))

    def remove_attrib(self, key: str) -> None:
        key = key.lower()
        self._attrs = [(k, v) for k, v in self._attrs if k != key]

    def copy(self) -> "TagData":
        td = TagData.__new__(TagData)
        td._name = self._name
        td._attrs = list(self._attrs)
        return td

    def __eq__(self, other):
        if not isinstance(other, TagData):
            return NotImplemented
        return self._name == other._name and self._attrs == other._attrs

    def __repr__(self):
        return f"TagData({self._name!r}, {self._attrs!r})"


@dataclass(frozen=True)
class Element:
    tag: TagData

    @property
    def name(self) -> str:
        return self.tag.name

    def copy(self) -> "Element":
        return Element(self.tag.copy())


NodeContent = Union[Text, Comment, Element]


def _copy_content(content):
    if isinstance(content, Element):
        return content.copy()
    if isinstance(content, (Text, Comment)):
        return content
    raise TypeError(f"not node content: {content!r}")


class _Node:
    __slots__ = ("content", "parent", "children")

    def __init__(self, content, parent=None):
        self.content = content
        self.parent = parent
        self.children: list[int] = []


class TagTree:
    """A document: a synthetic ``#root`` element holding the parsed nodes."""

    def __init__(self, dtd=None):
        if dtd is None:
            from .dtd import dtd_builtin

            dtd = dtd_builtin("frameset")
        self.dtd = dtd
        self._nodes: dict[int, _Node] = {}
        self.root = self._add(Element(TagData(ROOT_NAME)), None)

    # -- arena plumbing -------------------------------------------------

    def _add(self, content, parent) -> int:
        nid = next(_ids)
        self._nodes[nid] = _Node(content, parent)
        if parent is not None:
            self._nodes[parent].children.append(nid)
        return nid

    def _node(self, nid) -> _Node:
        try:
            return self._nodes[nid]
        except (KeyError, TypeError):
            raise StaleNodeError(f"node {nid!r} is not in this tree") from None

    def _require_element(self, nid, what="parent") -> _Node:
        node = self._node(nid)
        if not isinstance(node.content, Element):
            raise TreeError(f"{what} node {nid} is not an element")
        return node

    def __contains__(self, nid) -> bool:
        return nid in self._nodes

    def __len__(self) -> int:
        return len(self._nodes)

    # -- access ---------------------------------------------------------

    def content(self, nid) -> NodeContent:
        return _copy_content(self._node(nid).content)

    def set_content(self, nid, content: NodeContent) -> None:
        node = self._node(nid)
        if nid == self.root:
            raise TreeError("cannot replace the content of the document root")
        if node.children and not isinstance(content, Element):
            raise TreeError("an internal node must stay an element")
        node.content = _copy_content(content)

    def kind(self, nid) -> str:
        c = self._node(nid).content
        if isinstance(c, Element):
            return "tag"
        return "text" if isinstance(c, Text) else "comment"

    def tag_name(self, nid) -> str | None:
        c = self._node(nid).content
        return c.tag.name if isinstance(c, Element) else None

    def parent(self, nid) -> int | None:
        return self._node(nid).parent

    def children(self, nid) -> list[int]:
        return list(self._node(nid).children)

    def sibling(self, nid, direction: str = "next") -> int | None:
        node = self._node(nid)
        if node.parent is None:
            return None
        kids = self._nodes[node.parent].children
        i = kids.index(nid)
        if direction == "next":
            return kids[i + 1] if i + 1 < len(kids) else None
        if direction in ("prev", "previous"):
            return kids[i - 1] if i > 0 else None
        raise TreeError(f"bad sibling direction {direction!r}: use prev or next")

    def subtree(self, nid) -> list[int]:
        """Preorder ids of the subtree rooted at ``nid``."""
        self._node(nid)
        out = []
        stack = [nid]
        nodes = self._nodes
        while stack:
            cur = stack.pop()
            out.append(cur)
            stack.extend(reversed(nodes[cur].children))
        return out

    def height(self, nid=None) -> int:
        nid = self.root if nid is None else nid
        best = 0
        stack = [(nid, 0)]
        while stack:
            cur, d = stack.pop()
            best = max(best, d)
            stack.extend((c, d + 1) for c in self._nodes[cur].children)
        return best

    def append(self, parent, content: NodeContent) -> int:
        self._require_element(parent)
        return self._add(_copy_content(content), parent)

    def walk(self, nid=None) -> Iterator[int]:
        return iter(self.subtree(self.root if nid is None else nid))

    # -- surgery --------------------------------------------------------

    def _check_index(self, parent_node, index):
        if not isinstance(index, int) or not 0 <= index <= len(parent_node.children):
            raise TreeError(f"index {index!r} out of range [0, {len(parent_node.children)}]")

    def _detach_ids(self, nid) -> "DetachedTree":
        ids = self.subtree(nid)
        node = self._nodes[nid]
        self._nodes[node.parent].children.remove(nid)
        node.parent = None
        moved = {i: self._nodes.pop(i) for i in ids}
        return DetachedTree._from_nodes(moved, nid, self.dtd)

    def cut(self, nid) -> "DetachedTree":
        self._node(nid)
        if nid == self.root:
            raise TreeError("cannot cut the root")
        return self._detach_ids(nid)

    def copy(self, nid) -> "DetachedTree":
        self._node(nid)
        mapping: dict[int, int] = {}
        nodes: dict[int, _Node] = {}
        for old in self.subtree(nid):
            src = self._nodes[old]
            new = next(_ids)
            mapping[old] = new
            parent = mapping.get(src.parent) if old != nid else None
            nodes[new] = _Node(_copy_content(src.content), parent)
            if parent is not None:
                nodes[parent].children.append(new)
        return DetachedTree._from_nodes(nodes, mapping[nid], self.dtd)

    def paste(self, parent, index: int, frag: "DetachedTree") -> int:
        """Splice ``frag`` under ``parent`` at ``index``; the fragment is consumed."""
        pnode = self._require_element(parent)
        self._check_index(pnode, index)
        if not isinstance(frag, DetachedTree) or frag.consumed:
            raise TreeError("paste needs an unconsumed detached tree")
        top = frag.root
        clash = self._nodes.keys() & frag._nodes.keys()
        if clash:
            raise TreeError("fragment shares nodes with this tree")
        self._nodes.update(frag._nodes)
        self._nodes[top].parent = parent
        pnode.children.insert(index, top)
        frag._nodes = {}
        frag.consumed = True
        return top

    def move(self, nid, new_parent, index: int) -> None:
        """Reparent ``nid``; ``index`` addresses new_parent's children before removal."""
        node = self._node(nid)
        if nid == self.root:
            raise TreeError("cannot move the root")
        pnode = self._require_element(new_parent)
        self._check_index(pnode, index)
        cur = new_parent
        while cur is not None:
            if cur == nid:
                raise TreeError("move would create a cycle")
            cur = self._nodes[cur].parent
        old_kids = self._nodes[node.parent].children
        old_pos = old_kids.index(nid)
        old_kids.pop(old_pos)
        if node.parent == new_parent and old_pos < index:
            index -= 1
        pnode.children.insert(index, nid)
        node.parent = new_parent

    # -- serialization --------------------------------------------------

    def dump(self, nid=None, depth: int | None = None) -> str:
        nid = self.root if nid is None else nid
        self._node(nid)
        if depth is not None and depth < 0:
            raise TreeError("depth must be non-negative")
        nodes = self._nodes
        is_void = self.dtd.is_void
        out: list[str] = []
        stack: list[tuple[int, int, bool]] = [(nid, 0, False)]
        while stack:
            cur, d, closing = stack.pop()
            node = nodes[cur]
            content = node.content
            if closing:
                out.append(f"</{content.tag.name}>")
                continue
            if isinstance(content, Text):
                parent = nodes.get(node.parent)
                if parent is not None and isinstance(parent.content, Element) \
                        and parent.content.tag.name in RAW_TEXT_ELEMENTS:
                    out.append(_RAW_END[parent.content.tag.name].sub(r"<\\/", content.value))
                else:
                    out.append(_MARKUP_LT.sub("&lt;", content.value))
                continue
            if isinstance(content, Comment):
                out.append(f"<!--{content.value}-->")
                continue
            tag = content.tag
            is_root = tag.name == ROOT_NAME
            if not is_root:
                out.append(_start_tag(tag))
                if not is_void(tag.name):
                    stack.append((cur, d, True))
            if depth is None or d < depth:
                stack.extend((c, d + 1, False) for c in reversed(node.children))
        return "".join(out)

    # -- invariants -----------------------------------------------------

    def audit(self) -> None:
        """Raise TreeError unless every structural invariant holds."""
        nodes = self._nodes
        if self.root not in nodes:
            raise TreeError("root missing")
        if nodes[self.root].parent is not None:
            raise TreeError("root has a parent")
        seen = set()
        stack = [self.root]
        while stack:
            cur = stack.pop()
            if cur in seen:
                raise TreeError(f"node {cur} reached twice (cycle or shared child)")
            seen.add(cur)
            node = nodes[cur]
            content = node.content
            if not isinstance(content, (Text, Comment, Element)):
                raise TreeError(f"node {cur} has bad content")
            if isinstance(content, Element):
                names = [k for k, _ in content.tag.attributes]
                if not content.tag.name or len(names) != len(set(names)):
                    raise TreeError(f"node {cur} has a malformed tag")
            if node.children and not isinstance(content, Element):
                raise TreeError(f"internal node {cur} is not an element")
            for child in node.children:
                if child not in nodes:
                    raise TreeError(f"node {cur} has dangling child {child}")
                if nodes[child].parent != cur:
                    raise TreeError(f"child {child} does not point back to {cur}")
                stack.append(child)
        if len(seen) != len(nodes):
            raise TreeError(f"{len(nodes) - len(seen)} nodes unreachable from the root")

    def __repr__(self):
        return f"<{type(self).__name__} {len(self)} nodes>"


class DetachedTree(TagTree):
    """A fragment owned by no document, rooted at its own top node."""

    def __init__(self, content: NodeContent, dtd=None):
        if dtd is None:
            from .dtd import dtd_builtin

            dtd = dtd_builtin("frameset")
        self.dtd = dtd
        self._nodes = {}
        self.consumed = False
        self.root = self._add(_copy_content(content), None)

    @classmethod
    def _from_nodes(cls, nodes, root, dtd) -> "DetachedTree":
        frag = cls.__new__(cls)
        frag.dtd = dtd
        frag._nodes = nodes
        frag.root = root
        frag.consumed = False
        return frag

    def set_content(self, nid, content):
        node = self._node(nid)
        if node.children and not isinstance(content, Element):
            raise TreeError("an internal node must stay an element")
        node.content = _copy_content(content)

    def audit(self) -> None:
        if self.consumed:
            raise TreeError("fragment was consumed by paste")
        super().audit()


def node_create(content: NodeContent, dtd=None) -> DetachedTree:
    if isinstance(content, Element) and not content.tag.name:
        raise TreeError("empty tag name")
    return DetachedTree(content, dtd)


def _quote(value: str) -> str:
    return '"' + value.replace('"', "&quot;") + '"'


def _start_tag(tag: TagData) -> str:
    parts = [tag.name]
    for key, value in tag.attributes:
        parts.append(key if value is None else f"{key}={_quote(value)}")
    return "<" + " ".join(parts) + ">"
