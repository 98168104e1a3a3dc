"""The ``ws::*`` command family.

Trees, nodes, parsers, iterators, URLs and connections live in a handle
table and reach scripts as names like ``tree3`` or ``node17``. Node
content and tag data are plain list values::

    tag a {{href x.html}}
    text {hello world}
    comment { note }

so ``ws::tag`` works on values and returns modified copies.
"""

from __future__ import annotations

import itertools
import os
import threading
from dataclasses import dataclass

from . import apps, net, tasks
from .dtd import Dtd, DtdError, dtd_builtin, dtd_load
from .iterate import TreeIterator
from .parser import Parser
from .tcl import TclError, format_list, parse_list
from .tree import Comment, DetachedTree, Element, TagData, TagTree, Text, node_create

__all__ = ["HandleTable", "register", "content_to_value", "value_to_content", "THREAD_STATUS"]

THREAD_STATUS = {
    tasks.TaskStatus.RUNNING: "WS_THREAD_RUNNING",
    tasks.TaskStatus.DONE: "WS_THREAD_DONE",
    tasks.TaskStatus.FAIL: "WS_THREAD_FAIL",
}


@dataclass(frozen=True)
class NodeRef:
    tree: TagTree
    nid: int


class _Stream:
    def __init__(self, body: str):
        self.body = body

    def read(self) -> str:
        body, self.body = self.body, ""
        return body


class HandleTable:
    """Name -> object map shared by an interpreter and its task children."""

    def __init__(self):
        self._lock = threading.Lock()
        self._objects: dict[str, object] = {}
        self._counter = itertools.count(1)

    def new(self, prefix: str, obj) -> str:
        with self._lock:
            name = f"{prefix}{next(self._counter)}"
            self._objects[name] = obj
        return name

    def put(self, name: str, obj) -> str:
        with self._lock:
            self._objects[name] = obj
        return name

    def get(self, name: str, *types, what: str = "handle"):
        with self._lock:
            obj = self._objects.get(name)
        if obj is None or (types and not isinstance(obj, types)):
            raise TclError(f'invalid {what} "{name}"')
        return obj

    def drop(self, name: str) -> None:
        with self._lock:
            self._objects.pop(name, None)

    def __len__(self):
        return len(self._objects)


# -- value conversions --------------------------------------------------------

def _attrs_value(tag: TagData) -> str:
    return format_list(format_list([k] if v is None else [k, v]) for k, v in tag.attributes)


def content_to_value(content) -> str:
    if isinstance(content, Text):
        return format_list(["text", content.value])
    if isinstance(content, Comment):
        return format_list(["comment", content.value])
    return format_list(["tag", content.tag.name, _attrs_value(content.tag)])


def _tag_from_value(value: str) -> TagData:
    items = parse_list(value)
    if not items or items[0] != "tag" or len(items) not in (2, 3):
        raise TclError(f'not a tag value: "{value}"')
    attrs = []
    for entry in parse_list(items[2]) if len(items) == 3 else []:
        pair = parse_list(entry)
        if len(pair) not in (1, 2):
            raise TclError(f'bad attribute entry "{entry}"')
        attrs.append((pair[0], pair[1] if len(pair) == 2 else None))
    return TagData(items[1], attrs)


def _tag_value(tag: TagData) -> str:
    return format_list(["tag", tag.name, _attrs_value(tag)])


def value_to_content(value: str):
    items = parse_list(value)
    if len(items) == 2 and items[0] in ("text", "comment"):
        return Text(items[1]) if items[0] == "text" else Comment(items[1])
    if items and items[0] == "tag":
        return Element(_tag_from_value(value))
    raise TclError(f'not a node content value: "{value}"')


def _as_pairs(value: str, what: str) -> list[tuple[str, str]]:
    items = parse_list(value)
    if len(items) % 2:
        raise TclError(f"{what} list must have an even number of elements")
    return list(zip(items[::2], items[1::2]))


# -- handle helpers -------------------------------------------------------------

def _node(interp, name: str) -> tuple[TagTree, int]:
    obj = interp.handles.get(name, TagTree, NodeRef, what="node")
    if isinstance(obj, TagTree):
        return obj, obj.root
    return obj.tree, obj.nid


def _node_handle(interp, tree: TagTree, nid) -> str:
    if nid is None:
        return ""
    return interp.handles.put(f"node{nid}", NodeRef(tree, nid))


def _index(text: str | None, default: int) -> int:
    if text is None or text == "end":
        return default
    try:
        return int(text)
    except ValueError:
        raise TclError(f'bad index "{text}"') from None


def _dtd(interp, spec: str) -> Dtd:
    try:
        return interp.handles.get(spec, Dtd)
    except TclError:
        pass
    if os.path.isfile(spec):
        with open(spec, encoding="utf-8") as fh:
            return dtd_load(fh.read(), os.path.basename(spec))
    try:
        return dtd_builtin(spec)
    except DtdError as exc:
        raise TclError(str(exc)) from None


def _usage(msg):
    return TclError(f'wrong # args: should be "{msg}"')


# -- commands ----------------------------------------------------------------

def ws_url(interp, args):
    if len(args) != 2 or args[0] != "new":
        raise _usage("ws::url new urlString")
    return interp.handles.new("url", args[1])


def _url_arg(interp, text: str) -> str:
    try:
        return interp.handles.get(text, str)
    except TclError:
        return text


def ws_stream(interp, args):
    if len(args) == 3 and args[:2] == ["in", "url"]:
        body = net.get_page(_url_arg(interp, args[2]))
        return interp.handles.new("stream", _Stream(body))
    if len(args) == 2 and args[0] == "read":
        return interp.handles.get(args[1], _Stream, what="stream").read()
    if len(args) == 2 and args[0] == "close":
        interp.handles.get(args[1], _Stream, what="stream")
        interp.handles.drop(args[1])
        return ""
    raise _usage("ws::stream in url urlHandle | ws::stream read|close stream")


def ws_urlconn(interp, args):
    if len(args) == 2 and args[0] == "new":
        return interp.handles.new("urlconn", net.UrlConnection(_url_arg(interp, args[1])))
    if len(args) == 4 and args[0] == "get" and args[1] == "HeaderField":
        conn = interp.handles.get(args[3], net.UrlConnection, what="connection")
        value = conn.header_field(args[2])
        return "" if value is None else value
    raise _usage("ws::urlconn new url | ws::urlconn get HeaderField n conn")


def ws_getpage(interp, args):
    if not 1 <= len(args) <= 3:
        raise _usage("ws::getpage url ?queryList? ?headerList?")
    params = _as_pairs(args[1], "query") if len(args) > 1 else None
    headers = _as_pairs(args[2], "header") if len(args) > 2 else None
    return net.get_page(args[0], params, headers)


def ws_postpage(interp, args):
    if not 1 <= len(args) <= 3:
        raise _usage("ws::postpage url ?formList? ?headerList?")
    form = _as_pairs(args[1], "form") if len(args) > 1 else []
    headers = _as_pairs(args[2], "header") if len(args) > 2 else None
    return net.post_page(args[0], form, headers)


def ws_validate_link(interp, args):
    if len(args) != 1:
        raise _usage("ws::validate_link url")
    return "1" if net.validate_link(args[0]) else "0"


def ws_resolve_url(interp, args):
    if len(args) != 2:
        raise _usage("ws::resolve_url base href")
    return net.resolve_url(args[0], args[1]) or ""


def ws_url_encode(interp, args):
    if len(args) != 1:
        raise _usage("ws::url_encode list")
    return net.url_encode(_as_pairs(args[0], "query"))


def ws_dtd(interp, args):
    if len(args) == 2 and args[0] == "load":
        try:
            return interp.handles.new("dtd", dtd_load(args[1]))
        except DtdError as exc:
            raise TclError(str(exc)) from None
    if len(args) == 2 and args[0] in ("builtin", "file"):
        return interp.handles.new("dtd", _dtd(interp, args[1]))
    if len(args) == 2 and args[0] == "dump":
        return interp.handles.get(args[1], Dtd, what="dtd").dump()
    raise _usage("ws::dtd load text | ws::dtd builtin name | ws::dtd dump dtd")


def ws_parser(interp, args):
    if not args or args[0] != "dtd" or len(args) > 2:
        raise _usage("ws::parser dtd ?dtdName?")
    dtd = _dtd(interp, args[1]) if len(args) == 2 else None
    return interp.handles.new("parser", Parser(dtd))


def ws_parse(interp, args):
    if len(args) not in (2, 3):
        raise _usage("ws::parse parser ?dtd? text")
    parser = interp.handles.get(args[0], Parser, what="parser")
    dtd = _dtd(interp, args[1]) if len(args) == 3 else None
    tree = parser.parse(args[-1], dtd)
    return interp.handles.new("tree", tree)


def ws_dump(interp, args):
    if len(args) not in (2, 3) or args[0] != "string":
        raise _usage("ws::dump string ?depth? node")
    depth = None
    if len(args) == 3:
        depth = _index(args[1], -1)
        if depth < 0:
            raise TclError(f'bad depth "{args[1]}"')
    tree, nid = _node(interp, args[-1])
    return tree.dump(nid, depth)


def ws_node(interp, args):
    if len(args) == 3 and args[:2] == ["get", "content"]:
        tree, nid = _node(interp, args[2])
        return content_to_value(tree.content(nid))
    if len(args) == 3 and args[:2] == ["get", "type"]:
        tree, nid = _node(interp, args[2])
        return tree.kind(nid)
    if len(args) == 4 and args[:2] == ["set", "content"]:
        tree, nid = _node(interp, args[2])
        tree.set_content(nid, value_to_content(args[3]))
        return ""
    if len(args) >= 2 and args[0] == "new":
        value = args[1] if len(args) == 2 else format_list(args[1:])
        frag = node_create(value_to_content(value))
        return interp.handles.new("frag", frag)
    raise _usage("ws::node get content|type node | ws::node set content node value | ws::node new content")


def ws_tag(interp, args):
    if len(args) >= 2 and args[0] == "new":
        attrs = []
        if len(args) == 3:
            attrs = _as_pairs(args[2], "attribute")
        return _tag_value(TagData(args[1], attrs))
    if len(args) < 3:
        raise _usage("ws::tag get|set|remove|has name|attrib tag ?args?")
    action, field, value = args[0], args[1], args[2]
    tag = _tag_from_value(value)
    rest = args[3:]
    if (action, field) == ("get", "name") and not rest:
        return tag.name
    if (action, field) == ("get", "attrib") and len(rest) == 1:
        got = tag.get_attrib(rest[0])
        return "" if got is None else got
    if (action, field) == ("get", "attribs") and not rest:
        return _attrs_value(tag)
    if (action, field) == ("has", "attrib") and len(rest) == 1:
        return "1" if tag.has_attrib(rest[0]) else "0"
    if (action, field) == ("set", "name") and len(rest) == 1:
        tag.set_name(rest[0])
        return _tag_value(tag)
    if (action, field) == ("set", "attrib") and len(rest) in (1, 2):
        tag.set_attrib(rest[0], rest[1] if len(rest) == 2 else None)
        return _tag_value(tag)
    if (action, field) == ("remove", "attrib") and len(rest) == 1:
        tag.remove_attrib(rest[0])
        return _tag_value(tag)
    raise TclError(f'bad ws::tag usage: "{" ".join(args[:2])}"')


def ws_parent(interp, args):
    if len(args) != 1:
        raise _usage("ws::parent node")
    tree, nid = _node(interp, args[0])
    return _node_handle(interp, tree, tree.parent(nid))


def ws_child(interp, args):
    if len(args) not in (1, 2):
        raise _usage("ws::child node ?index?")
    tree, nid = _node(interp, args[0])
    kids = tree.children(nid)
    if len(args) == 1:
        return format_list(_node_handle(interp, tree, k) for k in kids)
    i = _index(args[1], len(kids) - 1)
    return _node_handle(interp, tree, kids[i]) if 0 <= i < len(kids) else ""


def ws_sibling(interp, args):
    if len(args) not in (1, 2):
        raise _usage("ws::sibling node ?next|prev?")
    tree, nid = _node(interp, args[0])
    return _node_handle(interp, tree, tree.sibling(nid, args[1] if len(args) == 2 else "next"))


def ws_cut(interp, args):
    if len(args) != 1:
        raise _usage("ws::cut node")
    tree, nid = _node(interp, args[0])
    return interp.handles.new("frag", tree.cut(nid))


def ws_copy(interp, args):
    if len(args) != 1:
        raise _usage("ws::copy node")
    tree, nid = _node(interp, args[0])
    return interp.handles.new("frag", tree.copy(nid))


def ws_paste(interp, args):
    if len(args) not in (2, 3):
        raise _usage("ws::paste fragment parent ?index?")
    frag = interp.handles.get(args[0], DetachedTree, what="fragment")
    tree, parent = _node(interp, args[1])
    index = _index(args[2] if len(args) == 3 else None, len(tree.children(parent)))
    top = tree.paste(parent, index, frag)
    return _node_handle(interp, tree, top)


def ws_move(interp, args):
    if len(args) not in (2, 3):
        raise _usage("ws::move node newParent ?index?")
    tree, nid = _node(interp, args[0])
    tree2, parent = _node(interp, args[1])
    if tree2 is not tree:
        raise TclError("ws::move works within one tree; use ws::cut and ws::paste across trees")
    index = _index(args[2] if len(args) == 3 else None, len(tree.children(parent)))
    tree.move(nid, parent, index)
    return ""


def ws_iterator(interp, args):
    if len(args) == 4 and args[0] == "tree":
        tree, nid = _node(interp, args[3])
        try:
            it = TreeIterator(tree, nid, args[1], args[2])
        except ValueError as exc:
            raise TclError(str(exc)) from None
        return interp.handles.new("iter", it)
    if len(args) == 2 and args[0] in ("more", "next"):
        it = interp.handles.get(args[1], TreeIterator, what="iterator")
        if args[0] == "more":
            return "1" if it.more() else "0"
        if not it.more():
            raise TclError("iterator exhausted")
        return _node_handle(interp, it.tree, it.next())
    raise _usage("ws::iterator tree dfs|bfs filter node | ws::iterator more|next it")


def ws_thread(interp, args):
    if args == ["new"]:
        return tasks.Task().id
    if len(args) == 3 and args[0] == "exec":
        task = tasks.get_task(args[1])
        child = interp.child()
        task.start(lambda: child.eval_top(args[2]))
        return ""
    if len(args) == 2 and args[0] in ("status", "result", "destroy"):
        task = tasks.get_task(args[1])
        if args[0] == "status":
            return THREAD_STATUS[task.status]
        if args[0] == "result":
            return task.result()
        task.destroy()
        return ""
    raise _usage("ws::thread new | ws::thread exec t script | ws::thread status|result|destroy t")


def ws_timeout(interp, args):
    if len(args) not in (2, 3):
        raise _usage("ws::timeout script timeout ?timeslot?")
    try:
        timeout = int(args[1])
        timeslot = int(args[2]) if len(args) == 3 else 500
    except ValueError:
        raise TclError("timeout and timeslot must be integers") from None
    child = interp.child()
    try:
        return tasks.with_timeout(lambda: child.eval_top(args[0]), timeout, timeslot)
    except tasks.TaskFailed as exc:
        raise TclError(tasks.WS_THREAD_FAIL, f"{tasks.WS_THREAD_FAIL} {exc.reason}") from None


def _integer(text: str) -> int:
    try:
        return int(text)
    except ValueError:
        raise TclError(f'expected integer but got "{text}"') from None


def ws_webgrep(interp, args):
    if len(args) not in (3, 4):
        raise _usage("ws::webgrep url depth pattern ?timeoutMs?")
    timeout = _integer(args[3]) if len(args) == 4 else apps.DEFAULT_FETCH_TIMEOUT_MS
    result = apps.webgrep(args[0], _integer(args[1]), args[2], timeout_ms=timeout)
    return format_list(result.matches)


def ws_annotate_links(interp, args):
    if len(args) not in (1, 2):
        raise _usage("ws::annotate_links url ?reportVar?")
    report = apps.annotate_links(args[0])
    if len(args) == 2:
        rows = [format_list([e.verdict, e.resolved or "", e.href]) for e in report.links]
        interp.set_var(args[1], format_list(rows))
    return report.annotated_html


def ws_webcopy(interp, args):
    if len(args) != 3:
        raise _usage("ws::webcopy url depth dir")
    return str(apps.webcopy(args[0], _integer(args[1]), args[2]))


COMMANDS = {
    "ws::url": ws_url,
    "ws::stream": ws_stream,
    "ws::urlconn": ws_urlconn,
    "ws::getpage": ws_getpage,
    "ws::postpage": ws_postpage,
    "ws::validate_link": ws_validate_link,
    "ws::resolve_url": ws_resolve_url,
    "ws::url_encode": ws_url_encode,
    "ws::dtd": ws_dtd,
    "ws::parser": ws_parser,
    "ws::parse": ws_parse,
    "ws::dump": ws_dump,
    "ws::node": ws_node,
    "ws::tag": ws_tag,
    "ws::parent": ws_parent,
    "ws::child": ws_child,
    "ws::sibling": ws_sibling,
    "ws::cut": ws_cut,
    "ws::copy": ws_copy,
    "ws::paste": ws_paste,
    "ws::move": ws_move,
    "ws::iterator": ws_iterator,
    "ws::iterate": ws_iterator,
    "ws::thread": ws_thread,
    "ws::timeout": ws_timeout,
    "ws::webgrep": ws_webgrep,
    "ws::annotate_links": ws_annotate_links,
    "ws::webcopy": ws_webcopy,
}


def register(interp) -> None:
    for name, fn in COMMANDS.items():
        interp.register(name, fn)
