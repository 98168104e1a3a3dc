"""webshell: a Tcl-flavoured scripting toolkit for fetching, parsing and
rewriting HTML pages."""

from .apps import annotate_links, webcopy, webgrep
from .dtd import Dtd, ElementRule, dtd_builtin, dtd_load
from .interp import Interp
from .iterate import TreeIterator, iterator_new
from .net import get_page, post_page, resolve_url, validate_link
from .parser import Parser, parse, tokenize
from .tasks import Task, with_timeout
from .tcl import TclError
from .tree import Comment, DetachedTree, Element, TagData, TagTree, Text, node_create

__version__ = "0.1.0"

__all__ = [
    "annotate_links", "webcopy", "webgrep",
    "Dtd", "ElementRule", "dtd_builtin", "dtd_load",
    "Interp", "TclError",
    "TreeIterator", "iterator_new",
    "get_page", "post_page", "resolve_url", "validate_link",
    "Parser", "parse", "tokenize",
    "Task", "with_timeout",
    "Comment", "DetachedTree", "Element", "TagData", "TagTree", "Text", "node_create",
]


def script_path(name: str = "webgrep.ws") -> str:
    """Filesystem path of a bundled script."""
    import os

    return os.path.join(os.path.dirname(__file__), "scripts", name)
