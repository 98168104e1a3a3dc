"""Structural iterators over a subtree, in DFS (preorder) or BFS order.

The node sequence is captured when the iterator is created, so later tree
surgery cannot change what it yields.
"""

from __future__ import annotations

from collections import deque

from .tree import Comment, Element, TagTree, Text

__all__ = ["IteratorExhausted", "TreeIterator", "iterator_new", "ORDERS", "FILTERS"]

ORDERS = ("dfs", "bfs")
FILTERS = {"text": Text, "comment": Comment, "tag": Element, "any": None}


class IteratorExhausted(LookupError):
    pass


def _preorder(tree: TagTree, root) -> list:
    return tree.subtree(root)


def _level_order(tree: TagTree, root) -> list:
    nodes = tree._nodes
    out = []
    queue = deque([root])
    while queue:
        cur = queue.popleft()
        out.append(cur)
        queue.extend(nodes[cur].children)
    return out


class TreeIterator:
    def __init__(self, tree: TagTree, root, order: str = "dfs", filter: str = "any"):
        order_key = str(order).lower()
        filter_key = str(filter).lower()
        if order_key not in ORDERS:
            raise ValueError(f"unknown iteration order {order!r}: use dfs or bfs")
        if filter_key not in FILTERS:
            raise ValueError(f"unknown node filter {filter!r}: use {', '.join(FILTERS)}")
        tree._node(root)
        self.tree = tree
        self.order = order_key
        self.filter = filter_key
        ids = _preorder(tree, root) if order_key == "dfs" else _level_order(tree, root)
        want = FILTERS[filter_key]
        if want is not None:
            nodes = tree._nodes
            ids = [i for i in ids if type(nodes[i].content) is want]
        self.snapshot = ids
        self.cursor = 0

    def more(self) -> bool:
        return self.cursor < len(self.snapshot)

    def next(self):
        if self.cursor >= len(self.snapshot):
            raise IteratorExhausted("iterator exhausted")
        nid = self.snapshot[self.cursor]
        self.cursor += 1
        return nid

    def __iter__(self):
        return self

    def __next__(self):
        if not self.more():
            raise StopIteration
        return self.next()

    def __len__(self):
        return len(self.snapshot)


def iterator_new(tree: TagTree, root=None, order: str = "dfs", filter: str = "any") -> TreeIterator:
    return TreeIterator(tree, tree.root if root is None else root, order, filter)
