from collections import deque

import pytest
from hypothesis import given, strategies as st

from conftest import CORPUS_FILES, read
from webshell.iterate import IteratorExhausted, TreeIterator, iterator_new
from webshell.parser import parse
from webshell.tree import Comment, Element, Text, TreeError

KINDS = {"text": Text, "comment": Comment, "tag": Element}


def recursive_preorder(tree, nid, out=None):
    out = [] if out is None else out
    out.append(nid)
    for k in tree.children(nid):
        recursive_preorder(tree, k, out)
    return out


def queue_level_order(tree, nid):
    out, q = [], deque([nid])
    while q:
        cur = q.popleft()
        out.append(cur)
        for k in tree.children(cur):
            q.append(k)
    return out


def keep(tree, ids, flt):
    if flt == "any":
        return ids
    return [i for i in ids if isinstance(tree.content(i), KINDS[flt])]


def ul_tree():
    t = parse("<ul><li>a<li>b</ul>")
    ul = t.children(t.root)[0]
    li1, li2 = t.children(ul)
    return t, ul, li1, li2, t.children(li1)[0], t.children(li2)[0]


def test_dfs_and_bfs_examples():
    t, ul, li1, li2, a, b = ul_tree()
    assert list(iterator_new(t, ul, "dfs", "any")) == [ul, li1, a, li2, b]
    assert list(iterator_new(t, ul, "bfs", "any")) == [ul, li1, li2, a, b]


def test_tag_filter_on_text_node_is_empty():
    t, ul, li1, li2, a, b = ul_tree()
    it = iterator_new(t, a, "dfs", "tag")
    assert not it.more() and len(it) == 0


def test_more_next_protocol():
    t, ul, *_ = ul_tree()
    it = iterator_new(t, ul)
    got = []
    while it.more():
        got.append(it.next())
    assert len(got) == 5 and not it.more()
    with pytest.raises(IteratorExhausted, match="iterator exhausted"):
        it.next()


def test_script_style_href_extraction():
    t = parse('<p><a href="x">1</a><a href="y">2</a></p>')
    it = iterator_new(t, t.root, "dfs", "tag")
    links = []
    while it.more():
        tag = t.content(it.next()).tag
        if tag.name == "a":
            links.append(tag.get_attrib("href"))
    assert links == ["x", "y"]


def test_filter_and_order_words_are_case_insensitive():
    t, ul, *_ = ul_tree()
    assert list(iterator_new(t, ul, "DFS", "TAG")) == list(iterator_new(t, ul, "dfs", "tag"))
    with pytest.raises(ValueError):
        iterator_new(t, ul, "sideways", "any")
    with pytest.raises(ValueError):
        iterator_new(t, ul, "dfs", "element")


def test_stale_root_rejected():
    t, ul, li1, *_ = ul_tree()
    t.cut(li1)
    with pytest.raises(TreeError):
        iterator_new(t, li1)


def test_snapshot_isolation():
    t, ul, li1, li2, a, b = ul_tree()
    it = iterator_new(t, ul)
    t.cut(li2)
    t.append(ul, Text("new"))
    assert list(it) == [ul, li1, a, li2, b]
    with pytest.raises(TreeError):
        t.content(li2)


def test_oracles_on_corpus():
    for path in CORPUS_FILES:
        t = parse(read(path))
        pre = recursive_preorder(t, t.root)
        lvl = queue_level_order(t, t.root)
        for flt in ("text", "comment", "tag", "any"):
            assert list(TreeIterator(t, t.root, "dfs", flt)) == keep(t, pre, flt), (path, flt)
            assert list(TreeIterator(t, t.root, "bfs", flt)) == keep(t, lvl, flt), (path, flt)


@given(st.sampled_from(CORPUS_FILES), st.sampled_from(["dfs", "bfs"]), st.integers(0, 10 ** 6))
def test_filter_soundness_and_union(path, order, pick):
    t = parse(read(path))
    nodes = list(t.walk())
    root = nodes[pick % len(nodes)]
    parts = {f: list(TreeIterator(t, root, order, f)) for f in ("text", "comment", "tag")}
    for f, ids in parts.items():
        assert all(isinstance(t.content(i), KINDS[f]) for i in ids)
    everything = list(TreeIterator(t, root, order, "any"))
    assert sorted(everything) == sorted(parts["text"] + parts["comment"] + parts["tag"])
    assert everything[0] == root
