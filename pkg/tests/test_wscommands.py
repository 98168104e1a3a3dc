import time

import pytest

from conftest import SITE, read, run_tcl
from webshell.interp import Interp, TclError
from webshell.wscommands import content_to_value, value_to_content
from webshell.tree import Comment, Element, TagData, Text


def ev(source, interp=None):
    return run_tcl(source, interp)


def test_content_values_round_trip():
    for c in (Text("hello world"), Comment(" x "), Element(TagData("a", [("href", "x y"), ("checked", None)]))):
        assert value_to_content(content_to_value(c)) == c
    assert content_to_value(Element(TagData("a", [("href", "x")]))) == "tag a {{href x}}"
    with pytest.raises(TclError):
        value_to_content("bogus value")


def test_parse_dump_and_navigate():
    src = """
    set p_ [ws::parser dtd]
    set t_ [ws::parse $p_ "<ul><li>a<li>b</ul>"]
    set ul_ [ws::child $t_ 0]
    set li1_ [ws::child $ul_ 0]
    set li2_ [ws::sibling $li1_ next]
    puts [ws::dump string $li2_]
    puts [ws::node get type $li1_]
    puts [ws::parent $li1_]
    puts [ws::child $ul_]
    puts [ws::dump string 0 $ul_]
    puts "[ws::sibling $li2_ next]|"
    """
    _, out = ev(src)
    lines = out.splitlines()
    assert lines[0] == "<li>b</li>"
    assert lines[1] == "tag"
    assert lines[2].startswith("node")
    assert len(lines[3].split()) == 2
    assert lines[4] == "<ul></ul>"
    assert lines[5] == "|"


def test_tag_commands_are_value_based():
    src = """
    set t_ [ws::tag new a {href x.html}]
    set t2_ [ws::tag set attrib $t_ title "two words"]
    list [ws::tag get name $t2_] [ws::tag get attrib $t2_ HREF] [ws::tag get attrib $t2_ title] \
         [ws::tag get attrib $t_ title] [ws::tag has attrib $t2_ title] [ws::tag has attrib $t_ nope]
    """
    i = Interp()
    assert i.eval_top(src) == "a x.html {two words} {} 1 0"
    assert i.eval_top("ws::tag get name [ws::tag set name $t_ B]") == "b"
    assert i.eval_top("ws::tag get attribs [ws::tag remove attrib $t2_ href]") == "{title {two words}}"


def test_node_set_content_and_surgery():
    src = """
    set t_ [ws::parse [ws::parser dtd] "<div><p>x</p><p>y</p></div>"]
    set div_ [ws::child $t_ 0]
    set p1_ [ws::child $div_ 0]
    set tag_ [ws::node get content $p1_]
    ws::node set content $p1_ [ws::tag set attrib $tag_ class first]
    set f_ [ws::copy $p1_]
    ws::paste $f_ $div_
    set f2_ [ws::cut [ws::child $div_ 1]]
    ws::paste $f2_ $div_ 0
    ws::move [ws::child $div_ 2] $div_ 0
    set n_ [ws::node new text "new text"]
    ws::paste $n_ $t_
    puts [ws::dump string $t_]
    """
    _, out = ev(src)
    assert out == '<div><p class="first">x</p><p>y</p><p class="first">x</p></div>new text\n'


def test_surgery_errors_surface_as_tcl_errors():
    i = Interp()
    i.eval_top('set t_ [ws::parse [ws::parser dtd] "<div><p>x</p></div>"]')
    i.eval_top('set d_ [ws::child $t_ 0]; set p_ [ws::child $d_ 0]')
    with pytest.raises(TclError, match="root"):
        i.eval_top("ws::cut $t_")
    with pytest.raises(TclError, match="cycle"):
        i.eval_top("ws::move $d_ $p_")
    i.eval_top("set f_ [ws::cut $p_]")
    with pytest.raises(TclError, match="not in this tree"):
        i.eval_top("ws::parent $p_")
    with pytest.raises(TclError, match='invalid node "nosuch"'):
        i.eval_top("ws::parent nosuch")


def test_iterators_and_exhaustion():
    i = Interp()
    i.eval_top('set t_ [ws::parse [ws::parser dtd] "<p><a href=x>1</a><a href=y>2</a>"]')
    i.eval_top('set it_ [ws::iterator tree bfs TAG $t_]')
    names = []
    while i.eval_top("ws::iterator more $it_") == "1":
        names.append(i.eval_top("ws::tag get name [ws::node get content [ws::iterate next $it_]]"))
    assert names == ["#root", "p", "a", "a"]
    with pytest.raises(TclError, match="iterator exhausted"):
        i.eval_top("ws::iterate next $it_")
    with pytest.raises(TclError):
        i.eval_top("ws::iterator tree sideways tag $t_")


def test_dtd_commands():
    i = Interp()
    i.eval_top('set d_ [ws::dtd load "x END_OPTIONAL CLOSES(x)"]')
    i.eval_top('set p_ [ws::parser dtd $d_]')
    assert i.eval_top('ws::dump string [ws::parse $p_ "<x>1<x>2"]') == "<x>1</x><x>2</x>"
    assert "li END_OPTIONAL" in i.eval_top("ws::dtd dump [ws::dtd builtin frameset]")
    with pytest.raises(TclError, match="line 1"):
        i.eval_top('ws::dtd load "p VOID CLOSES(p)"')
    with pytest.raises(TclError, match="unknown builtin"):
        i.eval_top("ws::parser dtd strict.dtd")


def test_net_commands(srv):
    i = Interp()
    assert i.eval_top(f"ws::getpage {srv.url('/hello.html')}") == read(f"{SITE}/hello.html")
    assert i.eval_top(f"ws::postpage {srv.url('/echo-form')} {{a 1}}") == "POST  a=1"
    assert i.eval_top(f"ws::validate_link {srv.url('/hello.html')}") == "1"
    assert i.eval_top(f"ws::validate_link {srv.url('/gone')}") == "0"
    assert i.eval_top("ws::resolve_url http://h/a/b.html ../c.html") == "http://h/c.html"
    assert i.eval_top("ws::url_encode {q {a b}}") == "q=a%20b"
    i.eval_top(f"set c_ [ws::urlconn new {srv.url('/gone')}]")
    assert i.eval_top("ws::urlconn get HeaderField 0 $c_") == "HTTP/1.0 404 Not Found"
    with pytest.raises(TclError, match="404"):
        i.eval_top(f"ws::getpage {srv.url('/gone')}")


def test_stream_commands(srv):
    i = Interp()
    i.eval_top(f"set s_ [ws::stream in url [ws::url new {srv.url('/hello.html')}]]")
    assert i.eval_top("ws::stream read $s_") == read(f"{SITE}/hello.html")
    assert i.eval_top("ws::stream read $s_") == ""
    i.eval_top("ws::stream close $s_")
    with pytest.raises(TclError):
        i.eval_top("ws::stream read $s_")


def test_thread_commands():
    i = Interp()
    i.eval_top("set g_ 7; set t_ [ws::thread new]; ws::thread exec $t_ {after 50; expr $g_ * 6}")
    assert i.eval_top("ws::thread status $t_") == "WS_THREAD_RUNNING"
    time.sleep(0.3)
    assert i.eval_top("ws::thread status $t_") == "WS_THREAD_DONE"
    assert i.eval_top("ws::thread result $t_") == "42"
    with pytest.raises(TclError, match="already started"):
        i.eval_top("ws::thread exec $t_ {list}")
    i.eval_top("ws::thread destroy $t_")
    with pytest.raises(TclError, match="unknown task"):
        i.eval_top("ws::thread status $t_")
    i.eval_top("set t_ [ws::thread new]; ws::thread exec $t_ {error bad}")
    time.sleep(0.1)
    assert i.eval_top("ws::thread status $t_") == "WS_THREAD_FAIL"
    with pytest.raises(TclError):
        i.eval_top("ws::thread result $t_")


def test_thread_child_does_not_leak_variables():
    i = Interp()
    i.eval_top("set x 1; set t_ [ws::thread new]; ws::thread exec $t_ {set x 2; set y 3}")
    time.sleep(0.1)
    assert i.eval_top("list $x [info exists y]") == "1 0"


def test_native_timeout():
    i = Interp()
    assert i.eval_top('ws::timeout "list ok" 1000 50') == "ok"
    start = time.monotonic()
    assert i.eval_top('catch {ws::timeout "after 5000" 300 100} msg') == "1"
    assert 0.3 <= time.monotonic() - start < 0.6
    assert i.eval_top("set msg") == "WS_THREAD_FAIL"
    assert i.eval_top("set errorCode") == "WS_THREAD_FAIL timeout"
    i.eval_top('catch {ws::timeout "error x" 1000 100}')
    assert i.eval_top("set errorCode") == "WS_THREAD_FAIL failed"


def test_application_commands(srv, tmp_path):
    interp, out = ev(f"""
        puts [ws::webgrep {srv.url('/small/a.html')} 2 cnrg]
        set html [ws::annotate_links {srv.url('/links/page.html')} rows]
        foreach row $rows {{ foreach {{verdict url href}} $row break; puts "$verdict $href" }}
        puts [ws::webcopy {srv.url('/mirror/')} 1 {tmp_path}]
    """)
    lines = out.splitlines()
    assert lines[0] == f"{srv.url('/small/a.html')} {srv.url('/small/c.html')}"
    assert lines[1:7] == ["valid ../hello.html", "valid /cnrg/", "broken /links/nowhere.html",
                          "broken http://127.0.0.1:1/refused.html", "valid /cnrg/projects.html",
                          "skipped #top"]
    assert lines[7] == "1"
    assert interp.get_var("html").count("<strike>") == 2
    for bad, msg in [("ws::webgrep http://x/ deep y", 'expected integer but got "deep"'),
                     ("ws::webgrep http://x/ 1 (", "missing"),
                     ("ws::webcopy http://x/ 1", "wrong # args")]:
        with pytest.raises(TclError, match=msg):
            ev(bad)
