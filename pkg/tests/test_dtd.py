import pytest
from hypothesis import given, strategies as st

from webshell.dtd import BUILTINS, Dtd, DtdError, ElementRule, dtd_builtin, dtd_load

# HTML 4 element tables, written out independently of the bundled file
HTML4_VOID = {"area", "base", "basefont", "br", "col", "frame", "hr", "img", "input",
              "isindex", "link", "meta", "param"}
END_OPTIONAL = {"p", "li", "dt", "dd", "tr", "td", "th", "thead", "tbody", "option",
                "html", "head", "body"}
AUTO_CLOSE = {
    "li": {"li"}, "p": {"p"}, "td": {"td", "th", "tr"}, "th": {"td", "th", "tr"},
    "tr": {"tr"}, "dt": {"dt", "dd"}, "dd": {"dt", "dd"}, "option": {"option"},
}


def test_single_void_declaration():
    d = dtd_load("br VOID")
    rule = d.lookup("br")
    assert rule.void and rule.end_optional and not rule.auto_close_on


def test_li_closes_li():
    rule = dtd_load("li END_OPTIONAL CLOSES(li)").lookup("li")
    assert rule.end_optional and rule.auto_close_on == {"li"}
    builtin = dtd_builtin("frameset").lookup("li")
    assert "li" in builtin.auto_close_on and builtin.end_optional


def test_void_with_closes_is_rejected():
    with pytest.raises(DtdError, match="line 1: VOID element cannot declare CLOSES"):
        dtd_load("p VOID CLOSES(p)")


@pytest.mark.parametrize("source, lineno", [
    ("br VOID\nfoo BOGUS", 2),
    ("\n\n# c\n9bad", 4),
    ("a CLOSES()", 1),
    ("DEFAULT VOID", 1),
])
def test_malformed_lines_name_their_line(source, lineno):
    with pytest.raises(DtdError, match=f"^line {lineno}:"):
        dtd_load(source)


@pytest.mark.parametrize("source", ["", "   \n# only a comment\n"])
def test_empty_source(source):
    with pytest.raises(DtdError, match="empty"):
        dtd_load(source)


def test_duplicate_declaration_last_wins():
    d = dtd_load("x END_OPTIONAL\nx VOID")
    assert d.lookup("x").void


def test_default_line():
    d = dtd_load("DEFAULT END_OPTIONAL\nbr VOID")
    assert d.lookup("whatever").end_optional
    assert not dtd_load("br VOID").lookup("whatever").end_optional


def test_builtin_coverage():
    d = dtd_builtin("frameset")
    for name in HTML4_VOID:
        assert d.lookup(name).void, name
    for name in END_OPTIONAL:
        assert d.lookup(name).end_optional, name
    for name, closers in AUTO_CLOSE.items():
        assert closers <= d.lookup(name).auto_close_on, name


def test_builtin_lookups():
    d = dtd_builtin("frameset")
    assert d.lookup("br").void
    assert d.lookup("blink") is d.default_rule
    assert d.lookup("LI") == d.lookup("li")
    div = d.lookup("div")
    assert div is d.default_rule and not div.end_optional
    assert d.lookup("madeup") is d.default_rule


def test_builtin_names():
    assert BUILTINS == ("frameset",)
    assert dtd_builtin("frameset.dtd") is dtd_builtin("frameset")
    with pytest.raises(DtdError, match="unknown builtin DTD.*available: frameset"):
        dtd_builtin("strict")


def test_builtin_rules_satisfy_invariants():
    d = dtd_builtin("frameset")
    for key, rule in d.rules.items():
        assert key == rule.name == rule.name.lower()
        if rule.void:
            assert rule.end_optional and not rule.auto_close_on
        assert rule.flow_container == (not rule.void)


def test_element_rule_invariants():
    assert ElementRule("br", void=True).end_optional
    with pytest.raises(DtdError):
        ElementRule("br", void=True, auto_close_on=frozenset({"p"}))
    with pytest.raises(DtdError):
        ElementRule("")
    with pytest.raises(DtdError):
        ElementRule("DIV")


def test_builtin_dump_round_trips():
    d = dtd_builtin("frameset")
    assert dtd_load(d.dump()) == d


names = st.from_regex(r"[a-z][a-z0-9]{0,6}", fullmatch=True)


@st.composite
def rules(draw):
    name = draw(names)
    void = draw(st.booleans())
    closes = frozenset() if void else frozenset(draw(st.sets(names, max_size=4)))
    return ElementRule(name, void=void, end_optional=draw(st.booleans()), auto_close_on=closes)


@given(st.lists(rules(), max_size=12), st.booleans())
def test_dump_load_round_trip(rule_list, default_optional):
    table = {r.name: r for r in rule_list}
    d = Dtd("gen", table, ElementRule("#default", end_optional=default_optional))
    if not table and not default_optional:
        return  # dump would be a bare comment, which is "empty" by contract
    again = dtd_load(d.dump())
    assert again == d
    for name in table:
        assert again.lookup(name) == table[name]


@given(st.text(max_size=20))
def test_lookup_is_total(name):
    d = dtd_builtin("frameset")
    assert isinstance(d.lookup(name), ElementRule)
