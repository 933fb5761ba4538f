import pytest

from foalt.sexp import Atom, SexpError, SList, parse_all, parse_one


def test_atoms_and_nesting():
    sx = parse_one("(a (b c) 1.5)")
    assert isinstance(sx, SList)
    assert sx.items[0].text == "a"
    assert [i.text for i in sx.items[1].items] == ["b", "c"]
    assert sx.items[2].text == "1.5"


def test_comments_and_whitespace():
    forms = parse_all("; a comment\n(x) ; trailing\n(y)\n")
    assert len(forms) == 2
    assert forms[0].items[0].text == "x"


def test_line_numbers():
    forms = parse_all("(a)\n\n(b)")
    assert forms[0].line == 1
    assert forms[1].line == 3


def test_unbalanced_raises():
    with pytest.raises(SexpError):
        parse_all("(a (b)")
    with pytest.raises(SexpError):
        parse_all("a))")


def test_parse_one_rejects_trailing():
    with pytest.raises(SexpError):
        parse_one("(a) (b)")


def test_bars_quote_symbols():
    sx = parse_one("(|hello world| x)")
    assert isinstance(sx.items[0], Atom)
    assert "hello world" in sx.items[0].text
