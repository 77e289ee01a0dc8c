from pathlib import Path

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from doctrines.doctrine import validate_doctrine, validate_morphism
from doctrines.comonad import validate_comonad
from doctrines.errors import DuplicateName, SpecSyntaxError, UnresolvedReference
from doctrines.specfile import build, parse_spec_file, print_spec, read_element, read_object, show

SPECS = Path(__file__).resolve().parent.parent / "specs"


def test_chain_spec_builds_and_validates():
    doc = parse_spec_file(str(SPECS / "chain.spec"))
    assert doc.names() == ["Base", "C", "H", "B2", "P", "R", "G", "K"]
    b = build(doc)
    validate_doctrine(b.get("P"))
    validate_doctrine(b.get("R"))
    validate_morphism(b.get("G"))
    validate_comonad(b.get("K"))


def test_powerset_builtin():
    b = build(parse_spec_file(str(SPECS / "powerset.spec")))
    P = b.get("Pow", "doctrine")
    X = read_object(P, "[0,1]")
    assert X == (0, 1)
    assert read_element(P, X, "[0]") == frozenset({0})
    with pytest.raises(UnresolvedReference):
        read_element(P, X, "[7]")


def test_builtin_shorthand_names_by_kind():
    doc = parse_spec_file("builtin powerset probes=[[],[0]]\n")
    assert doc.names() == ["powerset"]
    assert parse_spec_file(print_spec(doc)) == doc


def test_lt_builtin():
    doc = parse_spec_file('builtin T lt atoms=[p,q] axioms=["p | q"]\n')
    L = build(doc).get("T")
    assert read_element(L, L.base.terminal(), '"p & q"') == frozenset({"11"})


names = st.from_regex(r"[a-z][a-z0-9]{0,3}", fullmatch=True)


@settings(max_examples=50, deadline=None)
@given(st.lists(names, min_size=1, max_size=6, unique=True), st.data())
def test_print_then_parse_is_identity(els, data):
    covers = data.draw(st.lists(st.tuples(st.integers(0, len(els) - 1),
                                          st.integers(0, len(els) - 1)), max_size=6))
    covers = sorted({(els[min(i, j)], els[max(i, j)]) for i, j in covers if i != j})
    text = "poset Q\n  elements " + " ".join(els) + "\n"
    if covers:
        text += "  covers " + " ".join(f"{a}<{b}" for a, b in covers) + "\n"
    text += "end\n"
    doc = parse_spec_file(text)
    again = parse_spec_file(print_spec(doc))
    assert again == doc
    assert print_spec(again) == print_spec(doc)
    Q = build(doc).get("Q")
    for a, b in covers:
        assert Q.leq(a, b)


@pytest.mark.parametrize("text, line, col", [
    ("bogus X\nend\n", 1, 1),
    ("poset\nend\n", 1, 6),
    ("poset A\n  elements a\n", 1, 1),
    ("poset A\n  elements a\n  nope a\nend\n", 3, 3),
    ("poset A\n  elements [a\nend\n", 2, 12),
    ("poset A\n  elements a]\nend\n", 2, 13),
    ("poset A\n  elements a\nend extra\n", 3, 5),
    ('builtin P lt atoms="p\n', 1, 20),
    ("builtin P frob\n", 1, 11),
    ("builtin P powerset size=3\n", 1, 20),
])
def test_syntax_errors_carry_positions(text, line, col):
    with pytest.raises(SpecSyntaxError) as e:
        parse_spec_file(text)
    assert (e.value.line, e.value.col) == (line, col)


def test_duplicate_block_names():
    with pytest.raises(DuplicateName):
        parse_spec_file("poset A\n  elements a\nend\nposet A\n  elements b\nend\n")


def test_duplicate_elements():
    with pytest.raises(DuplicateName):
        build(parse_spec_file("poset A\n  elements a a\nend\n")).get("A")


def test_unresolved_references():
    doc = parse_spec_file("poset A\n  elements a\n  leq a<=b\nend\n")
    with pytest.raises(UnresolvedReference):
        build(doc).get("A")
    doc = parse_spec_file("category C\n  semilattice Nope\nend\n")
    with pytest.raises(UnresolvedReference):
        build(doc).get("C")
    doc = parse_spec_file("poset A\n  elements a\nend\ncategory C\n  semilattice A\nend\n"
                          "doctrine P\n  base A\n  fiber a A\nend\n")
    with pytest.raises(UnresolvedReference):
        build(doc).get("P")


def test_cycles_are_reported():
    doc = parse_spec_file("category C\n  semilattice C\nend\n")
    with pytest.raises(UnresolvedReference):
        build(doc).get("C")


def test_missing_reindex_table_entry():
    text = (SPECS / "chain.spec").read_text().replace("reindex s<=t 0:0 h:h 1:1",
                                                    "reindex s<=t 0:0 h:h")
    with pytest.raises(SpecSyntaxError):
        build(parse_spec_file(text)).get("P")


def test_show_is_deterministic():
    assert show(frozenset({2, 1, 10})) == "{1,10,2}"
    assert show(((0, 1), "a")) == "((0,1),a)"
