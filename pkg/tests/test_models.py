import itertools

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from doctrines.doctrine import validate_doctrine
from doctrines.errors import AtomCapExceeded, DoctrineError, ProbeTooLarge
from doctrines.models import (
    LTDoctrine,
    check_generated,
    injected_doctrine,
    lt_add_axiom_iso,
    powerset_collapse,
    powerset_doctrine,
    powerset_examples,
    powerset_xy,
    random_lattice_doctrine,
    random_semilattice_doctrine,
    suite,
)
from doctrines.reader import extend

ATOMS = ["p", "q", "r"]


def formulas(depth=3):
    leaf = st.sampled_from([("atom", a) for a in ATOMS] + [("const", 0), ("const", 1)])
    return st.recursive(
        leaf,
        lambda sub: st.one_of(
            st.tuples(st.just("not"), sub),
            st.tuples(st.sampled_from(["and", "or", "imp", "xor"]), sub, sub)),
        max_leaves=8)


def render(t):
    tag = t[0]
    if tag == "atom":
        return t[1]
    if tag == "const":
        return str(t[1])
    if tag == "not":
        return f"~({render(t[1])})"
    op = {"and": "&", "or": "|", "imp": ">>", "xor": "^"}[tag]
    return f"({render(t[1])}) {op} ({render(t[2])})"


def truth(t, v):
    tag = t[0]
    if tag == "atom":
        return v[t[1]]
    if tag == "const":
        return bool(t[1])
    if tag == "not":
        return not truth(t[1], v)
    x, y = truth(t[1], v), truth(t[2], v)
    return {"and": x and y, "or": x or y, "imp": (not x) or y, "xor": x != y}[tag]


def rows():
    return [dict(zip(ATOMS, bits)) for bits in itertools.product((False, True), repeat=3)]


def key(v):
    return "".join("1" if v[a] else "0" for a in ATOMS)


@settings(max_examples=80, deadline=None)
@given(formulas(), st.lists(formulas(), max_size=2))
def test_lt_denotation_is_the_truth_table(f, axioms):
    L = LTDoctrine(ATOMS, [render(a) for a in axioms])
    models = [v for v in rows() if all(truth(a, v) for a in axioms)]
    assert set(L.models) == {key(v) for v in models}
    assert L.denote(render(f)) == {key(v) for v in models if truth(f, v)}


@settings(max_examples=60, deadline=None)
@given(formulas(), formulas())
def test_lt_order_is_entailment(f, g):
    L = LTDoctrine(ATOMS)
    entails = all(truth(g, v) for v in rows() if truth(f, v))
    assert L.fiber(L.base.terminal()).leq(L.denote(render(f)), L.denote(render(g))) == entails


@settings(max_examples=40, deadline=None)
@given(formulas(), st.lists(formulas(), max_size=1))
def test_adding_an_axiom_matches_the_bigger_theory(phi, axioms):
    out = lt_add_axiom_iso(ATOMS, [render(a) for a in axioms], render(phi))
    n = sum(1 for v in rows() if all(truth(a, v) for a in axioms) and truth(phi, v))
    assert out["iso"] and out["size"] == 2 ** n


def test_dnf_names_its_class():
    L = LTDoctrine(ATOMS, ["p >> q"])
    for cls in [frozenset(), frozenset(L.models[:2]), frozenset(L.models)]:
        assert L.denote(L.formula_of(cls)) == cls


def test_lt_errors():
    with pytest.raises(AtomCapExceeded):
        LTDoctrine(list("abcde"))
    with pytest.raises(DoctrineError):
        LTDoctrine(["p"], ["q"])
    with pytest.raises(DoctrineError):
        LTDoctrine(["p"]).denote("p +")


def test_powerset_fixtures():
    rep = powerset_examples()
    assert rep.ok and len(rep.checks) > 10


def test_collapse_and_xy_on_other_probes():
    probes = ((), (0,), (0, 1))
    assert powerset_collapse(probes).ok
    assert powerset_xy(probes, X=(0, 1, 2), Y=(1, 2)).ok


def test_powerset_universe_cap():
    P = powerset_doctrine(cap=3)
    with pytest.raises(ProbeTooLarge):
        P.fiber((0, 1, 2, 3))


def test_large_powerset_extension_stays_lazy():
    P = powerset_doctrine()
    res = extend(P, (0, 1), frozenset({0}))
    big = res.doctrine.fiber(P.base.prod((0, 1, 2), (0, 1, 2)))
    assert big.size() == 2 ** 9


@pytest.mark.parametrize("make", [
    lambda s: random_semilattice_doctrine(s),
    lambda s: random_lattice_doctrine(s),
    lambda s: injected_doctrine("M3", s),
    lambda s: injected_doctrine("N5", s),
])
def test_generators_are_deterministic_and_valid(make):
    for s in range(5):
        P, Q = make(s), make(s)
        check_generated(P)
        assert list(P.objects()) == list(Q.objects())
        for a in P.objects():
            assert P.fiber(a).elements == Q.fiber(a).elements


def test_suite_mix():
    S = suite(24, seed=1)
    kinds = {s.kind for s in S}
    assert kinds == {"reader", "interior", "identity"}
    assert all(len(list(s.doctrine.objects())) <= 4 for s in S)
    assert all(s.doctrine.fiber(a).size() <= 16 for s in S for a in s.doctrine.objects())
    validate_doctrine(S[0].doctrine)
