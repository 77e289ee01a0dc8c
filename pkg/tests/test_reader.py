import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from doctrines.category import semilattice_to_category
from doctrines.doctrine import enumerate_primary_morphisms, identity_morphism, tabulated_doctrine
from doctrines.errors import (
    ConstantDoesNotSatisfyAxiom,
    LazyBaseUnsupported,
    PrimaryRequired,
)
from doctrines.models import (
    injected_doctrine,
    powerset_doctrine,
    random_lattice_doctrine,
    random_semilattice_doctrine,
)
from doctrines.order import FinitePoset, chain, m3
from doctrines.reader import (
    add_axiom,
    add_constant,
    compose_constructions_check,
    conservativity_check,
    constant_precondition,
    distributive_law_check,
    extend,
    factorize_model,
    interpret_new_constant,
    round_trip,
    transport_report,
    uniqueness_and_fullness_check,
)


def some_extensions(seed, count=6):
    rng = random.Random(seed)
    out = []
    for i in range(count):
        s = rng.randrange(10 ** 6)
        P = (random_semilattice_doctrine(s, max_objects=3, max_points=3) if i % 2 == 0
             else random_lattice_doctrine(s, max_objects=3))
        X = rng.choice(list(P.objects()))
        phi = rng.choice(P.fiber(X).elements)
        out.append(extend(P, X, phi))
    return out


def assert_fiber_law(res):
    P, B, X = res.P, res.P.base, res.X
    for a in res.doctrine.objects():
        F = P.fiber(B.prod(X, a))
        bound = P.reindex(B.pr1(X, a))(res.phi)
        assert set(res.doctrine.fiber(a).elements) == {x for x in F.elements if F.leq(x, bound)}
        assert res.doctrine.fiber(a).top == bound


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10 ** 6), st.booleans())
def test_fiber_law(seed, lattice):
    P = (random_lattice_doctrine(seed, max_objects=3) if lattice
         else random_semilattice_doctrine(seed, max_objects=3, max_points=3))
    rng = random.Random(seed)
    X = rng.choice(list(P.objects()))
    res = extend(P, X, rng.choice(P.fiber(X).elements))
    assert_fiber_law(res)
    interpret_new_constant(res)


def test_constant_only_keeps_whole_fibers():
    P = random_semilattice_doctrine(3, max_objects=3, max_points=3)
    X = list(P.objects())[-1]
    res = add_constant(P, X)
    B = P.base
    for a in res.doctrine.objects():
        assert set(res.doctrine.fiber(a).elements) == set(P.fiber(B.prod(X, a)).elements)


def test_axiom_only_on_the_terminal():
    P = random_semilattice_doctrine(4, max_objects=3, max_points=3)
    t = P.base.terminal()
    phi = P.fiber(t).elements[0]
    res = add_axiom(P, phi)
    assert res.X == t
    assert_fiber_law(res)


def test_non_primary_doctrine_is_refused():
    base = semilattice_to_category(chain(1))
    V = FinitePoset.from_covers(("x", "y"), [], "V")
    P = tabulated_doctrine(base, {"0": V}, {})
    with pytest.raises(PrimaryRequired):
        extend(P, "0", "x")


def test_quotient_presentation():
    res = some_extensions(1, 1)[0]
    for a in res.doctrine.objects():
        q = res.quotient(a)
        assert q.quotient.size() == res.doctrine.fiber(a).size()


@pytest.mark.parametrize("seed", range(4))
def test_transport_rows(seed):
    for res in some_extensions(seed, 4):
        for row in transport_report(res):
            if row.held and row.kind != "weak_power_objects":
                assert row.witness_ok and row.agree, (row.kind, row.note)


def test_joins_preservation_flips_only_with_non_distributive_fibers():
    flipped = 0
    for lat in ("M3", "N5"):
        P = injected_doctrine(lat, 0)
        t = P.base.terminal()
        for phi in P.fiber(t).elements:
            row = transport_report(extend(P, t, phi), ["joins"])[0]
            assert row.flags["distributive"] is False
            flipped += row.preserved is False
    assert flipped > 0
    for res in some_extensions(9, 4):
        row = transport_report(res, ["joins"])[0]
        if row.held and row.flags["distributive"]:
            assert row.preserved


def test_conservativity_agrees_with_the_criterion():
    seen = set()
    for seed in range(15):
        P = random_semilattice_doctrine(seed, max_objects=3, max_points=3)
        for X in P.objects():
            for phi in P.fiber(X).elements[:3]:
                out = conservativity_check(extend(P, X, phi))
                assert out["existential"] and out["agree"]
                assert (out["witness"] is None) == out["conservative"]
                seen.add(out["conservative"])
    assert seen == {True, False}


@pytest.mark.parametrize("seed", range(5))
def test_compose_constructions(seed):
    for res in some_extensions(100 + seed, 3):
        assert compose_constructions_check(res.P, res.X, res.phi, res)["equal"]


def test_distributive_law():
    P = random_semilattice_doctrine(0, max_objects=3, max_points=3)
    objs = list(P.objects())
    X, Y = objs[0], objs[-1]
    out = distributive_law_check(P, X, P.fiber(X).top, Y, P.fiber(Y).elements[0])
    assert out["coherence"] and out["invertible"] and out["composite_is_reader"]
    assert out["two_cell"] == "equality"


def test_model_factorization_sends_the_constant_to_c():
    P = random_semilattice_doctrine(0, max_objects=3, max_points=3)
    t = P.base.terminal()
    X = t
    phi = P.fiber(t).top
    res = extend(P, X, phi)
    G = identity_morphism(P)
    c = P.base.identity(t)
    fac = factorize_model(res, G, c)
    assert fac.constant_ok and fac.constant_strict
    assert fac.morphism.functor.arr(res.constant) == c


def test_constant_must_satisfy_the_axiom():
    P = random_semilattice_doctrine(0, max_objects=3, max_points=3)
    t = P.base.terminal()
    phi = P.fiber(t).bottom
    assert phi != P.fiber(t).top
    res = extend(P, t, phi)
    G = identity_morphism(P)
    c = P.base.identity(t)
    assert not constant_precondition(res, G, c)
    with pytest.raises(ConstantDoesNotSatisfyAxiom):
        factorize_model(res, G, c)


def test_round_trip_and_fullness():
    P = random_lattice_doctrine(3, max_objects=2)
    t = P.base.terminal()
    res = extend(P, t, P.fiber(t).top)
    stats = round_trip(res, P, budget=10)
    assert stats["models"] > 0
    models = []
    for G in enumerate_primary_morphisms(P, P, budget=4):
        c = P.base.identity(t)
        if constant_precondition(res, G, c):
            models.append((G, c))
    out = uniqueness_and_fullness_check(res, models)
    assert out["full"] and out["faithful"]


def test_fullness_needs_a_finite_target():
    P = powerset_doctrine()
    t = P.base.terminal()
    res = extend(P, t, P.fiber(t).top)
    G = identity_morphism(P)
    with pytest.raises(LazyBaseUnsupported):
        uniqueness_and_fullness_check(res, [(G, P.base.identity(t))])


def test_m3_fibers_are_not_distributive():
    P = injected_doctrine("M3", 1)
    assert any(set(P.fiber(a).elements) == set(m3().elements) for a in P.objects())
