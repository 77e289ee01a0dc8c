import itertools
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from doctrines.category import (
    FiniteCategory,
    Functor,
    NatTransf,
    enumerate_functors,
    semilattice_to_category,
    terminal_category,
    validate_category_with_products,
    validate_functor,
    validate_nat_transf,
)
from doctrines.errors import (
    AssociativityViolation,
    CompositionUndefined,
    FunctorLawViolation,
    MeetsRequired,
    NaturalitySquareViolation,
)
from doctrines.finset import TERMINAL, FinSet, Fn
from doctrines.models import random_semilattice
from doctrines.order import FinitePoset, chain, m3

import bruteforce as bf


def semilattices(seed, count=20):
    rng = random.Random(seed)
    return [random_semilattice(rng, rng.randint(1, 5)) for _ in range(count)]


def test_semilattice_categories_validate():
    for P in semilattices(1):
        C = semilattice_to_category(P)
        validate_category_with_products(C)
        for a in C.objects():
            for b in C.objects():
                assert C.prod(a, b) == bf.meet(P, a, b)


def test_non_semilattice_is_refused():
    V = FinitePoset.from_covers(("x", "y"), [], "V")
    with pytest.raises(MeetsRequired):
        semilattice_to_category(V)


def test_terminal_category():
    validate_category_with_products(terminal_category())


def test_monoid_tables():
    arrows = {"ia": ("a", "a"), "f": ("a", "a")}
    for ff in ("ia", "f"):
        C = FiniteCategory("m", ("a",), arrows, {("f", "f"): ff}, {"a": "ia"})
        validate_category_with_products(C, products=False)
    arrows = {"ia": ("a", "a"), "f": ("a", "a"), "g": ("a", "a")}
    comp = {("f", "f"): "g", ("f", "g"): "f", ("g", "f"): "g", ("g", "g"): "g"}
    C = FiniteCategory("skew", ("a",), arrows, comp, {"a": "ia"})
    with pytest.raises(AssociativityViolation):
        validate_category_with_products(C, products=False)


def test_mistyped_composite_raises():
    C = semilattice_to_category(chain(3))
    with pytest.raises(CompositionUndefined):
        C.compose("0<=1", "1<=2")


def monotone_maps(P, Q):
    for imgs in itertools.product(Q.elements, repeat=len(P.elements)):
        f = dict(zip(P.elements, imgs))
        if all(Q.leq(f[a], f[b]) for a in P.elements for b in P.elements if P.leq(a, b)):
            yield f


@pytest.mark.parametrize("seed", range(6))
def test_functor_enumeration_matches_monotone_maps(seed):
    rng = random.Random(seed)
    P = random_semilattice(rng, 3)
    Q = random_semilattice(rng, 3)
    C, D = semilattice_to_category(P), semilattice_to_category(Q)
    maps = list(monotone_maps(P, Q))
    assert len(enumerate_functors(C, D, products=False)) == len(maps)
    keep = [f for f in maps
            if f[bf.top(P)] == bf.top(Q)
            and all(f[bf.meet(P, a, b)] == bf.meet(Q, f[a], f[b])
                    for a in P.elements for b in P.elements)]
    assert len(enumerate_functors(C, D, products=True)) == len(keep)


def test_functor_law_violation():
    C = semilattice_to_category(chain(2))
    D = semilattice_to_category(m3())
    F = Functor(C, D, {"0": "0", "1": "1"}.get,
                lambda f: {"0<=0": "0<=0", "1<=1": "1<=1", "0<=1": "0<=a"}[f])
    with pytest.raises(FunctorLawViolation):
        validate_functor(F)


def test_natural_transformation_square():
    C = semilattice_to_category(chain(2))
    F = Functor.identity(C)
    low = Functor(C, C, lambda a: "0", lambda f: "0<=0")
    validate_nat_transf(NatTransf(low, F, lambda a: f"0<={a}"))
    with pytest.raises(NaturalitySquareViolation):
        bad = Functor(C, C, lambda a: "1", lambda f: "1<=1")
        validate_nat_transf(NatTransf(F, bad, lambda a: f"{a}<=1" if a == "0" else "0<=1"))


def test_finset_is_a_category_with_products():
    B = FinSet([(), (0,), (0, 1), (0, 1, 2)])
    validate_category_with_products(B)


@settings(max_examples=40, deadline=None)
@given(st.lists(st.integers(0, 2), min_size=0, max_size=3),
       st.lists(st.integers(0, 2), min_size=0, max_size=3),
       st.integers(0, 2 ** 16))
def test_finset_pairing_is_universal(xs, ys, seed):
    rng = random.Random(seed)
    a, b, c = (0, 1), tuple(range(len(xs) + 1)), tuple(range(len(ys) + 1))
    B = FinSet([a, b, c])
    f = Fn(a, b, (rng.choice(b) for _ in a))
    g = Fn(a, c, (rng.choice(c) for _ in a))
    u = B.pair(f, g)
    assert B.compose(B.pr1(b, c), u) == f
    assert B.compose(B.pr2(b, c), u) == g
    assert sum(1 for h in B.hom(a, B.prod(b, c))
               if B.compose(B.pr1(b, c), h) == f and B.compose(B.pr2(b, c), h) == g) == 1


def test_finset_unit_products_are_strict():
    B = FinSet([(0, 1)])
    a = (0, 1)
    assert B.prod(TERMINAL, a) == a and B.prod(a, TERMINAL) == a
    assert B.pr2(TERMINAL, a) == B.identity(a)
