import random

import pytest

from doctrines.category import Functor, semilattice_to_category
from doctrines.doctrine import (
    DoctrineMorphism,
    constant_doctrine,
    detect_structure,
    enumerate_fiber_maps,
    enumerate_primary_morphisms,
    identity_morphism,
    tabulated_doctrine,
    validate_doctrine,
    validate_morphism,
)
from doctrines.errors import NaturalityViolation, NotMonotone, ReindexCompositionViolation
from doctrines.models import (
    injected_doctrine,
    powerset_doctrine,
    random_lattice_doctrine,
    random_semilattice_doctrine,
)
from doctrines.order import PowersetPoset, chain

import bruteforce as bf


def two_object(seed):
    """Base 0 < 1 with random lattice fibers and a random primary reindexing."""
    rng = random.Random(seed)
    base = semilattice_to_category(chain(2))
    A, T = bf.random_lattice(rng, rng.randint(2, 5)), bf.random_lattice(rng, rng.randint(2, 5))
    f = rng.choice(enumerate_fiber_maps(T, A))
    return tabulated_doctrine(base, {"0": A, "1": T}, {"0<=1": f}, f"two{seed}")


def corpus():
    out = [two_object(s) for s in range(30)]
    out += [random_semilattice_doctrine(s, max_objects=3, max_points=3) for s in range(8)]
    out += [random_lattice_doctrine(s, max_objects=3) for s in range(8)]
    out += [injected_doctrine(k, s) for k in ("M3", "N5") for s in range(3)]
    return out


def fiberwise(P, test):
    return all(test(P.fiber(a)) for a in P.objects())


def preserves(P, op):
    B = P.base
    for f in P.arrows():
        m = P.reindex(f)
        S = P.fiber(B.cod(f))
        for x in S.elements:
            for y in S.elements:
                if m(op(S, x, y)) != op(m.target, m(x), m(y)):
                    return False
    return True


def bf_heyting(P):
    ok = fiberwise(P, lambda F: bf.is_lattice(F) and bf.is_distributive(F))
    bottoms = all(P.reindex(f)(bf.bottom(P.fiber(P.base.cod(f)))) == bf.bottom(P.fiber(P.base.dom(f)))
                  for f in P.arrows())
    return ok and bottoms and preserves(P, bf.implies) and preserves(P, bf.join)


def bf_existential(P):
    """Left adjoints to every weakening, Beck-Chevalley and Frobenius, by brute force."""
    B = P.base
    objs = list(P.objects())
    ex = {}
    for c in objs:
        for b in objs:
            w = P.reindex(B.pr1(c, b))
            left = bf.left_adjoint(w, w.source, w.target)
            if left is None:
                return False
            ex[c, b] = left
    for f in P.arrows():
        c, c2 = B.dom(f), B.cod(f)
        for b in objs:
            fid = P.reindex(B.times(f, B.identity(b)))
            pf = P.reindex(f)
            for x in P.fiber(B.prod(c2, b)).elements:
                if ex[c, b][fid(x)] != pf(ex[c2, b][x]):
                    return False
    for (c, b), e in ex.items():
        F, G = P.fiber(B.prod(c, b)), P.fiber(c)
        w = P.reindex(B.pr1(c, b))
        for x in F.elements:
            for y in G.elements:
                if e[bf.meet(F, x, w(y))] != bf.meet(G, e[x], y):
                    return False
    return True


def bf_universal(P):
    B = P.base
    objs = list(P.objects())
    un = {}
    for c in objs:
        for b in objs:
            w = P.reindex(B.pr1(c, b))
            right = bf.right_adjoint(w, w.source, w.target)
            if right is None:
                return False
            un[c, b] = right
    for f in P.arrows():
        c, c2 = B.dom(f), B.cod(f)
        for b in objs:
            fid = P.reindex(B.times(f, B.identity(b)))
            pf = P.reindex(f)
            for x in P.fiber(B.prod(c2, b)).elements:
                if un[c, b][fid(x)] != pf(un[c2, b][x]):
                    return False
    return True


def test_corpus_is_mixed():
    ex = [bf_existential(P) for P in corpus()]
    assert any(ex) and not all(ex)


def test_universal_detection_matches_bruteforce():
    for P in corpus():
        assert detect_structure(P, "universal").holds == bf_universal(P), P.name


def test_generated_doctrines_validate():
    for P in corpus():
        validate_doctrine(P)


def test_heyting_detection_matches_bruteforce():
    for P in corpus():
        assert detect_structure(P, "heyting").holds == bf_heyting(P), P.name


def test_existential_detection_matches_bruteforce():
    for P in corpus():
        assert detect_structure(P, "existential").holds == bf_existential(P), P.name


def test_boolean_doctrines_have_everything():
    P = random_semilattice_doctrine(5, max_objects=3, max_points=3)
    rep = detect_structure(P)
    for k in ("primary", "elementary", "existential", "universal", "heyting", "boolean",
              "star_autonomous", "pseudo_complements", "bounded", "joins", "implicational"):
        assert rep.holds(k), k


def test_powerset_doctrine_structure():
    P = powerset_doctrine()
    validate_doctrine(P)
    for k in ("primary", "elementary", "existential", "universal", "boolean"):
        assert P.structure(k).holds, k


def test_broken_reindexing_is_caught():
    base = semilattice_to_category(chain(3))
    H = chain(2)
    fibers = {a: H for a in base.objects()}
    tables = {"0<=1": {"0": "0", "1": "1"}, "1<=2": {"0": "0", "1": "1"},
              "0<=2": {"0": "0", "1": "0"}}
    with pytest.raises(ReindexCompositionViolation):
        validate_doctrine(tabulated_doctrine(base, fibers, tables))
    tables["0<=2"] = {"0": "1", "1": "0"}
    with pytest.raises((NotMonotone, ReindexCompositionViolation)):
        validate_doctrine(tabulated_doctrine(base, fibers, tables))


def test_fiber_map_enumeration_matches_bruteforce():
    import itertools

    rng = random.Random(4)
    for _ in range(10):
        S = bf.random_lattice(rng, rng.randint(2, 5))
        T = bf.random_lattice(rng, rng.randint(2, 5))
        want_mono, want_prim = 0, 0
        for imgs in itertools.product(T.elements, repeat=len(S.elements)):
            f = dict(zip(S.elements, imgs))
            if not all(T.leq(f[a], f[b]) for a in S.elements for b in S.elements if S.leq(a, b)):
                continue
            want_mono += 1
            if f[bf.top(S)] == bf.top(T) and all(
                    f[bf.meet(S, a, b)] == bf.meet(T, f[a], f[b])
                    for a in S.elements for b in S.elements):
                want_prim += 1
        assert len(enumerate_fiber_maps(S, T, preserve_meets=False)) == want_mono
        assert len(enumerate_fiber_maps(S, T)) == want_prim


def test_identity_morphism_and_enumeration():
    P = random_lattice_doctrine(2, max_objects=2)
    validate_morphism(identity_morphism(P))
    ms = enumerate_primary_morphisms(P, P, budget=50)
    assert ms
    for M in ms:
        validate_morphism(M)


def test_non_natural_family_is_rejected():
    base = semilattice_to_category(chain(2))
    P = constant_doctrine(base, PowersetPoset((0,)))
    # identity over 0 and constantly top over 1 clashes along 0<=1 at the empty set
    M = DoctrineMorphism(P, P, Functor.identity(base),
                         lambda a: (lambda x: x) if a == "0" else (lambda x: frozenset({0})))
    with pytest.raises(NaturalityViolation):
        validate_morphism(M, preserves=())
