"""The acceptance gate: one test per criterion, summarised by conftest."""

import random
import subprocess
import sys
import time

import pytest

from doctrines.comonad import build_kleisli_doctrine, factorize_oplax, validate_oplax
from doctrines.doctrine import validate_doctrine
from doctrines.models import (
    injected_doctrine,
    powerset_doctrine,
    random_lattice_doctrine,
    random_semilattice_doctrine,
    suite,
)
from doctrines.reader import (
    compose_constructions_check,
    conservativity_check,
    extend,
    round_trip,
    transport_report,
)

import bruteforce as bf
from test_order import agree_with_bruteforce

SUITE = suite(200, seed=0, max_objects=4)


def criterion(n, title):
    return pytest.mark.criterion(n, title)


@criterion(1, "Kleisli engine soundness on 200 seeded comonads")
def test_kleisli_engine_soundness():
    assert len(SUITE) >= 200
    start = time.perf_counter()
    for inst in SUITE:
        P = inst.doctrine
        assert len(list(P.objects())) <= 4
        assert all(P.fiber(a).size() <= 16 for a in P.objects())
        b = build_kleisli_doctrine(inst.comonad)
        validate_doctrine(b.doctrine)
        validate_oplax(b.universal)
        N = factorize_oplax(b, b.universal).morphism
        for a in b.doctrine.objects():
            assert N.functor.obj(a) == a
            assert all(N.at(a)(x) == x for x in b.doctrine.fiber(a).elements)
        assert all(N.functor.arr(g) == g for g in b.category.arrows())
    elapsed = time.perf_counter() - start
    print(f"criterion 1: {len(SUITE)} comonads in {elapsed:.1f}s")
    assert elapsed <= 60


def fiber_law_holds(res, objects=None):
    P, B, X = res.P, res.P.base, res.X
    for a in objects or res.doctrine.objects():
        F = P.fiber(B.prod(X, a))
        bound = P.reindex(B.pr1(X, a))(res.phi)
        want = {x for x in F.elements if F.leq(x, bound)}
        D = res.doctrine.fiber(a)
        if set(D.elements) != want or D.top != bound:
            return False
    return True


@criterion(2, "extension fiber law on the suite and on powerset probes")
def test_extension_fiber_law():
    for inst in SUITE:
        assert fiber_law_holds(extend(inst.doctrine, inst.X, inst.phi))
    P = powerset_doctrine()
    n = 0
    for X in P.objects():
        for phi in P.fiber(X).elements:
            assert fiber_law_holds(extend(P, X, phi, validate=False))
            n += 1
    print(f"criterion 2: {len(SUITE)} suite instances, {n} powerset probes")


@criterion(3, "transport matrix: witnesses, detection and the joins row")
def test_transport_matrix():
    rows = 0
    for inst in SUITE:
        for row in transport_report(extend(inst.doctrine, inst.X, inst.phi)):
            if not row.held:
                continue
            rows += 1
            assert row.witness_ok and row.agree, (inst.seed, row.kind)
            if row.kind == "joins" and row.flags["distributive"]:
                assert row.preserved, inst.seed
    flips = 0
    for lat in ("M3", "N5"):
        for seed in range(4):
            P = injected_doctrine(lat, seed)
            for X in P.objects():
                for phi in P.fiber(X).elements:
                    row = transport_report(extend(P, X, phi), ["joins"])[0]
                    assert row.held and row.flags["distributive"] is False
                    flips += row.preserved is False
    assert flips > 0
    print(f"criterion 3: {rows} rows checked, {flips} joins flips after injection")


def triples(n):
    for i in range(n):
        P = (random_semilattice_doctrine(i, max_objects=3, max_points=3) if i % 2 == 0
             else random_lattice_doctrine(i, max_objects=2))
        rng = random.Random(i)
        X = rng.choice(list(P.objects()))
        phi = rng.choice(P.fiber(X).elements)
        res = extend(P, X, phi)
        yield res, (P if i % 3 else res.doctrine)


@criterion(4, "model factorization round trip with injected competitors")
def test_model_factorization_round_trip():
    totals = {}
    count = 0
    for res, R in triples(60):
        count += 1
        for k, v in round_trip(res, R, budget=10).items():
            totals[k] = totals.get(k, 0) + v
    assert count >= 50
    assert totals["models"] > 0 and totals["rejected_constant"] > 0
    assert totals["competitors"] > 0
    print(f"criterion 4: {count} triples, {totals}")


@criterion(5, "conservativity agrees with the existential criterion")
def test_conservativity():
    seen = {True: 0, False: 0}
    doctrines = 0
    for seed in range(60):
        P = (random_semilattice_doctrine(seed, max_objects=3, max_points=3) if seed % 2 == 0
             else random_lattice_doctrine(seed, max_objects=3))
        if not P.structure("existential").holds:
            continue
        doctrines += 1
        rng = random.Random(seed)
        for _ in range(3):
            X = rng.choice(list(P.objects()))
            phi = rng.choice(P.fiber(X).elements)
            out = conservativity_check(extend(P, X, phi))
            assert out["agree"], (seed, X, phi)
            if not out["conservative"]:
                a, u, v = out["witness"]
                F = P.fiber(a)
                f = extend(P, X, phi).morphism.at(a)
                assert f(u) == f(v) or f.target.leq(f(u), f(v))
                assert not F.leq(u, v)
            seen[out["conservative"]] += 1
    assert doctrines >= 50
    assert seen[True] and seen[False]
    print(f"criterion 5: {doctrines} doctrines, {seen}")


@criterion(6, "demos exit 0 within 10 seconds each")
@pytest.mark.parametrize("name", ["powerset-collapse", "powerset-XY", "lt-axiom",
                                  "distributive-law"])
def test_demos(name):
    start = time.perf_counter()
    r = subprocess.run([sys.executable, "-m", "doctrines", "demo", name],
                       capture_output=True, text=True)
    elapsed = time.perf_counter() - start
    assert r.returncode == 0, r.stdout + r.stderr
    assert elapsed <= 10
    print(f"criterion 6: {name} in {elapsed:.2f}s")


@criterion(7, "composing the constructions equals the one-step extension")
def test_compose_constructions():
    for inst in SUITE:
        assert compose_constructions_check(inst.doctrine, inst.X, inst.phi)["equal"]


@criterion(8, "order oracles agree with brute force on posets up to 16 elements")
def test_order_oracles():
    n = 0
    for size in range(1, 6):
        for P in bf.all_posets(size):
            agree_with_bruteforce(P)
            n += 1
    for P in bf.seeded_posets(150, lo=6, hi=16, seed=2024):
        agree_with_bruteforce(P)
        n += 1
    rng = random.Random(99)
    lattices = 0
    while lattices < 60:
        L = bf.random_lattice(rng, rng.randint(3, 10))
        if L.size() <= 16:
            agree_with_bruteforce(L)
            lattices += 1
    print(f"criterion 8: {n} posets and {lattices} lattices")
