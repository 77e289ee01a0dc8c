"""Built-in doctrines: powersets over finite sets, propositional Lindenbaum-Tarski
algebras, and seeded random doctrines over finite meet-semilattices."""

from __future__ import annotations

import ast
import itertools
import random
from dataclasses import dataclass, field

from .category import Functor, semilattice_to_category, terminal_category
from .checks import CheckLog
from .comonad import IndexedPosetComonad, KlArrow
from .doctrine import Doctrine, validate_doctrine
from .errors import AtomCapExceeded, DoctrineError, FixtureMismatch, IsoMismatch, ProbeTooLarge
from .finset import TERMINAL, FinSet, Fn
from .order import Downset, FinitePoset, MonotoneMap, PowersetPoset, m3, n5, oracle

DEFAULT_PROBES = ((), (0,), (0, 1), (0, 1, 2))


# ---------------------------------------------------------------------------
# powerset doctrine


UNIVERSE_CAP = 64


def powerset_doctrine(probes=DEFAULT_PROBES, cap=UNIVERSE_CAP, hom_cap=4096, name="Pow"):
    """Subsets and inverse images on a lazily probed category of finite sets.

    Fibers are lazy; only sets with more than `cap` points are refused outright.
    """
    B = FinSet(probes, hom_cap=hom_cap)

    def fiber(a):
        if len(a) > cap:
            raise ProbeTooLarge(f"a {len(a)}-element set exceeds the cap of {cap} points", a)
        return PowersetPoset(a, f"{name}({len(a)})")

    def reindex(f):
        return lambda s: frozenset(x for x in f.dom if f(x) in s)

    def delta(a):
        return frozenset(B.diagonal(a).images)

    def exists(c, b):
        pr = B.pr1(c, b)
        return MonotoneMap(fiber(B.prod(c, b)), fiber(c),
                           lambda s: frozenset(pr(p) for p in s), f"E_{len(c)},{len(b)}")

    def forall(c, b):
        pr = B.pr1(c, b)
        cb = B.prod(c, b)
        return MonotoneMap(fiber(cb), fiber(c),
                           lambda s: frozenset(x for x in c
                                               if all(p in s for p in cb if pr(p) == x)),
                           f"A_{len(c)},{len(b)}")

    P = Doctrine(B, fiber, reindex, name, {"delta": delta, "exists": exists, "forall": forall})
    return P


def subset(B, a, pred):
    return frozenset(x for x in a if pred(x))


@dataclass
class FixtureReport:
    checks: list = field(default_factory=list)

    def record(self, name, ok, detail=""):
        self.checks.append((name, ok, detail))
        if not ok:
            raise FixtureMismatch(f"{name}: {detail}", detail)

    @property
    def ok(self):
        return all(ok for _, ok, _ in self.checks)


def powerset_collapse(probes=DEFAULT_PROBES, report=None):
    from .reader import add_axiom, extend

    report = report or FixtureReport()
    P = powerset_doctrine(probes)
    for label, res in (("empty-constant", extend(P, (), None)),
                       ("empty-axiom", add_axiom(P, frozenset()))):
        for a in P.objects():
            F = res.doctrine.fiber(a)
            report.record(f"{label} fiber over {len(a)}-set is a singleton",
                          list(F.elements) == [frozenset()], f"{len(F.elements)} element(s)")
    return report


def powerset_xy(probes=DEFAULT_PROBES, X=(0, 1), Y=(0,), report=None):
    """P_X has fibers P(X x A) with f(S) = X x S; P_(X,Y) has fibers P(Y x A)."""
    from .reader import add_constant, extend

    report = report or FixtureReport()
    P = powerset_doctrine(probes)
    B = P.base
    Yset = frozenset(Y)
    rx = add_constant(P, X)
    rxy = extend(P, X, Yset)
    for a in P.objects():
        xa = B.prod(X, a)
        want = [frozenset(s) for s in PowersetPoset(xa).elements]
        report.record(f"P_X fiber over {len(a)}-set is P(X x A)",
                      set(rx.doctrine.fiber(a).elements) == set(want), "")
        fx = rx.morphism.at(a)
        ok = all(fx(s) == frozenset(p for p in xa if B.pr2(X, a)(p) in s)
                 for s in P.fiber(a).elements)
        report.record(f"P_X map on {len(a)}-set is S -> X x S", ok, "")
        yxa = frozenset(p for p in xa if B.pr1(X, a)(p) in Yset)
        F = rxy.doctrine.fiber(a)
        report.record(f"P_(X,Y) fiber over {len(a)}-set is P(Y x A)",
                      set(F.elements) == set(PowersetPoset(sorted(yxa, key=repr)).elements)
                      and F.top == yxa and len(F.elements) == 1 << (len(Y) * len(a)), "")
        fxy = rxy.morphism.at(a)
        ok = all(fxy(s) == frozenset(p for p in yxa if B.pr2(X, a)(p) in s)
                 for s in P.fiber(a).elements)
        report.record(f"P_(X,Y) map on {len(a)}-set is S -> Y x S", ok, "")
    # reindexing of S in P(Y x B) along g: A ~> B is {(x,a) | (x, g(x,a)) in S}
    C = rxy.category
    for g in C.probe_arrows():
        a, b = g.dom, g.cod
        m = rxy.doctrine.reindex(g)
        xa = B.prod(X, a)
        pair = B.pair(B.pr1(X, a), g.base)
        for s in m.source.elements:
            want = frozenset(p for p in xa if pair(p) in s)
            if m(s) != want:
                report.record("P_(X,Y) reindexing formula", False, repr((g, s)))
    report.record("P_(X,Y) reindexing is {(x,a) | (x, g(x,a)) in S}", True, "")
    return report


def powerset_factorization(probes=DEFAULT_PROBES, X=(0, 1), Y=(0,), report=None):
    """P -> P_Y factors through P_(X,Y) via the inclusion constant Y -> X."""
    from .reader import add_constant, extend, factorize_model

    report = report or FixtureReport()
    P = powerset_doctrine(probes)
    B = P.base
    rxy = extend(P, X, frozenset(Y), validate=False)
    ry = add_constant(P, Y, validate=False)
    inc = KlArrow(B.terminal(), X, Fn(Y, X, Y))
    fac = factorize_model(rxy, ry.morphism, inc, validate=False)
    report.record("factorization sends the new constant to the inclusion",
                  fac.morphism.functor.arr(rxy.constant) == inc, "")
    report.record("factorization composes back to P -> P_Y", fac.log.ok, "")
    return report


def powerset_examples(probes=DEFAULT_PROBES, X=(0, 1), Y=(0,)):
    report = FixtureReport()
    powerset_collapse(probes, report)
    powerset_xy(probes, X, Y, report)
    powerset_factorization(probes, X, Y, report)
    return report


# ---------------------------------------------------------------------------
# propositional Lindenbaum-Tarski doctrines

ATOM_CAP = 4


class Formula:
    """A propositional formula over named atoms: ~ & | >> (implication), 0/1 or True/False."""

    def __init__(self, text):
        self.text = text.strip()
        try:
            self.tree = ast.parse(self.text or "True", mode="eval").body
        except SyntaxError as e:
            raise DoctrineError(f"cannot parse formula {text!r}: {e.msg}", text) from None
        self.atoms = sorted({n.id for n in ast.walk(self.tree) if isinstance(n, ast.Name)})

    def __call__(self, v):
        return _eval(self.tree, v)

    def __repr__(self):
        return f"Formula({self.text!r})"


def _eval(t, v):
    if isinstance(t, ast.Name):
        return v[t.id]
    if isinstance(t, ast.Constant) and t.value in (0, 1, True, False):
        return bool(t.value)
    if isinstance(t, ast.UnaryOp) and isinstance(t.op, (ast.Invert, ast.Not)):
        return not _eval(t.operand, v)
    if isinstance(t, ast.BoolOp):
        vals = [_eval(x, v) for x in t.values]
        return all(vals) if isinstance(t.op, ast.And) else any(vals)
    if isinstance(t, ast.BinOp):
        x, y = _eval(t.left, v), _eval(t.right, v)
        if isinstance(t.op, ast.BitAnd):
            return x and y
        if isinstance(t.op, ast.BitOr):
            return x or y
        if isinstance(t.op, ast.RShift):
            return (not x) or y
        if isinstance(t.op, ast.BitXor):
            return x != y
    if isinstance(t, ast.Compare) and len(t.ops) == 1 and isinstance(t.ops[0], (ast.Eq, ast.NotEq)):
        x, y = _eval(t.left, v), _eval(t.comparators[0], v)
        return (x == y) if isinstance(t.ops[0], ast.Eq) else (x != y)
    raise DoctrineError(f"unsupported formula syntax: {ast.dump(t)}", None)


def _formula(f):
    return f if isinstance(f, Formula) else Formula(str(f))


def assignments(atoms):
    return [dict(zip(atoms, bits)) for bits in itertools.product((False, True), repeat=len(atoms))]


def _key(v, atoms):
    return "".join("1" if v[a] else "0" for a in atoms)


class LTDoctrine(Doctrine):
    """Over the terminal category; the fiber is P(models of T), i.e. formulas modulo T."""

    def __init__(self, atoms, axioms=(), cap=ATOM_CAP, name=None):
        atoms = list(atoms)
        if len(atoms) > cap:
            raise AtomCapExceeded(f"{len(atoms)} atoms exceed the cap {cap}", len(atoms))
        if len(set(atoms)) != len(atoms):
            raise DoctrineError("duplicate atom", atoms)
        self.atoms = atoms
        self.axioms = [_formula(a) for a in axioms]
        for f in self.axioms:
            self._check_atoms(f)
        self.models = tuple(_key(v, atoms) for v in assignments(atoms)
                            if all(f(v) for f in self.axioms))
        F = PowersetPoset(self.models, "LT")
        super().__init__(terminal_category(), lambda a: F, lambda f: (lambda x: x),
                         name or "LT")

    def _check_atoms(self, f):
        extra = set(f.atoms) - set(self.atoms)
        if extra:
            raise DoctrineError(f"unknown atoms {sorted(extra)}", sorted(extra))

    def denote(self, formula):
        f = _formula(formula)
        self._check_atoms(f)
        return frozenset(m for m in self.models
                         if f({a: c == "1" for a, c in zip(self.atoms, m)}))

    def formula_of(self, cls):
        """A disjunctive normal form naming the class."""
        if not cls:
            return "0"
        terms = []
        for m in sorted(cls):
            lits = [a if c == "1" else f"~{a}" for a, c in zip(self.atoms, m)]
            terms.append("(" + " & ".join(lits or ["1"]) + ")")
        return " | ".join(terms)


def propositional_lt(atoms, axioms=(), cap=ATOM_CAP):
    return LTDoctrine(atoms, axioms, cap)


def lt_add_axiom_iso(atoms, axioms, phi, cap=ATOM_CAP):
    """(LT_T)_phi against LT_(T + phi): alpha -> alpha one way, beta -> beta & phi back."""
    from .reader import add_axiom

    L = LTDoctrine(atoms, axioms, cap)
    res = add_axiom(L, L.denote(phi))
    L2 = LTDoctrine(atoms, list(axioms) + [phi], cap, "LT'")
    t = L.base.terminal()
    A, Bf = res.doctrine.fiber(t), L2.fiber(t)
    phi_t = L.denote(phi)
    # alpha in the downset is a set of T-models inside phi, i.e. a set of (T+phi)-models
    there = {a: L2.denote(L.formula_of(a)) for a in A.elements}
    back = {b: L.denote(f"({L2.formula_of(b)}) & ({_formula(phi).text})") & phi_t
            for b in Bf.elements}
    if len(A.elements) != len(Bf.elements):
        raise IsoMismatch("fiber sizes differ", (len(A.elements), len(Bf.elements)))
    for a in A.elements:
        if back[there[a]] != a:
            raise IsoMismatch("round trip fails on the extended side", a)
    for b in Bf.elements:
        if back[b] not in A or there[back[b]] != b:
            raise IsoMismatch("round trip fails on the theory side", b)
    for a in A.elements:
        for a2 in A.elements:
            if A.leq(a, a2) != Bf.leq(there[a], there[a2]):
                raise IsoMismatch("order not preserved and reflected", (a, a2))
    return {"size": len(A.elements), "there": there, "back": back, "iso": True,
            "extended": res, "direct": L2}


# ---------------------------------------------------------------------------
# random doctrines over finite meet-semilattices


def random_semilattice(rng, max_objects=4, universe=3):
    """A family of subsets closed under intersection, containing the full set."""
    full = frozenset(range(universe))
    for _ in range(100):
        n = rng.randint(0, max_objects - 1)
        fam = {full}
        for _ in range(n):
            fam.add(frozenset(x for x in full if rng.random() < 0.5))
        changed = True
        while changed:
            changed = False
            for a, b in list(itertools.combinations(fam, 2)):
                if a & b not in fam:
                    fam.add(a & b)
                    changed = True
        if len(fam) <= max_objects:
            break
    else:
        fam = {full}
    ordered = sorted(fam, key=lambda s: (-len(s), sorted(s)))
    names = {s: f"o{i}" for i, s in enumerate(ordered)}
    pairs = {(names[a], names[b]) for a in fam for b in fam if a <= b}
    return FinitePoset([names[s] for s in ordered], pairs, "base")


def random_semilattice_doctrine(seed, max_objects=4, max_points=4, name=None):
    """Boolean fibers P(a) = subsets of {u | h(u) <= a}; reindexing intersects."""
    rng = random.Random(seed)
    if max_objects <= 1:
        base_poset = FinitePoset(["o0"], {("o0", "o0")}, "base")
    else:
        base_poset = random_semilattice(rng, max_objects)
    objs = base_poset.elements
    npts = rng.randint(0, max_points)
    h = {u: rng.choice(objs) for u in range(npts)}
    B = semilattice_to_category(base_poset)
    fibers = {a: PowersetPoset([u for u in range(npts) if base_poset.leq(h[u], a)], f"P({a})")
              for a in objs}

    def reindex(f):
        s = fibers[B.dom(f)].uset
        return lambda x: x & s

    P = Doctrine(B, fibers.__getitem__, reindex, name or f"bool{seed}")
    P.seed = seed
    P.base_poset = base_poset
    return P


def closure_lattice(rng, universe=3, size=6):
    """A random lattice: an intersection-closed family of subsets containing the full set."""
    full = frozenset(range(universe))
    fam = {full, frozenset()}
    for _ in range(size):
        fam.add(frozenset(x for x in full if rng.random() < 0.5))
    changed = True
    while changed:
        changed = False
        for a, b in list(itertools.combinations(fam, 2)):
            if a & b not in fam:
                fam.add(a & b)
                changed = True
    ordered = sorted(fam, key=lambda s: (len(s), sorted(s)))
    names = {s: "".join(map(str, sorted(s))) or "e" for s in ordered}
    pairs = {(names[a], names[b]) for a in fam for b in fam if a <= b}
    return FinitePoset([names[s] for s in ordered], pairs, "L")


def lattice_doctrine(base_poset, L, e, name="lat"):
    """Fibers L below e(a) for a monotone e; reindexing is meet with e(dom)."""
    B = semilattice_to_category(base_poset)
    o = oracle(L)
    fibers = {a: Downset(L, e[a], f"{name}({a})") for a in base_poset.elements}

    def reindex(f):
        x = e[B.dom(f)]
        return lambda y: o.meet(y, x)

    P = Doctrine(B, fibers.__getitem__, reindex, name)
    P.base_poset = base_poset
    P.lattice = L
    return P


def _monotone_labels(rng, base_poset, L):
    """A random monotone map from the base to L, built top-down."""
    e = {}
    order = sorted(base_poset.elements, key=lambda a: -len([b for b in base_poset.elements
                                                           if base_poset.leq(a, b)]))
    for a in reversed(order):
        ups = [e[b] for b in e if base_poset.leq(a, b)]
        cands = [x for x in L.elements if all(L.leq(x, u) for u in ups)]
        e[a] = rng.choice(cands)
    return e


def random_lattice_doctrine(seed, max_objects=3, lattice=None, name=None):
    """Lattice-valued fibers; ``lattice`` may be m3(), n5() or None for a random one."""
    rng = random.Random(seed)
    base_poset = random_semilattice(rng, max_objects)
    L = lattice if lattice is not None else closure_lattice(rng)
    e = _monotone_labels(rng, base_poset, L)
    # keep the top object's fiber large so interesting elements exist
    top_obj = base_poset.elements[0]
    e[top_obj] = _lattice_top(L)
    e = _monotone_fix(base_poset, L, e)
    P = lattice_doctrine(base_poset, L, e, name or f"lat{seed}")
    P.seed = seed
    return P


def _lattice_top(L):
    return next(x for x in L.elements if all(L.leq(y, x) for y in L.elements))


def _monotone_fix(base_poset, L, e):
    """Lower labels where needed so that a <= b implies e(a) <= e(b)."""
    o = oracle(L)
    changed = True
    while changed:
        changed = False
        for a in base_poset.elements:
            for b in base_poset.elements:
                if base_poset.leq(a, b) and not L.leq(e[a], e[b]):
                    e[a] = o.meet(e[a], e[b])
                    changed = True
    return e


def injected_doctrine(lattice="M3", seed=0, max_objects=2):
    """A lattice doctrine whose top fiber is M3 or N5: joins exist, distributivity fails."""
    L = {"M3": m3, "N5": n5}[lattice]()
    rng = random.Random(seed)
    base_poset = random_semilattice(rng, max_objects)
    e = {a: _lattice_top(L) for a in base_poset.elements}
    return lattice_doctrine(base_poset, L, e, f"{lattice}{seed}")


# ---------------------------------------------------------------------------
# comonads for the generated suite


def interior_comonad(P, X, psi, name=None):
    """K = X x - with k_A(a) = P(eps_A)(a) & P(!_KA)(psi), psi in P(t)."""
    B = P.base
    K = Functor(B, B, lambda a: B.prod(X, a), lambda f: B.times(B.identity(X), f), f"{X}x-")

    def lift(a):
        ka = B.prod(X, a)
        F = P.fiber(ka)
        w = P.reindex(B.pr2(X, a))
        s = P.reindex(B.bang(ka))(psi)
        return MonotoneMap(P.fiber(a), F, lambda al: F.meet(w(al), s), f"k_{a}")

    return IndexedPosetComonad(P, K, lift,
                               lambda a: B.pair(B.pr1(X, a), B.identity(B.prod(X, a))),
                               lambda a: B.pr2(X, a), name or f"int({X},{psi!r})")


@dataclass
class SuiteInstance:
    seed: int
    doctrine: Doctrine
    X: object
    phi: object
    comonad: IndexedPosetComonad
    kind: str


def suite(n=200, seed=0, max_objects=4):
    """Deterministic mix of Boolean and lattice doctrines with reader, interior and
    identity comonads; every instance carries a chosen (X, phi)."""
    from .comonad import identity_comonad
    from .reader import build_reader_comonad

    rng = random.Random(seed)
    out = []
    for i in range(n):
        s = rng.randrange(1 << 30)
        if i % 3 == 2:
            P = random_lattice_doctrine(s, max_objects=min(3, max_objects))
        else:
            P = random_semilattice_doctrine(s, max_objects)
        r = random.Random(s)
        objs = list(P.objects())
        X = r.choice(objs)
        phi = r.choice(P.fiber(X).elements)
        t = P.base.terminal()
        which = i % 4
        if which == 3:
            psi = r.choice(P.fiber(t).elements)
            Cm, kind = interior_comonad(P, X, psi), "interior"
        elif which == 2 and i % 8 == 2:
            Cm, kind = identity_comonad(P), "identity"
        else:
            Cm, kind = build_reader_comonad(P, X, phi, validate=False), "reader"
        out.append(SuiteInstance(s, P, X, phi, Cm, kind))
    return out


def check_generated(P):
    log = CheckLog()
    log.extend(validate_doctrine(P))
    return log
