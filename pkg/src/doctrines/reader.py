"""Adding a constant of sort X and an axiom phi to a doctrine.

The reader comonad X x - with k_A(a) = P(pr1)(phi) & P(pr2)(a) is fed to the
generic Kleisli engine. Fibers of the result are the principal downsets
P(X x A) below P(pr1)(phi); reindexing along g: A ~> B is P(<pr1, g>).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

from .category import Functor, composable_pairs, product_comparison
from .checks import CheckLog
from .comonad import (
    IndexedPosetComonad,
    KleisliCategory,
    KleisliDoctrine,
    KlArrow,
    OplaxMorphism,
    build_kleisli_doctrine,
    factorization_of,
    factorize_oplax,
    validate_comonad,
)
from .doctrine import (
    KINDS,
    DoctrineMorphism,
    _check_preservation,
    detect_structure,
    elementary_clauses_failure,
    is_two_cell,
    morphism_mismatch,
    quantifier,
    quantifier_clauses_failure,
    star_negation_at,
    validate_morphism,
)
from .errors import (
    CoherenceViolation,
    ConstantDoesNotSatisfyAxiom,
    DecompositionMismatch,
    DoctrineError,
    EnumerationBudgetExceeded,
    FullnessCounterexample,
    InternalInvariantViolation,
    PreservationViolation,
    PrimaryRequired,
    ProbeTooLarge,
    ProductsNotPreserved,
    TransportWitnessFailure,
    UniquenessCounterexample,
)
from .order import Downset, MonotoneMap, check_star_negation, downset_and_quotient, lattice_ops, oracle, sweep


def _require_primary(P):
    r = P.structure("primary")
    if not r.holds:
        raise PrimaryRequired(f"{P.name} is not primary: {r.reason}", r.witness)


def build_reader_comonad(P, X, phi=None, validate=True):
    """X x - with lift P(pr1)(phi) & P(pr2)(-), or plain P(pr2) when phi is None."""
    B = P.base
    if phi is not None:
        _require_primary(P)
        if phi not in P.fiber(X):
            raise DoctrineError(f"{phi!r} is not an element of {P.name}({X!r})", phi)
    K = Functor(B, B, lambda a: B.prod(X, a), lambda f: B.times(B.identity(X), f),
                f"{_label(X)}x-")

    def lift(a):
        weaken = P.reindex(B.pr2(X, a))
        if phi is None:
            return weaken
        F = P.fiber(B.prod(X, a))
        x = P.reindex(B.pr1(X, a))(phi)
        return MonotoneMap(P.fiber(a), F, lambda al: F.meet(x, weaken(al)), f"f_{a}")

    Cm = IndexedPosetComonad(
        P, K, lift,
        lambda a: B.pair(B.pr1(X, a), B.identity(B.prod(X, a))),
        lambda a: B.pr2(X, a),
        f"({_label(X)},{_label(phi)})" if phi is not None else _label(X))
    if validate:
        validate_comonad(Cm)
    return Cm


def _label(x):
    from .finset import set_label

    if isinstance(x, tuple):
        return set_label(x)
    if isinstance(x, frozenset):
        return "{" + ",".join(sorted(map(str, x))) + "}"
    return str(x)


class ReaderCategory(KleisliCategory):
    """C_X: arrows A ~> B are base arrows X x A -> B; products are those of C."""

    has_products = True

    def __init__(self, Cm, X, name=None):
        super().__init__(Cm, name or f"{Cm.base.name}_{_label(X)}")
        self.X = X

    def terminal(self):
        return self.B.terminal()

    def bang(self, a):
        return KlArrow(a, self.B.terminal(), self.B.bang(self.B.prod(self.X, a)))

    def product(self, a, b):
        from .category import Product

        p = self.B.product(a, b)
        return Product(p.obj, self.lift(p.pr1), self.lift(p.pr2))

    def pair(self, f, g):
        return KlArrow(f.dom, self.B.prod(f.cod, g.cod), self.B.pair(f.base, g.base))

    def inverse(self, f):
        B, X = self.B, self.X
        u = B.pair(B.pr1(X, f.dom), f.base)
        ui = B.inverse(u)
        if ui is None:
            return None
        g = KlArrow(f.cod, f.dom, B.compose(B.pr2(X, f.dom), ui))
        if self.compose(g, f) != self.identity(f.dom) or self.compose(f, g) != self.identity(f.cod):
            return None
        return g


class ReaderDoctrine(KleisliDoctrine):
    def __init__(self, Cm, category, X, phi, name=None):
        self.X = X
        self.phi = phi
        super().__init__(Cm, category, name)

    def top(self, a):
        P, B = self.Cm.doctrine, self.Cm.base
        if self.phi is None:
            return P.fiber(B.prod(self.X, a)).top
        return P.reindex(B.pr1(self.X, a))(self.phi)

    def _make_fiber(self, a):
        P, B = self.Cm.doctrine, self.Cm.base
        F = P.fiber(B.prod(self.X, a))
        if self.phi is None:
            return F
        return Downset(F, self.top(a), f"{self.name}({_label(a)})")


@dataclass
class ExtensionResult:
    P: object
    X: object
    phi: object
    comonad: IndexedPosetComonad
    bundle: object
    category: ReaderCategory
    doctrine: ReaderDoctrine
    morphism: DoctrineMorphism
    constant: KlArrow
    log: CheckLog = field(default_factory=CheckLog)

    def quotient(self, a):
        """The alternative presentation P(X x A)/~ of the fiber over A."""
        B = self.P.base
        return downset_and_quotient(self.P.fiber(B.prod(self.X, a)), self.doctrine.top(a))

    @property
    def report(self):
        return self.doctrine.structure_report()


def extend(P, X, phi=None, validate=True, name=None):
    """P_(X, phi): add a constant of sort X and the axiom phi (phi None: no axiom)."""
    B = P.base
    Cm = build_reader_comonad(P, X, phi, validate=validate)
    cat = ReaderCategory(Cm, X)
    label = f"{P.name}_{Cm.name}" if name is None else name
    D = ReaderDoctrine(Cm, cat, X, phi, label)
    D.structure_report = lambda: detect_structure(D)
    bundle = build_kleisli_doctrine(Cm, validate=validate, category=cat, doctrine=D)
    M = bundle.universal.morphism
    M.name = "f"
    constant = KlArrow(B.terminal(), X, B.pr1(X, B.terminal()))
    res = ExtensionResult(P, X, phi, Cm, bundle, cat, D, M, constant, bundle.log)
    if validate:
        primary = P.structure("primary").holds
        res.log.extend(validate_morphism(M, preserves=("primary",) if primary else ()))
    return res


def add_constant(P, X, validate=True):
    return extend(P, X, None, validate)


def add_axiom(P, phi, validate=True):
    return extend(P, P.base.terminal(), phi, validate)


def interpret_new_constant(res):
    """P_(X,phi)(const) f_X(phi): the axiom read at the new constant is the new top."""
    P, B, X = res.P, res.P.base, res.X
    phi = res.phi if res.phi is not None else P.fiber(X).top
    val = res.doctrine.reindex(res.constant)(res.morphism.at(X)(phi))
    top = res.doctrine.fiber(B.terminal()).top
    if val != top:
        raise InternalInvariantViolation("the axiom does not hold at the new constant", (val, top))
    return val, True


# ---------------------------------------------------------------------------
# transport of structure


@dataclass
class TransportRow:
    kind: str
    held: bool
    witness_ok: bool = False
    detected: bool = False
    agree: bool = False
    preserved: object = None
    flags: dict = field(default_factory=dict)
    note: str = ""


def _witness_failure(kind, where):
    raise TransportWitnessFailure(f"{kind} witness fails at {where!r}", where)


def _reassoc(B, X, c, b):
    """(X x C) x B -> X x (C x B)."""
    objs = {"x": X, "c": c, "b": b}
    return B.reshape((("x", "c"), "b"), ("x", ("c", "b")), objs)


def witness_quantifier(res, side, c, b):
    """The restriction of the quantifier of P on X x C, read through reassociation."""
    P, B, X, D = res.P, res.P.base, res.X, res.doctrine
    q = quantifier(P, side, B.prod(X, c), b)
    back = P.reindex(_reassoc(B, X, c, b))
    S, T = D.fiber(res.category.prod(c, b)), D.fiber(c)
    if side == "left":
        fn = lambda beta: q(back(beta))
    else:
        top = D.top(c)
        fn = lambda beta: P.fiber(B.prod(X, c)).meet(q(back(beta)), top)
    return MonotoneMap(S, T, fn, f"{'E' if side == 'left' else 'A'}_{c},{b}")


def _fiberwise_witness(res, kind, a):
    """Operations on the fiber over a built from those of P(X x a) and the new top."""
    D = res.doctrine
    parent = D.fiber(a).parent if isinstance(D.fiber(a), Downset) else D.fiber(a)
    x = D.top(a)
    ops = {}
    if kind in ("implicational", "heyting", "boolean"):
        ops["implies"] = lambda u, v: parent.meet(parent.implies(u, v), x)
    if kind in ("bounded", "joins", "heyting", "boolean", "pseudo_complements"):
        ops["bottom"] = parent.bottom
    if kind in ("joins", "heyting", "boolean"):
        ops["join"] = parent.join
    if kind in ("boolean", "pseudo_complements", "star_autonomous"):
        if kind == "star_autonomous":
            neg = star_negation_at(res.P, res.P.base.prod(res.X, a))
            if neg is None:
                _witness_failure(kind, ("no negation on P(X x a)", a))
            ops["neg"] = lambda u: parent.meet(neg[u], x)
        else:
            ops["neg"] = lambda u: parent.meet(parent.neg(u), x)
    return ops


def _check_fiberwise(res, kind, a, ops):
    D = res.doctrine
    F = D.fiber(a)
    o = oracle(F)
    els = F.elements
    if "bottom" in ops and ops["bottom"] != o.bottom:
        return ("bottom", a)
    for u in els:
        for v in els:
            if "implies" in ops and ops["implies"](u, v) != o.implies(u, v):
                return ("implies", a, u, v)
            if "join" in ops and ops["join"](u, v) != o.join(u, v):
                return ("join", a, u, v)
    if "neg" in ops:
        neg = {u: ops["neg"](u) for u in els}
        if kind == "boolean":
            for u in els:
                if neg[neg[u]] != u:
                    return ("involution", a, u)
                if o.meet(u, neg[u]) != o.bottom or o.join(u, neg[u]) != o.top:
                    return ("complement", a, u)
        elif kind == "pseudo_complements":
            for u in els:
                if neg[u] != o.neg(u):
                    return ("pseudo-complement", a, u)
        else:
            meet = {(u, v): o.meet(u, v) for u in els for v in els}
            if check_star_negation(F, neg, meet) is not None:
                return ("star", a)
    return None


def _rows_fiberwise(res, kind, row, M):
    D = res.doctrine
    for a in D.objects():
        if not D.fiber(a).searchable:
            row.note = "some fibers skipped (too large)"
            continue
        bad = _check_fiberwise(res, kind, a, _fiberwise_witness(res, kind, a))
        if bad is not None:
            _witness_failure(kind, bad)
    row.witness_ok = True
    det = D.structure(kind)
    row.detected = det.holds
    row.agree = det.holds


def _row_preservation(res, kind, row):
    M = res.morphism
    try:
        _check_preservation(M, kind)
        row.preserved = True
    except PreservationViolation as e:
        row.preserved = False
        row.flags["preservation_witness"] = e.witness


def _distributive(P, objs):
    for a in objs:
        F = P.fiber(a)
        if F.searchable and not lattice_ops(F).has("distributive"):
            return False
    return True


def transport_report(res, kinds=None):
    """For each kind P has: build the explicit witness in P_(X,phi), verify its
    clauses, let detection confirm it independently, and check preservation."""
    P, B, X, D, C_X = res.P, res.P.base, res.X, res.doctrine, res.category
    M = res.morphism
    rows = []
    for kind in kinds or KINDS:
        try:
            held = P.structure(kind).holds
        except DoctrineError:
            held = False
        row = TransportRow(kind, held)
        rows.append(row)
        if not held:
            continue
        if kind == "primary":
            for a in D.objects():
                F = D.fiber(a)
                if not F.searchable:
                    continue
                o = oracle(F)
                if o.top != D.top(a):
                    _witness_failure(kind, ("top", a))
                for u in F.elements:
                    for v in F.elements:
                        if F.meet(u, v) != o.meet(u, v):
                            _witness_failure(kind, ("meet", a, u, v))
            row.witness_ok = True
            row.detected = row.agree = D.structure(kind).holds
            _row_preservation(res, kind, row)
        elif kind == "elementary":
            dP = P.structure(kind).witness["delta"]
            objs = list(D.objects())
            closure = set(objs) | {B.prod(a, b) for a in objs for b in objs}
            delta = {}
            for a in closure:
                if a in dP:
                    try:
                        delta[a] = M.at(B.prod(a, a))(dP[a])
                    except ProbeTooLarge:
                        row.note = "some diagonals skipped (fiber beyond the probe cap)"
            bad = elementary_clauses_failure(D, delta, objs)
            if bad is not None:
                _witness_failure(kind, bad)
            row.witness_ok = True
            det = D.structure(kind)
            row.detected = det.holds
            row.agree = det.holds and all(
                det.witness["delta"].get(a, delta[a]) == delta[a] for a in delta
                if det.witness["unique"].get(a))
            _row_preservation(res, kind, row)
        elif kind in ("existential", "universal"):
            side = "left" if kind == "existential" else "right"
            quant = {}
            for b in D.objects():
                for c in D.objects():
                    S = D.fiber(C_X.prod(c, b))
                    if S.searchable and D.fiber(c).searchable:
                        quant[c, b] = witness_quantifier(res, side, c, b)
            bad, frob = quantifier_clauses_failure(D, side, quant)
            if bad is not None:
                _witness_failure(kind, bad)
            row.witness_ok = True
            det = D.structure(kind)
            row.detected = det.holds
            row.agree = det.holds and all(
                det.witness["quantifier"][key](x) == q(x)
                for key, q in quant.items() if key in det.witness["quantifier"]
                for x in q.source.elements)
            if side == "right":
                row.flags["frobenius_source"] = P.structure(kind).flags.get("frobenius")
                row.flags["frobenius_target"] = frob
                if row.flags["frobenius_source"] and not frob:
                    _witness_failure("frobenius-forall", "lost in transport")
            _row_preservation(res, kind, row)
        elif kind in ("implicational", "bounded", "joins", "heyting", "boolean",
                      "pseudo_complements", "star_autonomous"):
            _rows_fiberwise(res, kind, row, M)
            _row_preservation(res, kind, row)
            if kind == "joins":
                objs = list(P.objects()) + [B.prod(X, a) for a in P.objects()]
                dist = _distributive(P, objs)
                row.flags["distributive"] = dist
                if dist and not row.preserved:
                    _witness_failure(kind, "joins lost although all fibers are distributive")
        elif kind == "weak_power_objects":
            _row_weak_power(res, row)
        rows_ok = row.witness_ok and row.agree
        row.flags.setdefault("ok", rows_ok)
    return rows


def _row_weak_power(res, row):
    """(Omega(A), f_{A x Omega}(in_A)) with {psi} found from the representer of P."""
    P, B, X, D, C_X = res.P, res.P.base, res.X, res.doctrine, res.category
    power = P.structure("weak_power_objects").witness["power"]
    for a in D.objects():
        om, mem = power[a]
        mem2 = res.morphism.at(B.prod(a, om))(mem)
        for b in D.objects():
            S = D.fiber(C_X.prod(a, b))
            if not S.enumerable:
                continue
            names = {"a": a, "x": X, "b": b}
            swap = B.reshape(("a", ("x", "b")), ("x", ("a", "b")), names)
            xb = B.prod(X, b)
            try:
                homs = B.hom(xb, om)
            except ProbeTooLarge:
                row.note = "representer search skipped (hom-set too large)"
                continue
            for psi in S.elements:
                target = P.reindex(swap)(psi)
                u = next((u for u in homs
                          if P.reindex(B.times(B.identity(a), u))(mem) == target), None)
                if u is None:
                    _witness_failure("weak_power_objects", ("no representer", a, b, psi))
                ku = KlArrow(b, om, u)
                got = D.reindex(C_X.times(C_X.identity(a), ku))(mem2)
                if got != psi:
                    _witness_failure("weak_power_objects", ("representation", a, b, psi))
    row.witness_ok = True
    det = D.structure("weak_power_objects")
    row.detected = row.agree = det.holds
    row.preserved = None
    row.note = row.note or "no preservation claim"


# ---------------------------------------------------------------------------
# universal property


@dataclass
class ModelFactorization:
    morphism: DoctrineMorphism
    j: object
    oplax: OplaxMorphism
    constant_ok: bool
    constant_strict: bool
    log: CheckLog
    preserved: dict = field(default_factory=dict)


def constant_precondition(res, G, c):
    R, D = G.target, G.target.base
    X = res.X
    phi = res.phi if res.phi is not None else res.P.fiber(X).top
    T = R.fiber(D.dom(c))
    return T.leq(T.top, R.reindex(c)(G.at(X)(phi)))


def model_j(res, G, c):
    R, D = G.target, G.target.base
    X = res.X
    inv_cache = {}

    def j(a):
        if a not in inv_cache:
            comp = product_comparison(G.functor, X, a)
            inv = D.inverse(comp)
            if inv is None:
                raise ProductsNotPreserved(f"{G.name} does not preserve {X!r} x {a!r}", a)
            ga = G.functor.obj(a)
            inv_cache[a] = D.compose(inv, D.pair(D.compose(c, D.bang(ga)), D.identity(ga)))
        return inv_cache[a]

    return j


def factorize_model(res, G, c, check_preservation=False, validate=True):
    """Factor a primary morphism G: P -> R with a constant c: t -> GX satisfying the
    axiom through P_(X,phi): G' (g) = G(g) . j_A and g'_A = R(j_A) . g_{X x A}."""
    if validate:
        validate_morphism(G, preserves=("primary",))
    if not constant_precondition(res, G, c):
        raise ConstantDoesNotSatisfyAxiom("the axiom is not true at the chosen constant", c)
    j = model_j(res, G, c)
    M = OplaxMorphism(res.comonad, G, j, G.name)
    fac = factorize_oplax(res.bundle, M, validate=validate)
    N = fac.morphism
    D = G.target.base
    t = res.P.base.terminal()
    got = N.functor.arr(res.constant)
    expected = D.compose(c, D.bang(G.functor.obj(t)))
    strict = G.functor.obj(t) == D.terminal() and got == c
    if got != expected:
        from .errors import CompositeMismatch

        raise CompositeMismatch("the factorization does not send the constant to c", (got, c))
    log = fac.log
    if validate:
        log.extend(validate_morphism(N, preserves=("primary",)))
    out = ModelFactorization(N, j, M, True, strict, log)
    if check_preservation:
        for kind in ("elementary", "existential", "universal", "implicational", "bounded",
                     "joins", "heyting", "boolean"):
            try:
                if not (res.doctrine.structure(kind).holds and G.target.structure(kind).holds):
                    continue
                _check_preservation(G, kind)
            except DoctrineError:
                continue
            try:
                _check_preservation(N, kind)
                out.preserved[kind] = True
            except PreservationViolation:
                out.preserved[kind] = False
    return out


def check_model_competitor(res, fac, G, c, competitor):
    """Accept a competitor only if it equals the factorization; say why otherwise.

    A valid primary morphism with the same composite and constant that still
    differs would contradict uniqueness and raises UniquenessCounterexample.
    """
    from .comonad import composite_mismatch

    U = res.bundle.universal
    if competitor.functor.arr(res.constant) != fac.morphism.functor.arr(res.constant):
        return "rejected: the constant is not sent to c"
    try:
        validate_morphism(competitor, preserves=("primary",))
    except DoctrineError as e:
        return f"rejected: not a primary morphism ({type(e).__name__})"
    # the competitor determines its own j as the images of id_(X x A)
    jbar = lambda a: competitor.functor.arr(U.j(a))
    bad = composite_mismatch(res.bundle, OplaxMorphism(res.comonad, G, jbar), competitor)
    if bad is not None:
        return f"rejected: composite differs at {bad!r}"
    for a in res.P.objects():
        if jbar(a) != fac.j(a):
            raise UniquenessCounterexample("reconstructed j differs", a)
    diff = morphism_mismatch(competitor, fac.morphism)
    if diff is not None:
        raise UniquenessCounterexample("a second factorization exists", diff)
    return "equal"


def _component_families(res, G, H, budget):
    D = G.target.base
    objs = list(res.P.objects())
    choices = [D.hom(G.functor.obj(a), H.functor.obj(a)) for a in objs]
    total = 1
    for ch in choices:
        total *= len(ch)
    if total > budget:
        raise EnumerationBudgetExceeded(f"{total} candidate 2-cells exceed {budget}", total)
    for comps in itertools.product(*choices):
        yield dict(zip(objs, comps))


def uniqueness_and_fullness_check(res, models, competitors=(), budget=100_000):
    """models: list of (G, c) with G: P -> R primary and c a constant satisfying the axiom.

    Arrows (G, c) -> (H, d) are 2-cells theta with theta_X . c = d; each must be a
    2-cell between the factorizations, and both hom-sets must have the same size.
    """
    if models and models[0][0].target.base.lazy:
        from .errors import LazyBaseUnsupported

        raise LazyBaseUnsupported("fullness enumeration needs a finite target base")
    facs = [factorize_model(res, G, c) for G, c in models]
    X = res.X
    counts = []
    for (G, c), fg in zip(models, facs):
        for (H, d), fh in zip(models, facs):
            D = G.target.base
            left = right = 0
            for theta in _component_families(res, G, H, budget):
                a_ok = is_two_cell(theta.__getitem__, G, H) and D.compose(theta[X], c) == d
                b_ok = is_two_cell(theta.__getitem__, fg.morphism, fh.morphism)
                left += a_ok
                right += b_ok
                if a_ok and not b_ok:
                    raise FullnessCounterexample("a 2-cell of models does not lift", theta)
                if b_ok and not (is_two_cell(theta.__getitem__, G, H)):
                    raise FullnessCounterexample("a lifted 2-cell does not restrict", theta)
            counts.append((left, right))
    verdicts = []
    for (G, c), fac, comp in competitors:
        verdicts.append(check_model_competitor(res, fac, G, c, comp))
    return {"faithful": True, "hom_counts": counts,
            "full": all(l == r for l, r in counts),
            "competitors": verdicts, "mode": "strict"}


# ---------------------------------------------------------------------------
# conservativity and decomposition


def conservativity_check(res):
    P, B, X = res.P, res.P.base, res.X
    phi = res.phi if res.phi is not None else P.fiber(X).top
    witness = None
    for a in P.objects():
        F = P.fiber(a)
        if not F.enumerable:
            continue
        f = res.morphism.at(a)
        T = res.doctrine.fiber(a)
        pts = sweep(F)
        for u in pts:
            for v in pts:
                if T.leq(f(u), f(v)) and not F.leq(u, v):
                    witness = (a, u, v)
                    break
            if witness:
                break
        if witness:
            break
    existential = False
    criterion = None
    try:
        existential = P.structure("existential").holds
    except DoctrineError:
        pass
    if existential:
        t = B.terminal()
        q = quantifier(P, "left", t, X)
        Ft = P.fiber(t)
        criterion = Ft.leq(Ft.top, q(P.reindex(B.pr2(t, X))(phi)))
    conservative = witness is None
    return {"conservative": conservative, "criterion": criterion, "existential": existential,
            "agree": None if criterion is None else criterion == conservative,
            "witness": witness}


def _flatten(u):
    """An arrow of (C_X)_t, read as an arrow of C_X."""
    return KlArrow(u.dom, u.cod, u.base.base)


def compose_constructions_check(P, X, phi, res=None):
    """P_X followed by adding phi (read in P_X(t)) equals P_(X,phi) on the nose."""
    B = P.base
    res = res or extend(P, X, phi)
    first = add_constant(P, X)
    PX = first.doctrine
    t = B.terminal()
    phi2 = P.reindex(B.pr1(X, t))(phi) if phi is not None else None
    second = extend(PX, first.category.terminal(), phi2)
    C2, C1 = second.category, res.category
    n = 0
    if list(C2.objects()) != list(C1.objects()):
        raise DecompositionMismatch("objects differ", None)
    for u in C2.probe_arrows():
        v = _flatten(u)
        n += 1
        if (v.dom, v.cod) != (u.dom, u.cod):
            raise DecompositionMismatch("arrow types differ", u)
    for f, g in composable_pairs(C2):
        if _flatten(C2.compose(g, f)) != C1.compose(_flatten(g), _flatten(f)):
            raise DecompositionMismatch("composition differs", (g, f))
    if not C1.lazy:
        for a in C1.objects():
            for b in C1.objects():
                if sorted(map(repr, (_flatten(u) for u in C2.hom(a, b)))) != sorted(
                        map(repr, C1.hom(a, b))):
                    raise DecompositionMismatch("hom-sets differ", (a, b))
    D2, D1 = second.doctrine, res.doctrine
    for a in D1.objects():
        F1, F2 = D1.fiber(a), D2.fiber(a)
        if not F1.enumerable:
            continue
        if set(F1.elements) != set(F2.elements) or F1.top != F2.top:
            raise DecompositionMismatch("fibers differ", a)
    for u in C2.probe_arrows():
        m2, m1 = D2.reindex(u), D1.reindex(_flatten(u))
        if not m2.source.enumerable:
            continue
        for x in m2.source.elements:
            if m2(x) != m1(x):
                raise DecompositionMismatch("reindexing differs", (u, x))
    comp = first.morphism.then(second.morphism)
    for h in B.probe_arrows():
        if _flatten(comp.functor.arr(h)) != res.morphism.functor.arr(h):
            raise DecompositionMismatch("composite functor differs", h)
    for a in P.objects():
        F = P.fiber(a)
        if not F.enumerable:
            continue
        for x in F.elements:
            if comp.at(a)(x) != res.morphism.at(a)(x):
                raise DecompositionMismatch("composite fiber map differs", (a, x))
    return {"arrows": n, "equal": True}


# ---------------------------------------------------------------------------
# distributive law between two reader comonads


def distributive_law_check(P, X, phi, Y, psi):
    """l_A: X x (Y x A) -> Y x (X x A) swapping the two parameters."""
    B = P.base
    Kc = build_reader_comonad(P, X, phi)
    Cc = build_reader_comonad(P, Y, psi)
    K, C = Kc.K, Cc.K
    log = CheckLog()

    def ell(a):
        names = {"x": X, "y": Y, "a": a}
        return B.reshape(("x", ("y", "a")), ("y", ("x", "a")), names)

    def fail(msg, w):
        raise CoherenceViolation(msg, w)

    for h in B.probe_arrows():
        a, b = B.dom(h), B.cod(h)
        if B.compose(C.arr(K.arr(h)), ell(a)) != B.compose(ell(b), K.arr(C.arr(h))):
            fail("the swap is not natural", h)
    for a in B.objects():
        l = ell(a)
        if B.compose(Cc.eps(K.obj(a)), l) != K.arr(Cc.eps(a)):
            fail("counit triangle for the second comonad fails", a)
        if B.compose(C.arr(Kc.eps(a)), l) != Kc.eps(C.obj(a)):
            fail("counit triangle for the first comonad fails", a)
        if B.compose(Cc.gamma(K.obj(a)), l) != B.comp(C.arr(l), ell(C.obj(a)), K.arr(Cc.gamma(a))):
            fail("comultiplication square for the second comonad fails", a)
        if B.compose(C.arr(Kc.gamma(a)), l) != B.comp(ell(K.obj(a)), K.arr(l), Kc.gamma(C.obj(a))):
            fail("comultiplication square for the first comonad fails", a)
        if B.inverse(l) is None:
            fail("the swap is not invertible", a)
        # projections pin the swap down: pr1 l = pr1 pr2 and pr2 l = id x pr2
        rebuilt = B.pair(B.compose(B.pr1(Y, a), B.pr2(X, C.obj(a))),
                         B.times(B.identity(X), B.pr2(Y, a)))
        if rebuilt != l:
            fail("the swap is not the one forced by the counit triangles", a)
    log.record("coherence", True)
    brute = []
    for a in B.objects():
        try:
            homs = B.hom(K.obj(C.obj(a)), C.obj(K.obj(a)))
        except ProbeTooLarge:
            continue
        if len(homs) > 50_000:
            continue
        sols = [u for u in homs
                if B.compose(Cc.eps(K.obj(a)), u) == K.arr(Cc.eps(a))
                and B.compose(C.arr(Kc.eps(a)), u) == Kc.eps(C.obj(a))]
        brute.append(len(sols))
        if sols != [ell(a)]:
            fail("triangle equations do not single out the swap", a)
    # the 2-cell condition, which holds with equality
    for a in B.objects():
        S = P.fiber(a)
        if not S.enumerable:
            continue
        lhs = Cc.k(a).then(Kc.k(C.obj(a)))
        rhs = Kc.k(a).then(Cc.k(K.obj(a))).then(P.reindex(ell(a)))
        for x in S.elements:
            if lhs(x) != rhs(x):
                fail("the swap is not a 2-cell", (a, x))
    log.record("two-cell", True)
    # composite comonad against the reader comonad for (X x Y, phi (x) psi)
    Z = B.prod(X, Y)
    FZ = P.fiber(Z)
    tops = []
    for v, o, pr in ((phi, X, B.pr1(X, Y)), (psi, Y, B.pr2(X, Y))):
        tops.append(P.reindex(pr)(v if v is not None else P.fiber(o).top))
    chi = FZ.meet(*tops)
    Rc = build_reader_comonad(P, Z, chi)
    for a in B.objects():
        names = {"x": X, "y": Y, "a": a}
        iso = B.reshape(("x", ("y", "a")), (("x", "y"), "a"), names)
        kca = K.obj(C.obj(a))
        delta = B.comp(K.arr(ell(C.obj(a))), K.arr(K.arr(Cc.gamma(a))), Kc.gamma(C.obj(a)))
        counit = B.compose(Kc.eps(a), K.arr(Cc.eps(a)))
        if B.compose(Rc.eps(a), iso) != counit:
            fail("composite counit differs from the reader counit", a)
        names2 = {"x": X, "y": Y, "b": kca}
        iso_k = B.reshape(("x", ("y", "b")), (("x", "y"), "b"), names2)
        if B.compose(Rc.gamma(a), iso) != B.comp(Rc.K.arr(iso), iso_k, delta):
            fail("composite comultiplication differs from the reader one", a)
        S = P.fiber(a)
        if not S.enumerable:
            continue
        T = P.fiber(kca)
        lift = Cc.k(a).then(Kc.k(C.obj(a)))
        back = P.reindex(iso)
        p = lambda lab: P.reindex(B.reshape(("x", ("y", "a")), lab, names))
        for x in S.elements:
            if back(Rc.k(a)(x)) != lift(x):
                fail("composite lift differs from the reader lift", (a, x))
            formula = T.meet(T.meet(p("x")(tops_src(P, X, phi)), p("y")(tops_src(P, Y, psi))),
                             p("a")(x))
            if formula != lift(x):
                fail("composite lift is not phi & psi & alpha", (a, x))
    log.record("composite", True)
    return {"coherence": True, "two_cell": "equality", "invertible": True,
            "composite_is_reader": True, "unique_by_projections": True,
            "brute_force_solutions": brute, "log": log}


def tops_src(P, X, v):
    return v if v is not None else P.fiber(X).top


def perturbations(N, limit=20):
    """Copies of N changed at a single fiber element or a single arrow image."""
    S, R = N.source, N.target
    out = []
    for a in S.objects():
        F, T = S.fiber(a), R.fiber(N.functor.obj(a))
        if not (F.searchable and T.searchable):
            continue
        for x in F.elements:
            for y in T.elements:
                if y == N.at(a)(x) or len(out) >= limit:
                    continue

                def comp(b, a=a, x=x, y=y):
                    m = N.at(b)
                    if b != a:
                        return m
                    return MonotoneMap(m.source, m.target, lambda z: y if z == x else m(z))

                out.append(DoctrineMorphism(S, R, N.functor, comp, f"{N.name}~{len(out)}"))
    D = R.base
    for g in S.arrows():
        if len(out) >= 2 * limit:
            break
        img = N.functor.arr(g)
        try:
            others = [h for h in D.hom(D.dom(img), D.cod(img)) if h != img]
        except ProbeTooLarge:
            continue
        for h in others[:2]:
            F = Functor(N.functor.source, D, N.functor.obj,
                        lambda f, g=g, h=h: h if f == g else N.functor.arr(f), "F~")
            out.append(DoctrineMorphism(S, R, F, N.at, f"{N.name}~{len(out)}"))
    return out


def round_trip(res, R, budget=200, competitors=True):
    """Factor every enumerable primary morphism P -> R with every admissible constant.

    Returns counts; any strict mismatch raises. Each perturbed competitor must be
    rejected.
    """
    from .doctrine import enumerate_primary_morphisms

    P, X = res.P, res.X
    D = R.base
    stats = {"morphisms": 0, "models": 0, "rejected_constant": 0, "competitors": 0}
    for G in enumerate_primary_morphisms(P, R, budget=budget):
        stats["morphisms"] += 1
        for c in D.hom(D.terminal(), G.functor.obj(X)):
            if not constant_precondition(res, G, c):
                stats["rejected_constant"] += 1
                continue
            fac = factorize_model(res, G, c, validate=True)
            gt = G.functor.obj(P.base.terminal())
            if fac.morphism.functor.arr(res.constant) != D.compose(c, D.bang(gt)):
                raise DoctrineError("the new constant is not sent to c", c)
            stats["models"] += 1
            if not competitors:
                continue
            if check_model_competitor(res, fac, G, c, fac.morphism) != "equal":
                raise DoctrineError("the factorization rejects itself", c)
            for comp in perturbations(fac.morphism):
                verdict = check_model_competitor(res, fac, G, c, comp)
                if not verdict.startswith("rejected"):
                    raise UniquenessCounterexample("a perturbed competitor was accepted", comp.name)
                stats["competitors"] += 1
    return stats
