"""Doctrines (contravariant poset-valued functors), their morphisms and 2-cells,
and structure detection by exhaustive search over the fibers."""

from __future__ import annotations

from dataclasses import dataclass, field

from .category import (
    composable_pairs,
    product_comparison,
    terminal_category,
    validate_functor,
    validate_nat_transf,
)
from .checks import CheckLog
from .errors import (
    DoctrineError,
    EnumerationBudgetExceeded,
    LaxInequalityViolation,
    NaturalityViolation,
    NotMonotone,
    PreservationViolation,
    PrerequisiteMissing,
    ProbeTooLarge,
    ReindexCompositionViolation,
    ReindexIdentityViolation,
)
from .order import (
    PAIR_BUDGET,
    FinitePoset,
    certificate,
    sweep,
    MonotoneMap,
    adjoints,
    lattice_ops,
    oracle,
    star_autonomous_negation,
    validate_monotone,
)

KINDS = (
    "primary",
    "elementary",
    "existential",
    "universal",
    "implicational",
    "bounded",
    "joins",
    "heyting",
    "boolean",
    "star_autonomous",
    "pseudo_complements",
    "weak_power_objects",
)


class Doctrine:
    """A functor from base^op to posets, given by fiber and reindexing callbacks.

    ``native`` may hold formula-level structure (e.g. the diagonal of a powerset
    doctrine) used where a fiber is too large to search.
    """

    def __init__(self, base, fiber, reindex, name="P", native=None):
        self.base = base
        self._fiber = fiber
        self._reindex = reindex
        self.name = name
        self.native = dict(native or {})
        self._fibers = {}
        self._maps = {}
        self._structure = {}

    def fiber(self, a):
        try:
            return self._fibers[a]
        except KeyError:
            F = self._fibers[a] = self._fiber(a)
            return F

    def reindex(self, f):
        try:
            return self._maps[f]
        except KeyError:
            pass
        m = self._reindex(f)
        if not isinstance(m, MonotoneMap):
            m = MonotoneMap(self.fiber(self.base.cod(f)), self.fiber(self.base.dom(f)), m,
                            f"{self.name}({f})")
        self._maps[f] = m
        return m

    def objects(self):
        return self.base.objects()

    def arrows(self):
        return self.base.probe_arrows()

    def structure(self, kind):
        if kind not in self._structure:
            self._structure[kind] = detect_structure(self, kind)
        return self._structure[kind]


def tabulated_doctrine(base, fibers, tables, name="P"):
    """Fibers given per object; reindexing given per arrow as a dict table.

    Identities without a table reindex as the identity map.
    """

    def reindex(f):
        a = base.dom(f)
        if f in tables:
            t = tables[f]
            return MonotoneMap(fibers[base.cod(f)], fibers[a], t.__getitem__, f"{name}({f})")
        if f == base.identity(a):
            return MonotoneMap.identity(fibers[a])
        raise DoctrineError(f"no reindexing table for {f}", f)

    d = Doctrine(base, fibers.__getitem__, reindex, name)
    d.tables = tables
    d.fibers = fibers
    return d


def trivial_doctrine(base=None, name="1"):
    base = base or terminal_category()
    one = FinitePoset(("*",), {("*", "*")}, "one")
    return Doctrine(base, lambda a: one, lambda f: (lambda x: "*"), name)


def constant_doctrine(base, poset, name="K"):
    """Every fiber is ``poset`` and every reindexing is the identity."""
    return Doctrine(base, lambda a: poset, lambda f: (lambda x: x), name)


def _scope(P):
    return "probes" if P.base.lazy else "all"


def validate_doctrine(P):
    """Reindexing is monotone, P(id) = id and P(g f) = P(f) P(g), over (probe) arrows."""
    log = CheckLog()
    B = P.base
    for a in P.objects():
        F = P.fiber(a)
        if not F.enumerable:
            log.skip("identity", repr(a), "fiber too large")
            continue
        m = P.reindex(B.identity(a))
        for x in F.elements:
            if m(x) != x:
                raise ReindexIdentityViolation(f"{P.name}(id_{a}) moves {x!r} to {m(x)!r}", (a, x))
    log.record("reindex-identity", True, _scope(P))
    for f in P.arrows():
        m = P.reindex(f)
        if not m.source.enumerable:
            log.skip("monotone", repr(f), "fiber too large")
            continue
        validate_monotone(m)
    log.record("reindex-monotone", True, _scope(P))
    n = 0
    for f, g in composable_pairs(B):
        src = P.fiber(B.cod(g))
        if not src.enumerable:
            log.skip("composition", repr((g, f)), "fiber too large")
            continue
        gf = P.reindex(B.compose(g, f))
        pf, pg = P.reindex(f), P.reindex(g)
        for x in src.elements:
            n += 1
            if gf(x) != pf(pg(x)):
                raise ReindexCompositionViolation(
                    f"{P.name}({g} {f}) differs from {P.name}({f}) {P.name}({g}) at {x!r}",
                    (g, f, x))
    log.record("reindex-composition", True, _scope(P), f"{n} evaluations")
    return log


# ---------------------------------------------------------------------------
# structure detection


@dataclass
class KindResult:
    kind: str
    holds: bool
    witness: dict = field(default_factory=dict)
    reason: str = ""
    log: CheckLog = field(default_factory=CheckLog)
    flags: dict = field(default_factory=dict)

    def __bool__(self):
        return self.holds


@dataclass
class StructureReport:
    doctrine: str
    results: dict

    def holds(self, kind):
        return self.results[kind].holds

    def kinds(self):
        return [k for k in KINDS if k in self.results and self.results[k].holds]


def _fail(kind, reason, log=None, witness=None):
    return KindResult(kind, False, witness or {}, reason, log or CheckLog())


def _enum_fibers(P, log, kind):
    """Fibers that can be certified: small ones by search, large ones by construction."""
    out = {}
    for a in P.objects():
        F = P.fiber(a)
        if F.searchable:
            out[a] = F
        elif F.known_kinds:
            out[a] = F
            log.skip(f"{kind}-search", repr(a), "large fiber: structure taken from its construction")
        else:
            log.skip(kind, repr(a), "fiber too large")
    return out


def _need_products(P, kind):
    if not P.base.has_products:
        raise PrerequisiteMissing(f"{kind} needs a base with finite products", kind)


def _detect_primary(P):
    log = CheckLog()
    fibers = _enum_fibers(P, log, "primary")
    certs = {}
    for a, F in fibers.items():
        c = certificate(F)
        if not (c.has("meets") and c.has("top")):
            return _fail("primary", f"fiber over {a!r} lacks meets or top", log,
                         {"object": a, "pair": c.failures.get("meets")})
        certs[a] = c
    for f in P.arrows():
        a, b = P.base.dom(f), P.base.cod(f)
        if a not in certs or b not in certs:
            continue
        m, ca, cb = P.reindex(f), certs[a], certs[b]
        if m(cb.top) != ca.top:
            return _fail("primary", f"reindexing along {f!r} loses top", log, {"arrow": f})
        els = sweep(fibers[b])
        for x in els:
            for y in els:
                if m(cb.meet[x, y]) != ca.meet[m(x), m(y)]:
                    return _fail("primary", f"reindexing along {f!r} loses a meet", log,
                                 {"arrow": f, "pair": (x, y)})
    log.record("primary", True, _scope(P))
    return KindResult("primary", True, {"certificates": certs}, log=log)


def _preserved_op(P, kind, certs, op):
    """Every reindexing commutes with a binary/unary/nullary operation read from certs."""
    for f in P.arrows():
        a, b = P.base.dom(f), P.base.cod(f)
        if a not in certs or b not in certs:
            continue
        m = P.reindex(f)
        bad = op(m, certs[a], certs[b], sweep(P.fiber(b)))
        if bad is not None:
            return {"arrow": f, "at": bad}
    return None


def _detect_fiberwise(P, kind):
    """implicational, bounded, joins, heyting, boolean and pseudo_complements."""
    log = CheckLog()
    need = {
        "implicational": ("meets", "top", "implication"),
        "bounded": ("top", "bottom"),
        "joins": ("joins", "bottom"),
        "heyting": ("meets", "top", "bottom", "joins", "implication"),
        "boolean": ("boolean",),
        "pseudo_complements": ("meets", "bottom", "pseudo_complement"),
    }[kind]
    certs = {}
    for a, F in _enum_fibers(P, log, kind).items():
        c = certificate(F)
        missing = [k for k in need if not c.has(k)]
        if missing:
            return _fail(kind, f"fiber over {a!r} lacks {missing[0]}", log, {"object": a})
        certs[a] = c

    def pres_binary(table):
        def op(m, ca, cb, els):
            for x in els:
                for y in els:
                    if m(getattr(cb, table)[x, y]) != getattr(ca, table)[m(x), m(y)]:
                        return (x, y)
            return None
        return op

    def pres_const(attr):
        def op(m, ca, cb, els):
            return None if m(getattr(cb, attr)) == getattr(ca, attr) else attr
        return op

    def pres_neg(m, ca, cb, els):
        for x in els:
            if m(cb.negation[x]) != ca.negation[m(x)]:
                return x
        return None

    ops = {
        "implicational": [pres_const("top"), pres_binary("meet"), pres_binary("implication")],
        "bounded": [pres_const("top"), pres_const("bottom")],
        "joins": [pres_const("bottom"), pres_binary("join")],
        "heyting": [pres_const("top"), pres_const("bottom"), pres_binary("meet"),
                    pres_binary("join"), pres_binary("implication")],
        "boolean": [pres_const("top"), pres_const("bottom"), pres_binary("meet"),
                    pres_binary("join"), pres_neg],
        "pseudo_complements": [pres_const("bottom"), pres_binary("meet"), pres_neg],
    }[kind]
    for op in ops:
        bad = _preserved_op(P, kind, certs, op)
        if bad is not None:
            return _fail(kind, f"reindexing along {bad['arrow']!r} does not preserve it", log, bad)
    log.record(kind, True, _scope(P))
    return KindResult(kind, True, {"certificates": certs}, log=log)


def star_negation_at(P, a):
    """The involutive negation on the fiber over a, from detection or found afresh."""
    negs = P.structure("star_autonomous").witness["negation"]
    if a in negs:
        return negs[a]
    F = P.fiber(a)
    if not F.searchable:
        c = certificate(F)
        return c.negation if c is not None and c.has("star_autonomous") else None
    supplied = P.native.get("star_negation")
    return star_autonomous_negation(F, neg=supplied(a) if supplied else None)


def _detect_star(P):
    log = CheckLog()
    negs = {}
    for a, F in _enum_fibers(P, log, "star_autonomous").items():
        c = certificate(F)
        if not c.has("meets"):
            return _fail("star_autonomous", f"fiber over {a!r} lacks meets", log)
        supplied = P.native.get("star_negation")
        if not F.searchable:
            if not c.has("star_autonomous"):
                return _fail("star_autonomous", f"fiber over {a!r} is too large to search", log)
            negs[a] = c.negation
            continue
        n = star_autonomous_negation(F, neg=supplied(a) if supplied else None)
        if n is None:
            return _fail("star_autonomous", f"no involutive negation on the fiber over {a!r}",
                         log, {"object": a})
        negs[a] = n
    for f in P.arrows():
        a, b = P.base.dom(f), P.base.cod(f)
        if a in negs and b in negs:
            m = P.reindex(f)
            for x in sweep(P.fiber(b)):
                if m(negs[b][x]) != negs[a][m(x)]:
                    return _fail("star_autonomous", f"reindexing along {f!r} does not commute "
                                 "with negation", log, {"arrow": f, "at": x})
    log.record("star_autonomous", True, _scope(P))
    return KindResult("star_autonomous", True, {"negation": negs}, log=log)


def elementary_clauses_failure(P, delta, objs=None, log=None):
    """First failing clause for a family of equality predicates, else None.

    Clauses: top <= P(diag)(d_A); P(pr1)x & d_A <= P(pr2)x; d_A (x) d_B <= d_{AxB}.
    """
    B = P.base
    objs = list(P.objects()) if objs is None else objs
    log = log if log is not None else CheckLog()
    for a, d in delta.items():
        A, F = P.fiber(a), P.fiber(B.prod(a, a))
        if not A.enumerable:
            log.skip("delta-clauses", repr(a), "fiber too large")
            continue
        if not F.leq(d, d) or d not in F:
            return ("membership", a)
        if not A.leq(A.top, P.reindex(B.diagonal(a))(d)):
            return ("reflexive", a)
        p1, p2 = P.reindex(B.pr1(a, a)), P.reindex(B.pr2(a, a))
        for x in A.elements:
            if not F.leq(F.meet(p1(x), d), p2(x)):
                return ("substitutive", a, x)
    for a in objs:
        for b in objs:
            ab = B.prod(a, b)
            if a not in delta or b not in delta or ab not in delta:
                log.skip("delta-products", repr((a, b)), "missing delta")
                continue
            names = {"a": a, "b": b, "a2": a, "b2": b}
            src = (("a", "b"), ("a2", "b2"))
            F = P.fiber(B.tree_obj(src, names))
            lhs = F.meet(P.reindex(B.reshape(src, ("a", "a2"), names))(delta[a]),
                         P.reindex(B.reshape(src, ("b", "b2"), names))(delta[b]))
            if not F.leq(lhs, delta[ab]):
                return ("products", a, b)
    return None


def _detect_elementary(P):
    _need_products(P, "elementary")
    log = CheckLog()
    B = P.base
    objs = list(P.objects())
    closure = list(objs)
    for a in objs:
        for b in objs:
            ab = B.prod(a, b)
            if ab not in closure:
                closure.append(ab)
    delta, unique = {}, {}
    native = P.native.get("delta")
    for a in closure:
        try:
            A = P.fiber(a)
            F = P.fiber(B.prod(a, a))
        except ProbeTooLarge:
            log.skip("delta-search", repr(a), "fiber beyond the probe cap")
            continue
        if not (A.searchable and F.searchable):
            if native is not None:
                delta[a] = native(a)
                unique[a] = None
                log.skip("delta-search", repr(a), "fiber too large; native diagonal used")
            else:
                log.skip("delta-search", repr(a), "fiber too large")
            continue
        oa, of = oracle(A), oracle(F)
        diag = P.reindex(B.diagonal(a))
        p1, p2 = P.reindex(B.pr1(a, a)), P.reindex(B.pr2(a, a))
        cands = []
        for d in F.elements:
            if not A.leq(oa.top, diag(d)):
                continue
            if all(F.leq(of.meet(p1(x), d), p2(x)) for x in A.elements):
                cands.append(d)
        if not cands:
            if a in objs:
                return _fail("elementary", f"no equality predicate on {a!r}", log, {"object": a})
            log.skip("delta-search", repr(a), "no candidate on a product object")
            continue
        delta[a], unique[a] = cands[0], len(cands) == 1
        if native is not None and native(a) not in cands:
            return _fail("elementary", f"native diagonal on {a!r} fails the clauses", log)
    bad = elementary_clauses_failure(P, delta, objs, log)
    if bad is not None:
        return _fail("elementary", f"equality predicates fail clause {bad[0]}", log,
                     {"at": bad})
    log.record("elementary", True, _scope(P))
    return KindResult("elementary", True, {"delta": delta, "unique": unique}, log=log)


def _quantifier_pairs(P):
    objs = list(P.objects())
    return [(b, c) for b in objs for c in objs]


def quantifier_clauses_failure(P, side, quant, log=None):
    """Adjunction, Beck-Chevalley (and Frobenius for the left side) for a family
    quant[(C, B)]: P(C x B) -> P(C). Returns (failure or None, frobenius flag)."""
    B = P.base
    log = log if log is not None else CheckLog()
    for (c, b), q in quant.items():
        F, G = P.fiber(B.prod(c, b)), P.fiber(c)
        if not (F.searchable and G.searchable):
            log.skip("adjunction", repr((c, b)), "fiber too large")
            continue
        w = P.reindex(B.pr1(c, b))
        for x in F.elements:
            qx = q(x)
            if qx not in G:
                return ("membership", (c, b), x), False
            for y in G.elements:
                if side == "left":
                    ok = G.leq(qx, y) == F.leq(x, w(y))
                else:
                    ok = G.leq(y, qx) == F.leq(w(y), x)
                if not ok:
                    return ("adjunction", (c, b), x, y), False
    for f in P.arrows():
        c, c2 = B.dom(f), B.cod(f)
        for b in P.objects():
            if (c, b) not in quant or (c2, b) not in quant:
                continue
            F = P.fiber(B.prod(c2, b))
            if not F.enumerable:
                log.skip("beck-chevalley", repr((f, b)), "fiber too large")
                continue
            fid = P.reindex(B.times(f, B.identity(b)))
            pf = P.reindex(f)
            for x in F.elements:
                if quant[c, b](fid(x)) != pf(quant[c2, b](x)):
                    return ("beck-chevalley", f, b, x), False
    frob = True
    for (c, b), q in quant.items():
        F, G = P.fiber(B.prod(c, b)), P.fiber(c)
        if not (F.searchable and G.searchable):
            continue
        w = P.reindex(B.pr1(c, b))
        for x in F.elements:
            qx = q(x)
            for y in G.elements:
                if side == "left":
                    ok = q(F.meet(x, w(y))) == G.meet(qx, y)
                else:
                    # read literally: P(pr1)(y & forall x) = P(pr1)(y) & x
                    ok = w(G.meet(y, qx)) == F.meet(w(y), x)
                if not ok:
                    if side == "left":
                        return ("frobenius", (c, b), x, y), False
                    frob = False
                    break
            if not frob:
                break
        if not frob:
            break
    return None, frob


def _detect_quantifier(P, side):
    kind = "existential" if side == "left" else "universal"
    _need_products(P, kind)
    log = CheckLog()
    B = P.base
    quant = {}
    native = P.native.get("exists" if side == "left" else "forall")
    for b, c in _quantifier_pairs(P):
        cb = B.prod(c, b)
        src, tgt = P.fiber(c), P.fiber(cb)
        if not (src.searchable and tgt.searchable):
            if native is not None:
                quant[c, b] = native(c, b)
                log.skip(f"{kind}-search", repr((c, b)), "fiber too large; native used")
            else:
                log.skip(f"{kind}-search", repr((c, b)), "fiber too large")
            continue
        adj = adjoints(P.reindex(B.pr1(c, b)))
        q = adj.left if side == "left" else adj.right
        if q is None:
            return _fail(kind, f"weakening from {c!r} to {c!r} x {b!r} has no "
                         f"{side} adjoint", log, {"pair": (c, b)})
        if native is not None:
            nq = native(c, b)
            for x in tgt.elements:
                if nq(x) != q(x):
                    return _fail(kind, "native quantifier disagrees with the adjoint", log)
        quant[c, b] = q
    bad, frob = quantifier_clauses_failure(P, side, quant, log)
    if bad is not None:
        return _fail(kind, f"{bad[0]} fails", log, {"at": bad})
    log.record(f"{kind}-clauses", True, _scope(P))
    flags = {}
    if side == "right":
        flags["frobenius"] = frob
        log.record("frobenius-forall", True, _scope(P), f"flag={frob}")
    return KindResult(kind, True, {"quantifier": quant}, log=log, flags=flags)


def quantifier(P, side, c, b):
    """The quantifier P(C x B) -> P(C): detected, native, or searched on the spot."""
    kind = "existential" if side == "left" else "universal"
    r = P._structure.get(kind)
    if r is not None and r.holds and (c, b) in r.witness["quantifier"]:
        return r.witness["quantifier"][c, b]
    native = P.native.get("exists" if side == "left" else "forall")
    if native is not None:
        return native(c, b)
    adj = adjoints(P.reindex(P.base.pr1(c, b)))
    return adj.left if side == "left" else adj.right


def _detect_weak_power(P, budget=200_000):
    _need_products(P, "weak_power_objects")
    log = CheckLog()
    B = P.base
    objs = list(P.objects())
    found = {}
    steps = 0
    for a in objs:
        hit = None
        for om in objs:
            aom = B.prod(a, om)
            F = P.fiber(aom)
            if not F.searchable:
                continue
            for mem in F.elements:
                ok = True
                for b in objs:
                    G = P.fiber(B.prod(a, b))
                    if not G.searchable:
                        continue
                    reps = set()
                    for u in B.hom(b, om):
                        steps += 1
                        if steps > budget:
                            raise EnumerationBudgetExceeded("weak power object search", steps)
                        reps.add(P.reindex(B.times(B.identity(a), u))(mem))
                    if not all(phi in reps for phi in G.elements):
                        ok = False
                        break
                if ok:
                    hit = (om, mem)
                    break
            if hit:
                break
        if hit is None:
            return _fail("weak_power_objects", f"no weak power object for {a!r} among the "
                         "probe objects", log, {"object": a})
        found[a] = hit
    log.record("weak_power_objects", True, _scope(P))
    return KindResult("weak_power_objects", True, {"power": found}, log=log)


def detect_structure(P, kind=None):
    """Exhaustive detection of one kind (KindResult) or of all kinds (StructureReport)."""
    if kind is None:
        results = {}
        for k in KINDS:
            try:
                results[k] = detect_structure(P, k)
            except PrerequisiteMissing as e:
                results[k] = _fail(k, str(e))
        return StructureReport(P.name, results)
    if kind == "primary":
        return _detect_primary(P)
    if kind in ("implicational", "bounded", "joins", "heyting", "boolean", "pseudo_complements"):
        return _detect_fiberwise(P, kind)
    if kind == "star_autonomous":
        return _detect_star(P)
    if kind == "weak_power_objects":
        return _detect_weak_power(P)
    if kind not in ("elementary", "existential", "universal"):
        raise ValueError(f"unknown structure kind {kind!r}")
    if kind in ("elementary", "existential") and not P.structure("primary").holds:
        raise PrerequisiteMissing(f"{kind} requires a primary doctrine", kind)
    if kind == "elementary":
        return _detect_elementary(P)
    return _detect_quantifier(P, "left" if kind == "existential" else "right")


# ---------------------------------------------------------------------------
# morphisms and 2-cells


class DoctrineMorphism:
    """A pair (F, f): a base functor and a natural family f_A: P(A) -> R(FA)."""

    def __init__(self, source, target, functor, component, name="M"):
        self.source = source
        self.target = target
        self.functor = functor
        self._component = component
        self.name = name
        self._cache = {}

    def at(self, a):
        try:
            return self._cache[a]
        except KeyError:
            pass
        m = self._component(a)
        if not isinstance(m, MonotoneMap):
            m = MonotoneMap(self.source.fiber(a), self.target.fiber(self.functor.obj(a)), m,
                            f"{self.name}_{a}")
        self._cache[a] = m
        return m

    def then(self, other):
        """``other`` after ``self``."""
        F = self.functor.then(other.functor)
        return DoctrineMorphism(self.source, other.target, F,
                                lambda a: self.at(a).then(other.at(self.functor.obj(a))),
                                f"{other.name}.{self.name}")


def identity_morphism(P):
    from .category import Functor

    return DoctrineMorphism(P, P, Functor.identity(P.base),
                            lambda a: MonotoneMap.identity(P.fiber(a)), "id")


def morphism_mismatch(M, N):
    """First place where two parallel morphisms differ strictly, else None."""
    from .category import functor_mismatch

    bad = functor_mismatch(M.functor, N.functor)
    if bad is not None:
        return bad
    for a in M.source.objects():
        F = M.source.fiber(a)
        if not F.enumerable:
            continue
        for x in F.elements:
            if M.at(a)(x) != N.at(a)(x):
                return ("component", a, x)
    return None


def validate_morphism(M, preserves=("primary",)):
    """Functor laws, naturality of the components, and the listed preservation laws."""
    P, R = M.source, M.target
    C, D = P.base, R.base
    log = validate_functor(M.functor, products=bool(set(preserves) - {"none"}))
    for a in P.objects():
        m = M.at(a)
        if m.source.enumerable:
            try:
                validate_monotone(m)
            except NotMonotone as e:
                raise NaturalityViolation(str(e), e.witness)
    for h in P.arrows():
        a, b = C.dom(h), C.cod(h)
        Fb = P.fiber(b)
        if not Fb.enumerable:
            continue
        left = P.reindex(h).then(M.at(a))
        right = M.at(b).then(R.reindex(M.functor.arr(h)))
        for x in Fb.elements:
            if left(x) != right(x):
                raise NaturalityViolation(f"{M.name} is not natural at {h!r}", (h, x))
    log.record("naturality", True, _scope(P))
    for kind in preserves:
        if kind == "none":
            continue
        _check_preservation(M, kind)
        log.record(f"preserves-{kind}", True, _scope(P))
    return log


def _fiber_pairs(F):
    for x in F.elements:
        for y in F.elements:
            yield x, y


def _check_preservation(M, kind):
    P, R = M.source, M.target
    C, D = P.base, R.base
    F = M.functor

    def bad(msg, witness):
        raise PreservationViolation(f"{M.name} does not preserve {kind}: {msg}", kind, witness)

    def fibers():
        for a in P.objects():
            S, T = P.fiber(a), R.fiber(F.obj(a))
            if S.searchable and T.searchable:
                yield a, S, T, oracle(S), oracle(T), M.at(a)

    if kind == "primary":
        for a, S, T, os_, ot, m in fibers():
            if m(os_.top) != ot.top:
                bad(f"top over {a!r}", (a,))
            for x, y in _fiber_pairs(S):
                if m(os_.meet(x, y)) != ot.meet(m(x), m(y)):
                    bad(f"meet over {a!r}", (a, x, y))
        return
    if kind in ("bounded", "joins", "implicational", "heyting", "boolean", "pseudo_complements",
                "star_autonomous"):
        for a, S, T, os_, ot, m in fibers():
            if kind in ("bounded", "joins", "heyting", "boolean", "pseudo_complements"):
                if m(os_.bottom) != ot.bottom:
                    bad(f"bottom over {a!r}", (a,))
            for x, y in _fiber_pairs(S):
                if kind in ("joins", "heyting", "boolean"):
                    if m(os_.join(x, y)) != ot.join(m(x), m(y)):
                        bad(f"join over {a!r}", (a, x, y))
                if kind in ("implicational", "heyting", "boolean"):
                    if m(os_.implies(x, y)) != ot.implies(m(x), m(y)):
                        bad(f"implication over {a!r}", (a, x, y))
            if kind in ("pseudo_complements", "boolean"):
                for x in S.elements:
                    if m(os_.neg(x)) != ot.neg(m(x)):
                        bad(f"negation over {a!r}", (a, x))
            if kind == "star_autonomous":
                ns = P.structure(kind).witness["negation"][a]
                nt = R.structure(kind).witness["negation"][F.obj(a)]
                for x in S.elements:
                    if m(ns[x]) != nt[m(x)]:
                        bad(f"negation over {a!r}", (a, x))
        return
    if kind == "elementary":
        dp = P.structure("elementary").witness["delta"]
        dr = R.structure("elementary").witness["delta"]
        for a in P.objects():
            if a not in dp or F.obj(a) not in dr:
                continue
            can = product_comparison(F, a, a)
            lhs = M.at(C.prod(a, a))(dp[a])
            rhs = R.reindex(can)(dr[F.obj(a)])
            if lhs != rhs:
                bad(f"equality on {a!r}", (a,))
        return
    if kind in ("existential", "universal"):
        qp = P.structure(kind).witness["quantifier"]
        qr = R.structure(kind).witness["quantifier"]
        for (c, b), q in qp.items():
            key = (F.obj(c), F.obj(b))
            if key not in qr:
                continue
            S = P.fiber(C.prod(c, b))
            if not S.enumerable:
                continue
            inv = D.inverse(product_comparison(F, c, b))
            back = R.reindex(inv)
            mcb, mc = M.at(C.prod(c, b)), M.at(c)
            for x in S.elements:
                if mc(q(x)) != qr[key](back(mcb(x))):
                    bad(f"quantifier over {(c, b)!r}", (c, b, x))
        return
    if kind == "weak_power_objects":
        return
    raise ValueError(f"unknown structure kind {kind!r}")


def validate_two_cell(theta, M, N):
    """theta: F -> G natural with f_A(x) <= R(theta_A) g_A(x) for every x."""
    from .category import NatTransf

    validate_nat_transf(NatTransf(M.functor, N.functor, theta))
    P, R = M.source, M.target
    for a in P.objects():
        S = P.fiber(a)
        if not S.enumerable:
            continue
        r = R.reindex(theta(a))
        T = R.fiber(M.functor.obj(a))
        for x in S.elements:
            if not T.leq(M.at(a)(x), r(N.at(a)(x))):
                raise LaxInequalityViolation(f"2-cell inequality fails at {a!r}", (a, x))
    return True


def is_two_cell(theta, M, N):
    try:
        return validate_two_cell(theta, M, N)
    except DoctrineError:
        return False


def compare_morphisms(M, N):
    """Strict equality, and whether an invertible 2-cell relates M and N."""
    strict = morphism_mismatch(M, N) is None
    inv = None
    C, D = M.source.base, M.target.base
    import itertools

    objs = list(C.objects())
    try:
        choices = [[u for u in D.hom(M.functor.obj(a), N.functor.obj(a)) if D.inverse(u) is not None]
                   for a in objs]
    except ProbeTooLarge:
        choices = None
    if choices is not None:
        for comps in itertools.product(*choices):
            table = dict(zip(objs, comps))
            inv_table = {a: D.inverse(u) for a, u in table.items()}
            if is_two_cell(table.__getitem__, M, N) and is_two_cell(inv_table.__getitem__, N, M):
                inv = table
                break
    return {"strict": strict, "invertible_two_cell": inv is not None, "two_cell": inv}


def enumerate_fiber_maps(S, T, preserve_meets=True):
    """All monotone maps S -> T (meet and top preserving if asked), by backtracking."""
    els = list(S.elements)
    os_, ot = oracle(S), oracle(T)
    # larger elements first, so meets tend to be assigned before they are needed
    els.sort(key=lambda x: bin(os_.ix.up[os_.ix.pos[x]]).count("1"))
    out = []
    assign = {}

    def ok(x, v):
        for y, w in assign.items():
            if S.leq(x, y) and not T.leq(v, w):
                return False
            if S.leq(y, x) and not T.leq(w, v):
                return False
            if preserve_meets:
                m = os_.meet(x, y)
                if m in assign and assign[m] != ot.meet(v, w):
                    return False
                if m == x and ot.meet(v, w) != v:
                    return False
                if m == y and ot.meet(v, w) != w:
                    return False
        return True

    def rec(i):
        if i == len(els):
            if preserve_meets:
                for x in els:
                    for y in els:
                        if assign[os_.meet(x, y)] != ot.meet(assign[x], assign[y]):
                            return
            out.append(dict(assign))
            return
        x = els[i]
        cands = [ot.top] if preserve_meets and x == os_.top else T.elements
        for v in cands:
            if ok(x, v):
                assign[x] = v
                rec(i + 1)
                del assign[x]

    rec(0)
    return out


def enumerate_primary_morphisms(P, R, budget=2000, functors=None):
    """Primary morphisms P -> R over thin or small bases, capped at ``budget``."""
    from .category import Functor, enumerate_functors

    C = P.base
    if functors is None:
        functors = enumerate_functors(C, R.base, products=True)
    objs = list(C.objects())
    arrows = list(C.arrows())
    out = []
    for F in functors:
        per = {a: enumerate_fiber_maps(P.fiber(a), R.fiber(F.obj(a))) for a in objs}
        assign = {}

        def natural_so_far():
            for h in arrows:
                a, b = C.dom(h), C.cod(h)
                if a in assign and b in assign:
                    ph, rh = P.reindex(h), R.reindex(F.arr(h))
                    for x in P.fiber(b).elements:
                        if assign[a][ph(x)] != rh(assign[b][x]):
                            return False
            return True

        def rec(i):
            if len(out) >= budget:
                return
            if i == len(objs):
                tables = dict(assign)
                out.append(DoctrineMorphism(
                    P, R, F,
                    lambda a, t=tables, F=F: MonotoneMap(P.fiber(a), R.fiber(F.obj(a)),
                                                         t[a].__getitem__),
                    f"G{len(out)}"))
                return
            a = objs[i]
            for table in per[a]:
                assign[a] = table
                if natural_so_far():
                    rec(i + 1)
                del assign[a]

        rec(0)
        if len(out) >= budget:
            break
    return out

