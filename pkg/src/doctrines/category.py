"""Categories with chosen finite products, functors and natural transformations.

A finite category with all binary products is necessarily a preorder, so the
finite tables here are mostly thin. Non-thin examples come from the lazily
probed category of finite sets in ``finset``.
"""

from __future__ import annotations

import itertools
import random
from collections import namedtuple

from .checks import CheckLog
from .errors import (
    AssociativityViolation,
    CompositionUndefined,
    EnumerationBudgetExceeded,
    FunctorLawViolation,
    IdentityViolation,
    MeetsRequired,
    NaturalitySquareViolation,
    ProbeTooLarge,
    ProductsNotPreserved,
    ProductUMPViolation,
    TerminalNotUnique,
)
from .order import lattice_ops

Product = namedtuple("Product", "obj pr1 pr2")


class Category:
    """Interface shared by finite tables, lazy bases and Kleisli categories."""

    lazy = False
    has_products = False
    name = "C"

    def objects(self):
        raise NotImplementedError

    def hom(self, a, b):
        raise NotImplementedError

    def dom(self, f):
        raise NotImplementedError

    def cod(self, f):
        raise NotImplementedError

    def identity(self, a):
        raise NotImplementedError

    def compose(self, g, f):
        """g after f."""
        raise NotImplementedError

    def arrows(self):
        obs = self.objects()
        return [f for a in obs for b in obs for f in self.hom(a, b)]

    def probe_arrows(self):
        return self.arrows()

    def comp(self, *fs):
        acc = fs[-1]
        for g in reversed(fs[:-1]):
            acc = self.compose(g, acc)
        return acc

    def inverse(self, f):
        a, b = self.dom(f), self.cod(f)
        for g in self.hom(b, a):
            if self.compose(g, f) == self.identity(a) and self.compose(f, g) == self.identity(b):
                return g
        return None

    # chosen products; only meaningful when has_products is set
    def terminal(self):
        raise NotImplementedError

    def bang(self, a):
        raise NotImplementedError

    def product(self, a, b):
        raise NotImplementedError

    def pair(self, f, g):
        raise NotImplementedError

    def prod(self, a, b):
        return self.product(a, b).obj

    def pr1(self, a, b):
        return self.product(a, b).pr1

    def pr2(self, a, b):
        return self.product(a, b).pr2

    def times(self, f, g):
        a, b = self.dom(f), self.dom(g)
        return self.pair(self.compose(f, self.pr1(a, b)), self.compose(g, self.pr2(a, b)))

    def diagonal(self, a):
        i = self.identity(a)
        return self.pair(i, i)

    # arrows between iterated products, described by nested tuples of labels
    def tree_obj(self, tree, objs):
        if isinstance(tree, tuple):
            return self.prod(self.tree_obj(tree[0], objs), self.tree_obj(tree[1], objs))
        return objs[tree]

    def tree_proj(self, tree, label, objs):
        if not isinstance(tree, tuple):
            if tree != label:
                raise KeyError(label)
            return self.identity(objs[tree])
        left, right = tree
        lo, ro = self.tree_obj(left, objs), self.tree_obj(right, objs)
        if label in _leaves(left):
            return self.compose(self.tree_proj(left, label, objs), self.pr1(lo, ro))
        return self.compose(self.tree_proj(right, label, objs), self.pr2(lo, ro))

    def reshape(self, src, tgt, objs):
        """The arrow obj(src) -> obj(tgt) that routes each labelled factor."""
        if isinstance(tgt, tuple):
            return self.pair(self.reshape(src, tgt[0], objs), self.reshape(src, tgt[1], objs))
        return self.tree_proj(src, tgt, objs)


def _leaves(tree):
    if isinstance(tree, tuple):
        return _leaves(tree[0]) | _leaves(tree[1])
    return {tree}


def composable_pairs(cat, arrows=None):
    arrows = cat.probe_arrows() if arrows is None else arrows
    by_dom = {}
    for g in arrows:
        by_dom.setdefault(cat.dom(g), []).append(g)
    for f in arrows:
        for g in by_dom.get(cat.cod(f), ()):
            yield f, g


class FiniteCategory(Category):
    """A category given by explicit tables; products are optional chosen cones."""

    def __init__(self, name, objects, arrows, composition, identities,
                 terminal=None, products=None):
        self.name = name
        self._objects = tuple(objects)
        self._arrows = dict(arrows)
        self.composition = dict(composition)
        self.identities = dict(identities)
        self._terminal = terminal
        self.products = dict(products or {})
        self.has_products = terminal is not None and bool(self.products or not self._objects)
        self._homs = {}
        for f, (a, b) in self._arrows.items():
            self._homs.setdefault((a, b), []).append(f)
        self._pairs = {}

    def objects(self):
        return self._objects

    def hom(self, a, b):
        return self._homs.get((a, b), [])

    def arrows(self):
        return list(self._arrows)

    def dom(self, f):
        return self._arrows[f][0]

    def cod(self, f):
        return self._arrows[f][1]

    def identity(self, a):
        return self.identities[a]

    def compose(self, g, f):
        if self.cod(f) != self.dom(g):
            raise CompositionUndefined(f"{g} after {f}: types do not match", (g, f))
        if f == self.identities[self.dom(f)]:
            return g
        if g == self.identities[self.cod(g)]:
            return f
        try:
            return self.composition[g, f]
        except KeyError:
            raise CompositionUndefined(f"no composite recorded for {g} after {f}", (g, f))

    def terminal(self):
        return self._terminal

    def bang(self, a):
        hs = self.hom(a, self._terminal)
        if len(hs) != 1:
            raise TerminalNotUnique(f"{len(hs)} arrows from {a} to the terminal", a)
        return hs[0]

    def product(self, a, b):
        try:
            return Product(*self.products[a, b])
        except KeyError:
            raise ProductUMPViolation(f"no chosen product of {a} and {b}", (a, b))

    def pair(self, f, g):
        key = (f, g)
        if key in self._pairs:
            return self._pairs[key]
        c = self.dom(f)
        if self.dom(g) != c:
            raise CompositionUndefined("pairing needs a common domain", key)
        p = self.product(self.cod(f), self.cod(g))
        found = [u for u in self.hom(c, p.obj)
                 if self.compose(p.pr1, u) == f and self.compose(p.pr2, u) == g]
        if len(found) != 1:
            raise ProductUMPViolation(f"{len(found)} mediating arrows for ({f}, {g})", key)
        self._pairs[key] = found[0]
        return found[0]


def _sampler(cat, k=6):
    """On lazy categories, a seeded choice of at most k continuations per arrow."""
    if not cat.lazy:
        return lambda xs, key: xs

    def pick(xs, key):
        if len(xs) <= k:
            return xs
        return random.Random(repr(key)).sample(list(xs), k)

    return pick


def validate_category_with_products(cat, products=True, budget=200_000):
    """Identity, associativity, terminal and product laws over the (probe) arrows."""
    log = CheckLog()
    arrows = cat.probe_arrows()
    scope = "probes" if cat.lazy else "all"
    for a in cat.objects():
        i = cat.identity(a)
        if cat.dom(i) != a or cat.cod(i) != a:
            raise IdentityViolation(f"identity of {a} has the wrong type", a)
    for f in arrows:
        if cat.compose(cat.identity(cat.cod(f)), f) != f or cat.compose(f, cat.identity(cat.dom(f))) != f:
            raise IdentityViolation(f"identity is not neutral for {f}", f)
    log.record("identities", True, scope)
    by_dom = {}
    for g in arrows:
        by_dom.setdefault(cat.dom(g), []).append(g)
    n = 0
    pick = _sampler(cat)
    for f in arrows:
        for g in pick(by_dom.get(cat.cod(f), ()), f):
            gf = cat.compose(g, f)
            for h in pick(by_dom.get(cat.cod(g), ()), (g, f)):
                n += 1
                if n > budget:
                    raise EnumerationBudgetExceeded("associativity budget exhausted", n)
                if cat.compose(h, gf) != cat.compose(cat.compose(h, g), f):
                    raise AssociativityViolation(f"({h} {g}) {f} differs from {h} ({g} {f})",
                                                 (h, g, f))
    log.record("associativity", True, scope, f"{n} triples")
    if not products:
        return log
    t = cat.terminal()
    for a in cat.objects():
        b = cat.bang(a)
        if cat.dom(b) != a or cat.cod(b) != t:
            raise TerminalNotUnique(f"bang of {a} has the wrong type", a)
        try:
            hs = cat.hom(a, t)
        except ProbeTooLarge:
            continue
        if len(hs) != 1:
            raise TerminalNotUnique(f"{len(hs)} arrows from {a} to the terminal", a)
    log.record("terminal", True, scope)
    obs = list(cat.objects())
    for a in obs:
        for b in obs:
            p = cat.product(a, b)
            if (cat.dom(p.pr1), cat.cod(p.pr1)) != (p.obj, a) or (cat.dom(p.pr2), cat.cod(p.pr2)) != (p.obj, b):
                raise ProductUMPViolation(f"projections of {a} x {b} are mistyped", (a, b))
            for c in obs:
                try:
                    fs, gs = cat.hom(c, a), cat.hom(c, b)
                    us = cat.hom(c, p.obj)
                except ProbeTooLarge:
                    log.skip("product-ump", f"{a},{b},{c}", "hom-set too large")
                    continue
                if len(fs) * len(gs) != len(us):
                    raise ProductUMPViolation(
                        f"|hom({c},{a})| x |hom({c},{b})| != |hom({c},{a}x{b})|", (a, b, c))
                for f in fs:
                    for g in gs:
                        u = cat.pair(f, g)
                        if cat.compose(p.pr1, u) != f or cat.compose(p.pr2, u) != g:
                            raise ProductUMPViolation(f"pairing of {f}, {g} fails", (f, g))
    log.record("products", True, scope)
    return log


def semilattice_to_category(P, name=None):
    """A finite meet-semilattice with top as a thin category; products are meets."""
    cert = lattice_ops(P)
    if not (cert.has("meets") and cert.has("top")):
        raise MeetsRequired("binary meets and a top element are required",
                            cert.failures.get("meets"))
    els = P.elements

    def arr(a, b):
        return f"{a}<={b}"

    arrows = {arr(a, b): (a, b) for a in els for b in els if P.leq(a, b)}
    composition = {}
    for a in els:
        for b in els:
            if not P.leq(a, b):
                continue
            for c in els:
                if P.leq(b, c):
                    composition[arr(b, c), arr(a, b)] = arr(a, c)
    identities = {a: arr(a, a) for a in els}
    products = {}
    for a in els:
        for b in els:
            m = cert.meet[a, b]
            products[a, b] = (m, arr(m, a), arr(m, b))
    return FiniteCategory(name or P.name, els, arrows, composition, identities,
                          cert.top, products)


class Functor:
    def __init__(self, source, target, on_objects, on_arrows, name="F"):
        self.source = source
        self.target = target
        self.on_objects = on_objects
        self.on_arrows = on_arrows
        self.name = name
        self._objs = {}
        self._arrs = {}

    def obj(self, a):
        try:
            return self._objs[a]
        except KeyError:
            r = self._objs[a] = self.on_objects(a)
            return r

    def arr(self, f):
        try:
            return self._arrs[f]
        except KeyError:
            r = self._arrs[f] = self.on_arrows(f)
            return r

    @classmethod
    def identity(cls, cat):
        return cls(cat, cat, lambda a: a, lambda f: f, "Id")

    def then(self, other):
        """``other`` after ``self``."""
        return Functor(self.source, other.target,
                       lambda a: other.obj(self.obj(a)),
                       lambda f: other.arr(self.arr(f)), f"{other.name}{self.name}")


def functor_mismatch(F, G, objects=None, arrows=None):
    """First object or arrow on which two parallel functors differ, else None."""
    src = F.source
    for a in objects if objects is not None else src.objects():
        if F.obj(a) != G.obj(a):
            return ("object", a, F.obj(a), G.obj(a))
    for f in arrows if arrows is not None else src.probe_arrows():
        if F.arr(f) != G.arr(f):
            return ("arrow", f, F.arr(f), G.arr(f))
    return None


def validate_functor(F, products=False):
    C, D = F.source, F.target
    log = CheckLog()
    for a in C.objects():
        if F.arr(C.identity(a)) != D.identity(F.obj(a)):
            raise FunctorLawViolation(f"{F.name} does not preserve the identity of {a}", a)
    for f in C.probe_arrows():
        Ff = F.arr(f)
        if D.dom(Ff) != F.obj(C.dom(f)) or D.cod(Ff) != F.obj(C.cod(f)):
            raise FunctorLawViolation(f"{F.name}({f}) is mistyped", f)
    for f, g in composable_pairs(C):
        if F.arr(C.compose(g, f)) != D.compose(F.arr(g), F.arr(f)):
            raise FunctorLawViolation(f"{F.name} does not preserve {g} after {f}", (g, f))
    log.record("functor-laws", True, "probes" if C.lazy else "all")
    if products:
        check_preserves_products(F)
        log.record("preserves-products", True)
    return log


def product_comparison(F, a, b):
    """The canonical arrow F(a x b) -> Fa x Fb."""
    C, D = F.source, F.target
    p = C.product(a, b)
    return D.pair(F.arr(p.pr1), F.arr(p.pr2))


def terminal_comparison(F):
    C, D = F.source, F.target
    return D.bang(F.obj(C.terminal()))


def check_preserves_products(F):
    C, D = F.source, F.target
    if D.inverse(terminal_comparison(F)) is None:
        raise ProductsNotPreserved(f"{F.name} does not preserve the terminal object",
                                   F.obj(C.terminal()))
    for a in C.objects():
        for b in C.objects():
            if D.inverse(product_comparison(F, a, b)) is None:
                raise ProductsNotPreserved(f"{F.name} does not preserve {a} x {b}", (a, b))


class NatTransf:
    def __init__(self, source, target, component, name="theta"):
        self.source = source
        self.target = target
        self.component = component
        self.name = name

    def __getitem__(self, a):
        return self.component(a)


def validate_nat_transf(theta):
    F, G = theta.source, theta.target
    C, D = F.source, F.target
    for a in C.objects():
        t = theta[a]
        if D.dom(t) != F.obj(a) or D.cod(t) != G.obj(a):
            raise NaturalitySquareViolation(f"component at {a} is mistyped", a)
    for h in C.probe_arrows():
        a, b = C.dom(h), C.cod(h)
        if D.compose(G.arr(h), theta[a]) != D.compose(theta[b], F.arr(h)):
            raise NaturalitySquareViolation(f"square at {h} does not commute", h)
    return True


def terminal_category():
    return FiniteCategory("1", ("t",), {"id_t": ("t", "t")}, {}, {"t": "id_t"},
                          "t", {("t", "t"): ("t", "id_t", "id_t")})


def enumerate_functors(C, D, products=True, budget=10_000):
    """All functors C -> D (product preserving if asked), by backtracking, capped."""
    obs = list(C.objects())
    arrows = [f for f in C.arrows() if f != C.identity(C.dom(f))]
    out = []
    for images in itertools.product(D.objects(), repeat=len(obs)):
        omap = dict(zip(obs, images))
        choices = [D.hom(omap[C.dom(f)], omap[C.cod(f)]) for f in arrows]
        if any(not c for c in choices):
            continue
        for amap_vals in itertools.product(*choices):
            amap = dict(zip(arrows, amap_vals))
            F = Functor(C, D, omap.__getitem__,
                        lambda f, amap=amap, omap=omap: amap.get(f) or D.identity(omap[C.dom(f)]),
                        "G")
            try:
                validate_functor(F, products=products)
            except (FunctorLawViolation, ProductsNotPreserved):
                continue
            out.append(F)
            if len(out) > budget:
                raise EnumerationBudgetExceeded("functor enumeration budget exhausted", budget)
    return out
