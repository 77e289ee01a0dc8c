"""Finite posets, brute-force lattice structure and Galois adjoints.

Two layers live here. Poset subclasses expose *operational* meets, joins and
implications that constructions use (some of them are formulas, e.g. set
intersection). The module functions ``lattice_ops``, ``heyting_ops`` and
``adjoints`` ignore those and search the order relation directly; they are the
oracles everything else is checked against.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import cached_property

from .errors import (
    AntisymmetryViolation,
    MeetsRequired,
    NotAHeytingAlgebra,
    NotAnAdjoint,
    NotMonotone,
    ProbeTooLarge,
    ReflexivityViolation,
    TransitivityViolation,
)

ENUM_CAP = 1 << 16  # largest fiber whose elements may be listed at all
CHECK_CAP = 1 << 12  # largest fiber swept elementwise by validators
SEARCH_CAP = 64  # largest fiber searched by the brute-force oracles
PAIR_BUDGET = 1 << 16  # element pairs swept before switching to a seeded sample

BOOLEAN_KINDS = frozenset({"meets", "joins", "top", "bottom", "distributive", "implication",
                           "heyting", "boolean", "pseudo_complement", "star_autonomous"})


def _bits(mask):
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


class OrderIndex:
    """Bitset view of a finite order: down[i] and up[i] as integer masks."""

    def __init__(self, elements, leq):
        self.elements = tuple(elements)
        self.pos = {a: i for i, a in enumerate(self.elements)}
        n = len(self.elements)
        self.full = (1 << n) - 1
        down = [0] * n
        up = [0] * n
        for i, a in enumerate(self.elements):
            for j, b in enumerate(self.elements):
                if leq(a, b):
                    down[j] |= 1 << i
                    up[i] |= 1 << j
        self.down = down
        self.up = up

    def greatest(self, mask):
        for m in _bits(mask):
            if self.down[m] & mask == mask:
                return m
        return None

    def least(self, mask):
        for m in _bits(mask):
            if self.up[m] & mask == mask:
                return m
        return None

    def glb(self, i, j):
        return self.greatest(self.down[i] & self.down[j])

    def lub(self, i, j):
        return self.least(self.up[i] & self.up[j])


class Poset:
    """Abstract finite poset. Subclasses supply ``leq`` and ``_enumerate``."""

    name = "poset"
    known_kinds = frozenset()  # structure guaranteed by construction

    def leq(self, a, b):
        raise NotImplementedError

    def _enumerate(self):
        raise NotImplementedError

    def size(self):
        return len(self.elements)

    @property
    def enumerable(self):
        return self.size() <= CHECK_CAP

    @property
    def searchable(self):
        return self.size() <= SEARCH_CAP

    @cached_property
    def elements(self):
        n = self.size() if type(self).size is not Poset.size else None
        if n is not None and n > ENUM_CAP:
            raise ProbeTooLarge(f"{self.name}: {n} elements exceeds {ENUM_CAP}", n)
        return tuple(self._enumerate())

    def __contains__(self, a):
        return a in self._members

    @cached_property
    def _members(self):
        return frozenset(self.elements)

    def __iter__(self):
        return iter(self.elements)

    def __len__(self):
        return self.size()

    @cached_property
    def index(self):
        return OrderIndex(self.elements, self.leq)

    def eq(self, a, b):
        return self.leq(a, b) and self.leq(b, a)

    def elements_below(self, x):
        return [a for a in self.elements if self.leq(a, x)]

    # operational structure, brute force unless overridden
    def meet(self, a, b):
        ix = self.index
        m = ix.glb(ix.pos[a], ix.pos[b])
        if m is None:
            raise MeetsRequired(f"no meet of {a!r} and {b!r}", (a, b))
        return ix.elements[m]

    def join(self, a, b):
        ix = self.index
        m = ix.lub(ix.pos[a], ix.pos[b])
        if m is None:
            raise MeetsRequired(f"no join of {a!r} and {b!r}", (a, b))
        return ix.elements[m]

    @cached_property
    def top(self):
        ix = self.index
        m = ix.greatest(ix.full)
        return None if m is None else ix.elements[m]

    @cached_property
    def bottom(self):
        ix = self.index
        m = ix.least(ix.full)
        return None if m is None else ix.elements[m]

    def meet_all(self, items):
        items = list(items)
        if not items:
            return self.top
        acc = items[0]
        for a in items[1:]:
            acc = self.meet(acc, a)
        return acc

    def implies(self, a, b):
        ix = self.index
        mask = 0
        for c in self.elements:
            if self.leq(self.meet(a, c), b):
                mask |= 1 << ix.pos[c]
        m = ix.greatest(mask)
        if m is None:
            raise NotAHeytingAlgebra(f"no implication {a!r} -> {b!r}", (a, b))
        return ix.elements[m]

    def neg(self, a):
        bot = self.bottom
        if bot is None:
            raise NotAHeytingAlgebra("no bottom element", a)
        return self.implies(a, bot)


class FinitePoset(Poset):
    """Explicit poset from an element tuple and a reflexive, transitive relation."""

    def __init__(self, elements, leq_pairs, name="poset"):
        self._elements = tuple(elements)
        self.rel = frozenset(leq_pairs)
        self.name = name

    def _enumerate(self):
        return self._elements

    def size(self):
        return len(self._elements)

    def leq(self, a, b):
        return (a, b) in self.rel

    @classmethod
    def from_covers(cls, elements, covers, name="poset"):
        elements = tuple(elements)
        succ = {a: set() for a in elements}
        for a, b in covers:
            succ[a].add(b)
        rel = set()
        for a in elements:
            stack, seen = [a], {a}
            while stack:
                x = stack.pop()
                for y in succ[x]:
                    if y not in seen:
                        seen.add(y)
                        stack.append(y)
            rel.update((a, b) for b in seen)
        return cls(elements, rel, name)

    @classmethod
    def from_leq(cls, elements, leq, name="poset"):
        elements = tuple(elements)
        return cls(elements, [(a, b) for a in elements for b in elements if leq(a, b)], name)

    def covers(self):
        out = []
        for a in self._elements:
            for b in self._elements:
                if a != b and self.leq(a, b):
                    if not any(c not in (a, b) and self.leq(a, c) and self.leq(c, b)
                               for c in self._elements):
                        out.append((a, b))
        return out


class PowersetPoset(Poset):
    """Subsets of a finite universe under inclusion, with set-theoretic operations."""

    known_kinds = BOOLEAN_KINDS

    def __init__(self, universe, name=None):
        self.universe = tuple(universe)
        self.uset = frozenset(self.universe)
        self.name = name or f"P({len(self.universe)})"

    def size(self):
        return 1 << len(self.universe)

    def _enumerate(self):
        u = self.universe
        for k in range(len(u) + 1):
            for combo in itertools.combinations(u, k):
                yield frozenset(combo)

    def __contains__(self, a):
        return isinstance(a, frozenset) and a <= self.uset

    def leq(self, a, b):
        return a <= b

    def elements_below(self, x):
        ordered = [u for u in self.universe if u in x]
        return [frozenset(c) for k in range(len(ordered) + 1)
                for c in itertools.combinations(ordered, k)]

    def meet(self, a, b):
        return a & b

    def join(self, a, b):
        return a | b

    @property
    def top(self):
        return self.uset

    @property
    def bottom(self):
        return frozenset()

    def implies(self, a, b):
        return (self.uset - a) | b

    def neg(self, a):
        return self.uset - a


class Downset(Poset):
    """The principal downset of ``x`` in ``parent``; meets and joins are inherited."""

    def __init__(self, parent, x, name=None):
        self.parent = parent
        self.x = x
        self.name = name or f"{parent.name}|{x!r}"

    def leq(self, a, b):
        return self.parent.leq(a, b)

    def size(self):
        if isinstance(self.parent, PowersetPoset):
            return 1 << len(self.x)
        return len(self.elements)

    @cached_property
    def elements(self):
        if isinstance(self.parent, PowersetPoset) and (1 << len(self.x)) > ENUM_CAP:
            raise ProbeTooLarge(f"{self.name}: too many elements", 1 << len(self.x))
        return tuple(self.parent.elements_below(self.x))

    def __contains__(self, a):
        return a in self.parent and self.parent.leq(a, self.x)

    @property
    def known_kinds(self):
        return self.parent.known_kinds if isinstance(self.parent, PowersetPoset) else frozenset()

    def implies(self, a, b):
        if isinstance(self.parent, PowersetPoset):
            return (self.x - a) | b
        return super().implies(a, b)

    def neg(self, a):
        if isinstance(self.parent, PowersetPoset):
            return self.x - a
        return super().neg(a)

    def elements_below(self, y):
        return self.parent.elements_below(y)

    def meet(self, a, b):
        return self.parent.meet(a, b)

    def join(self, a, b):
        return self.parent.join(a, b)

    @property
    def top(self):
        return self.x

    @property
    def bottom(self):
        return self.parent.bottom


class SubPoset(Poset):
    """An arbitrary subset of ``parent`` with the induced order."""

    def __init__(self, parent, elements, name=None):
        self.parent = parent
        self._elements = tuple(elements)
        self.name = name or f"sub({parent.name})"

    def _enumerate(self):
        return self._elements

    def size(self):
        return len(self._elements)

    def leq(self, a, b):
        return self.parent.leq(a, b)


class MonotoneMap:
    """A map between posets, given by a function and memoised."""

    def __init__(self, source, target, fn, name="map"):
        self.source = source
        self.target = target
        self.fn = fn
        self.name = name
        self._memo = {}

    def __call__(self, a):
        try:
            return self._memo[a]
        except KeyError:
            v = self._memo[a] = self.fn(a)
            return v
        except TypeError:
            return self.fn(a)

    @property
    def table(self):
        return {a: self(a) for a in self.source.elements}

    def then(self, other):
        """``other`` after ``self``."""
        return MonotoneMap(self.source, other.target, lambda a: other(self(a)),
                           f"{other.name}.{self.name}")

    def agrees_with(self, other, elements=None):
        for a in elements if elements is not None else self.source.elements:
            if not self.target.eq(self(a), other(a)):
                return a
        return None

    @classmethod
    def identity(cls, poset):
        return cls(poset, poset, lambda a: a, "id")


def validate_monotone(m):
    src = m.source
    for a in src.elements:
        v = m(a)
        if v not in m.target:
            raise NotMonotone(f"{m.name}: image of {a!r} lies outside the target", a)
    pts = sweep(src)
    for a in pts:
        for b in pts:
            if src.leq(a, b) and not m.target.leq(m(a), m(b)):
                raise NotMonotone(f"{m.name} is not monotone at {a!r} <= {b!r}", (a, b))
    return m


def validate_poset(elements, leq_pairs, name="poset"):
    elements = tuple(elements)
    known = set(elements)
    rel = set()
    for a, b in leq_pairs:
        if a not in known or b not in known:
            raise ReflexivityViolation(f"pair ({a!r}, {b!r}) names an unknown element", (a, b))
        rel.add((a, b))
    for a in elements:
        if (a, a) not in rel:
            raise ReflexivityViolation(f"{a!r} is not below itself", a)
    for a, b in rel:
        if a != b and (b, a) in rel:
            raise AntisymmetryViolation(f"{a!r} and {b!r} are distinct but mutually below", (a, b))
    for a, b in rel:
        for c in elements:
            if (b, c) in rel and (a, c) not in rel:
                raise TransitivityViolation(f"{a!r} <= {b!r} <= {c!r} but not {a!r} <= {c!r}",
                                            (a, b, c))
    return FinitePoset(elements, rel, name)


@dataclass
class LatticeCertificate:
    kinds: frozenset
    meet: dict = field(default_factory=dict)
    join: dict = field(default_factory=dict)
    top: object = None
    bottom: object = None
    implication: dict = field(default_factory=dict)
    negation: dict = field(default_factory=dict)
    failures: dict = field(default_factory=dict)

    def has(self, kind):
        return kind in self.kinds


def lattice_ops(P):
    """Brute-force meets, joins, top and bottom, read off the order alone."""
    ix = OrderIndex(P.elements, P.leq)
    els = ix.elements
    n = len(els)
    kinds = set()
    failures = {}
    meet, join = {}, {}
    meets_ok = joins_ok = True
    for i in range(n):
        for j in range(n):
            m = ix.glb(i, j)
            if m is None:
                if meets_ok:
                    failures["meets"] = (els[i], els[j])
                meets_ok = False
            else:
                meet[els[i], els[j]] = els[m]
            k = ix.lub(i, j)
            if k is None:
                if joins_ok:
                    failures["joins"] = (els[i], els[j])
                joins_ok = False
            else:
                join[els[i], els[j]] = els[k]
    t = ix.greatest(ix.full)
    b = ix.least(ix.full)
    if meets_ok:
        kinds.add("meets")
    if joins_ok:
        kinds.add("joins")
    if t is not None:
        kinds.add("top")
    if b is not None:
        kinds.add("bottom")
    cert = LatticeCertificate(frozenset(), meet, join,
                              None if t is None else els[t],
                              None if b is None else els[b], failures=failures)
    if meets_ok and joins_ok:
        dist = True
        for x in els:
            for y in els:
                for z in els:
                    if meet[x, join[y, z]] != join[meet[x, y], meet[x, z]]:
                        dist = False
                        failures["distributive"] = (x, y, z)
                        break
                if not dist:
                    break
            if not dist:
                break
        if dist:
            kinds.add("distributive")
    if meets_ok and t is not None:
        imp = _implications(ix, meet)
        if imp is not None:
            kinds.add("implication")
            cert.implication = imp
            if "bottom" in kinds:
                bot = els[b]
                cert.negation = {a: imp[a, bot] for a in els}
                if "joins" in kinds:
                    kinds.add("heyting")
                    if all(cert.negation[cert.negation[a]] == a for a in els):
                        kinds.add("boolean")
        else:
            failures.setdefault("implication", None)
        if "bottom" in kinds:
            pc = pseudo_complements(P, ix, meet, els[b])
            if pc is not None:
                kinds.add("pseudo_complement")
                if not cert.negation:
                    cert.negation = pc
        if star_autonomous_negation(P, ix=ix, meet=meet) is not None:
            kinds.add("star_autonomous")
    cert.kinds = frozenset(kinds)
    return cert


def _implications(ix, meet):
    els = ix.elements
    out = {}
    for a in els:
        for b in els:
            mask = 0
            for ci, c in enumerate(els):
                if ix.down[ix.pos[b]] >> ix.pos[meet[a, c]] & 1:
                    mask |= 1 << ci
            g = ix.greatest(mask)
            if g is None:
                return None
            out[a, b] = els[g]
    return out


def heyting_ops(P):
    """Relative pseudo-complements by exhaustive search; raises if any is missing."""
    cert = lattice_ops(P)
    if not (cert.has("meets") and cert.has("top")):
        raise NotAHeytingAlgebra("finite meets and a top element are required",
                                 cert.failures.get("meets"))
    if not cert.has("implication"):
        ix = OrderIndex(P.elements, P.leq)
        for a in ix.elements:
            for b in ix.elements:
                mask = 0
                for ci, c in enumerate(ix.elements):
                    if P.leq(cert.meet[a, c], b):
                        mask |= 1 << ci
                if ix.greatest(mask) is None:
                    raise NotAHeytingAlgebra(f"no relative pseudo-complement {a!r} -> {b!r}",
                                             (a, b))
    return cert


def pseudo_complements(P, ix=None, meet=None, bottom=None):
    """Table a -> max{b | a & b = bottom}, or None when some maximum is missing."""
    if ix is None:
        cert = lattice_ops(P)
        if not (cert.has("meets") and cert.has("bottom")):
            return None
        ix = OrderIndex(P.elements, P.leq)
        meet, bottom = cert.meet, cert.bottom
    out = {}
    for a in ix.elements:
        mask = 0
        for ci, c in enumerate(ix.elements):
            if meet[a, c] == bottom:
                mask |= 1 << ci
        g = ix.greatest(mask)
        if g is None:
            return None
        out[a] = ix.elements[g]
    return out


def check_star_negation(P, neg, meet):
    """Involution plus the swap law a & b <= ~c  iff  a <= ~(b & c)."""
    els = P.elements
    for a in els:
        if neg[neg[a]] != a:
            return ("involution", a)
    for a in els:
        for b in els:
            for c in els:
                if P.leq(meet[a, b], neg[c]) != P.leq(a, neg[meet[b, c]]):
                    return ("swap", (a, b, c))
    return None


def star_autonomous_negation(P, neg=None, ix=None, meet=None):
    """Check a supplied negation table, or search for one.

    Any such negation is c -> z relative to z = ~top, so the search runs over z.
    """
    if meet is None:
        cert = lattice_ops(P)
        if not cert.has("meets"):
            return None
        meet = cert.meet
    if ix is None:
        ix = OrderIndex(P.elements, P.leq)
    if neg is not None:
        return neg if check_star_negation(P, neg, meet) is None else None
    els = ix.elements
    for z in els:
        cand = {}
        for c in els:
            mask = 0
            for bi, b in enumerate(els):
                if P.leq(meet[b, c], z):
                    mask |= 1 << bi
            g = ix.greatest(mask)
            if g is None:
                break
            cand[c] = els[g]
        else:
            if check_star_negation(P, cand, meet) is None:
                return cand
    return None


@dataclass
class Adjoints:
    left: MonotoneMap | None
    right: MonotoneMap | None
    left_failure: object = None
    right_failure: object = None


def adjoints(f):
    """Left and right adjoints of a monotone map by exhaustive Galois search."""
    A, B = f.source, f.target
    ix = OrderIndex(A.elements, A.leq)
    images = [f(a) for a in ix.elements]
    left, right = {}, {}
    lfail = rfail = None
    for b in B.elements:
        up_mask = 0
        down_mask = 0
        for i, fa in enumerate(images):
            if B.leq(b, fa):
                up_mask |= 1 << i
            if B.leq(fa, b):
                down_mask |= 1 << i
        m = ix.least(up_mask)
        if m is None:
            lfail = lfail if lfail is not None else b
        else:
            left[b] = ix.elements[m]
        m = ix.greatest(down_mask)
        if m is None:
            rfail = rfail if rfail is not None else b
        else:
            right[b] = ix.elements[m]
    L = None if lfail is not None else MonotoneMap(B, A, left.__getitem__, f"left({f.name})")
    R = None if rfail is not None else MonotoneMap(B, A, right.__getitem__, f"right({f.name})")
    for adj in (L, R):
        if adj is not None:
            validate_monotone(adj)
    if L is not None:
        for b in B.elements:
            for a in A.elements:
                if A.leq(L(b), a) != B.leq(b, f(a)):
                    raise NotAnAdjoint("left adjoint search produced a non-adjoint", (b, a))
    if R is not None:
        for b in B.elements:
            for a in A.elements:
                if A.leq(a, R(b)) != B.leq(f(a), b):
                    raise NotAnAdjoint("right adjoint search produced a non-adjoint", (b, a))
    return Adjoints(L, R, lfail, rfail)


@dataclass
class DownsetQuotient:
    downset: Poset
    quotient: Poset
    to_quotient: MonotoneMap
    from_quotient: MonotoneMap


def downset_and_quotient(P, x):
    """P restricted below x, and P modulo a ~ b iff x & a = x & b, with the iso between."""
    down = Downset(P, x)
    classes = {}
    for a in P.elements:
        classes.setdefault(P.meet(x, a), []).append(a)
    cls_of = {}
    for members in classes.values():
        c = frozenset(members)
        for a in members:
            cls_of[a] = c
    reps = {c: P.meet(x, next(iter(c))) for c in set(cls_of.values())}
    order = [cls_of[a] for a in P.elements]
    seen = []
    for c in order:
        if c not in seen:
            seen.append(c)

    def qleq(c, d):
        return P.leq(P.meet(x, next(iter(c))), next(iter(d)))

    Q = FinitePoset.from_leq(seen, qleq, name=f"{P.name}/~{x!r}")
    to_q = MonotoneMap(down, Q, lambda a: cls_of[a], "class")
    from_q = MonotoneMap(Q, down, lambda c: reps[c], "meet_with_x")
    validate_monotone(to_q)
    validate_monotone(from_q)
    for a in down.elements:
        if from_q(to_q(a)) != a:
            raise NotAnAdjoint("quotient round trip failed on the downset", a)
    for c in Q.elements:
        if to_q(from_q(c)) != c:
            raise NotAnAdjoint("quotient round trip failed on a class", c)
    return DownsetQuotient(down, Q, to_q, from_q)


def chain(n, name=None):
    els = tuple(str(i) for i in range(n))
    return FinitePoset.from_leq(els, lambda a, b: int(a) <= int(b), name or f"chain{n}")


def m3():
    return FinitePoset.from_covers(("0", "a", "b", "c", "1"),
                                   [("0", "a"), ("0", "b"), ("0", "c"),
                                    ("a", "1"), ("b", "1"), ("c", "1")], "M3")


def n5():
    return FinitePoset.from_covers(("0", "a", "b", "c", "1"),
                                   [("0", "a"), ("a", "b"), ("b", "1"),
                                    ("0", "c"), ("c", "1")], "N5")


class Oracle:
    """Order-only answers (meets, joins, implications) for an enumerable poset."""

    def __init__(self, P):
        self.P = P
        self.ix = OrderIndex(P.elements, P.leq)
        self._memo = {}

    def _pick(self, m):
        return None if m is None else self.ix.elements[m]

    def meet(self, a, b):
        key = ("m", a, b)
        if key not in self._memo:
            ix = self.ix
            self._memo[key] = self._pick(ix.glb(ix.pos[a], ix.pos[b]))
        return self._memo[key]

    def join(self, a, b):
        key = ("j", a, b)
        if key not in self._memo:
            ix = self.ix
            self._memo[key] = self._pick(ix.lub(ix.pos[a], ix.pos[b]))
        return self._memo[key]

    @cached_property
    def top(self):
        return self._pick(self.ix.greatest(self.ix.full))

    @cached_property
    def bottom(self):
        return self._pick(self.ix.least(self.ix.full))

    def implies(self, a, b):
        key = ("i", a, b)
        if key not in self._memo:
            mask = 0
            for c in self.ix.elements:
                m = self.meet(a, c)
                if m is None:
                    self._memo[key] = None
                    return None
                if self.P.leq(m, b):
                    mask |= 1 << self.ix.pos[c]
            self._memo[key] = self._pick(self.ix.greatest(mask))
        return self._memo[key]

    def neg(self, a):
        if self.bottom is None:
            return None
        return self.implies(a, self.bottom)


def oracle(P):
    o = getattr(P, "_oracle", None)
    if o is None:
        o = Oracle(P)
        P._oracle = o
    return o


class _OpTable:
    """Dict-like view of an operation, so formula structure can stand in for tables."""

    def __init__(self, fn, arity=2):
        self.fn = fn
        self.arity = arity

    def __getitem__(self, key):
        return self.fn(*key) if self.arity == 2 else self.fn(key)


def formula_certificate(P):
    """Certificate read from structure P guarantees by construction (no search)."""
    kinds = P.known_kinds
    cert = LatticeCertificate(frozenset(kinds), _OpTable(P.meet), _OpTable(P.join),
                              P.top, P.bottom)
    if "implication" in kinds:
        cert.implication = _OpTable(P.implies)
    if "pseudo_complement" in kinds or "boolean" in kinds:
        cert.negation = _OpTable(P.neg, 1)
    return cert


def certificate(P):
    """Brute force on small posets, construction-level structure on large ones, else None."""
    if P.searchable:
        return lattice_ops(P)
    if P.known_kinds:
        return formula_certificate(P)
    return None


def sweep(P, limit=PAIR_BUDGET):
    """Elements to sweep in pairwise checks: all of them, or a seeded sample."""
    import random

    els = P.elements
    k = int(limit ** 0.5)
    if len(els) <= k:
        return els
    return tuple(random.Random(P.name + repr(len(els))).sample(list(els), k))
