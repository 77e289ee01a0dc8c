"""Reference answers computed straight from the definitions, sharing no code with
the package: every quantifier is a loop over all elements."""

import itertools
import random

from doctrines.order import FinitePoset


def closure(n, pairs):
    rel = {(i, i) for i in range(n)} | set(pairs)
    changed = True
    while changed:
        changed = False
        for (a, b), (c, d) in itertools.product(list(rel), list(rel)):
            if b == c and (a, d) not in rel:
                rel.add((a, d))
                changed = True
    return rel


def as_poset(n, rel, name="Q"):
    els = tuple(f"e{i}" for i in range(n))
    return FinitePoset(els, [(els[a], els[b]) for a, b in rel], name)


def all_posets(n):
    """Every naturally labelled poset on n points (each iso type occurs)."""
    cand = [(i, j) for i in range(n) for j in range(i + 1, n)]
    seen = set()
    for mask in range(1 << len(cand)):
        pairs = {cand[k] for k in range(len(cand)) if mask >> k & 1}
        rel = frozenset(closure(n, pairs))
        if rel not in seen:
            seen.add(rel)
            yield as_poset(n, rel, f"Q{n}.{len(seen)}")


def random_poset(rng, n, density=None):
    density = rng.random() if density is None else density
    pairs = [(i, j) for i in range(n) for j in range(i + 1, n) if rng.random() < density / 2]
    return as_poset(n, closure(n, pairs), f"R{n}")


def random_lattice(rng, n):
    """Dedekind-MacNeille completion of a random poset, as a poset of cuts."""
    P = random_poset(rng, max(1, n - 2))
    els = list(P.elements)
    cuts = set()
    for k in range(len(els) + 1):
        for sub in itertools.combinations(els, k):
            ups = [u for u in els if all(P.leq(s, u) for s in sub)]
            lows = frozenset(v for v in els if all(P.leq(v, u) for u in ups))
            cuts.add(lows)
    cuts = sorted(cuts, key=lambda c: (len(c), sorted(c)))
    names = tuple(f"c{i}" for i in range(len(cuts)))
    return FinitePoset.from_leq(names, lambda a, b: cuts[names.index(a)] <= cuts[names.index(b)],
                                f"L{len(cuts)}")


def lower_bounds(P, a, b):
    return [c for c in P.elements if P.leq(c, a) and P.leq(c, b)]


def upper_bounds(P, a, b):
    return [c for c in P.elements if P.leq(a, c) and P.leq(b, c)]


def greatest(P, xs):
    for x in xs:
        if all(P.leq(y, x) for y in xs):
            return x
    return None


def least(P, xs):
    for x in xs:
        if all(P.leq(x, y) for y in xs):
            return x
    return None


def meet(P, a, b):
    return greatest(P, lower_bounds(P, a, b))


def join(P, a, b):
    return least(P, upper_bounds(P, a, b))


def top(P):
    return greatest(P, list(P.elements))


def bottom(P):
    return least(P, list(P.elements))


def is_lattice(P):
    return all(meet(P, a, b) is not None and join(P, a, b) is not None
               for a in P.elements for b in P.elements)


def implies(P, a, b):
    """max{c | a & c <= b}, None when a meet or the maximum is missing."""
    cs = []
    for c in P.elements:
        m = meet(P, a, c)
        if m is None:
            return None
        if P.leq(m, b):
            cs.append(c)
    return greatest(P, cs)


def pseudo_complement(P, a):
    bot = bottom(P)
    cs = []
    for c in P.elements:
        m = meet(P, a, c)
        if m is None:
            return None
        if m == bot:
            cs.append(c)
    return greatest(P, cs)


def is_distributive(P):
    els = P.elements
    return all(meet(P, x, join(P, y, z)) == join(P, meet(P, x, y), meet(P, x, z))
               for x in els for y in els for z in els)


def is_boolean(P):
    """Bounded distributive lattice in which every element has a complement."""
    if not P.elements or not is_lattice(P) or not is_distributive(P):
        return False
    t, b = top(P), bottom(P)
    return all(any(meet(P, a, c) == b and join(P, a, c) == t for c in P.elements)
               for a in P.elements)


def left_adjoint(f, A, B):
    """l(b) = min{a | b <= f a}, or None if some l(b) fails to exist."""
    out = {}
    for b in B.elements:
        x = least(A, [a for a in A.elements if B.leq(b, f(a))])
        if x is None or not all(A.leq(x, a) == B.leq(b, f(a)) for a in A.elements):
            return None
        out[b] = x
    return out


def right_adjoint(f, A, B):
    out = {}
    for b in B.elements:
        x = greatest(A, [a for a in A.elements if B.leq(f(a), b)])
        if x is None or not all(A.leq(a, x) == B.leq(f(a), b) for a in A.elements):
            return None
        out[b] = x
    return out


def random_monotone(rng, A, B, tries=50):
    """Pick images along a linear extension, staying above earlier images."""
    order = sorted(A.elements, key=lambda a: sum(A.leq(x, a) for x in A.elements))
    for _ in range(tries):
        f = {}
        for a in order:
            below = [f[x] for x in f if A.leq(x, a)]
            ok = [y for y in B.elements if all(B.leq(z, y) for z in below)]
            if not ok:
                break
            f[a] = rng.choice(ok)
        else:
            return f
    return None


def seeded_posets(count, lo=6, hi=16, seed=0):
    rng = random.Random(seed)
    return [random_poset(rng, rng.randint(lo, hi)) for _ in range(count)]
