"""Finite sets and functions, explored lazily from a family of probe sets.

Objects are tuples of hashable elements. The terminal object is ``("*",)`` and
products with it are strict: ``t x A = A`` with the second projection the
identity, and symmetrically. Other products are tuples of pairs.
"""

from __future__ import annotations

import itertools
import random

from .category import Category, Product
from .errors import CompositionUndefined, ProbeTooLarge

TERMINAL = ("*",)


class Fn:
    __slots__ = ("dom", "cod", "images", "_map", "_hash")

    def __init__(self, dom, cod, images):
        self.dom = tuple(dom)
        self.cod = tuple(cod)
        self.images = tuple(images)
        self._map = None
        self._hash = hash((self.dom, self.cod, self.images))

    def __call__(self, x):
        if self._map is None:
            self._map = dict(zip(self.dom, self.images))
        return self._map[x]

    def __eq__(self, other):
        return (isinstance(other, Fn) and self._hash == other._hash and self.dom == other.dom
                and self.cod == other.cod and self.images == other.images)

    def __hash__(self):
        return self._hash

    def __repr__(self):
        pairs = ", ".join(f"{x!r}->{y!r}" for x, y in zip(self.dom, self.images))
        return f"Fn({pairs})"


def set_label(a):
    if a == TERMINAL:
        return "1"
    return "{" + ",".join(map(str, a)) + "}"


class FinSet(Category):
    lazy = True
    has_products = True

    def __init__(self, probes, hom_cap=4096, sample=8, name="FinSet"):
        self.probes = [tuple(p) for p in probes]
        self.hom_cap = hom_cap
        self.sample = sample
        self.name = name
        self._products = {}

    def objects(self):
        return list(self.probes)

    def hom(self, a, b):
        n = len(b) ** len(a)
        if n > self.hom_cap:
            raise ProbeTooLarge(f"|hom| = {n} exceeds {self.hom_cap}", (a, b))
        return [Fn(a, b, imgs) for imgs in itertools.product(b, repeat=len(a))]

    def sample_hom(self, a, b, k=None):
        """All of hom(a, b) when small, else constants plus a seeded sample."""
        k = self.sample if k is None else k
        n = len(b) ** len(a)
        if n <= k + len(b):
            return self.hom(a, b)
        out = [Fn(a, b, (y,) * len(a)) for y in b]
        rng = random.Random(repr((a, b)))
        seen = set(out)
        while len(out) < k + len(b):
            f = Fn(a, b, tuple(rng.choice(b) for _ in a))
            if f not in seen:
                seen.add(f)
                out.append(f)
        return out

    def arrows(self):
        out = []
        for a in self.probes:
            for b in self.probes:
                try:
                    out.extend(self.hom(a, b))
                except ProbeTooLarge:
                    out.extend(self.sample_hom(a, b))
        return out

    def dom(self, f):
        return f.dom

    def cod(self, f):
        return f.cod

    def identity(self, a):
        return Fn(a, a, a)

    def compose(self, g, f):
        if f.cod != g.dom:
            raise CompositionUndefined("function composition type mismatch", (g, f))
        return Fn(f.dom, g.cod, (g(f(x)) for x in f.dom))

    def inverse(self, f):
        if len(set(f.images)) != len(f.dom) or len(f.dom) != len(f.cod):
            return None
        back = dict(zip(f.images, f.dom))
        return Fn(f.cod, f.dom, (back[y] for y in f.cod))

    def terminal(self):
        return TERMINAL

    def bang(self, a):
        return Fn(a, TERMINAL, ("*",) * len(a))

    def product(self, a, b):
        try:
            return self._products[a, b]
        except KeyError:
            p = self._products[a, b] = self._product(a, b)
            return p

    def _product(self, a, b):
        if a == TERMINAL:
            return Product(b, self.bang(b), self.identity(b))
        if b == TERMINAL:
            return Product(a, self.identity(a), self.bang(a))
        obj = tuple((x, y) for x in a for y in b)
        return Product(obj, Fn(obj, a, (p[0] for p in obj)), Fn(obj, b, (p[1] for p in obj)))

    def pair(self, f, g):
        if f.dom != g.dom:
            raise CompositionUndefined("pairing needs a common domain", (f, g))
        if f.cod == TERMINAL:
            return g
        if g.cod == TERMINAL:
            return f
        obj = self.prod(f.cod, g.cod)
        return Fn(f.dom, obj, ((f(x), g(x)) for x in f.dom))

    def function(self, a, b, fn):
        return Fn(a, b, (fn(x) for x in a))
