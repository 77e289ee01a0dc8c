"""A small line-oriented text format for posets, categories, doctrines, morphisms,
comonads and built-in doctrines. See docs/format.md for the grammar."""

from __future__ import annotations

import ast
import re
from dataclasses import dataclass, field

from .category import FiniteCategory, Functor, semilattice_to_category
from .comonad import IndexedPosetComonad
from .doctrine import DoctrineMorphism, tabulated_doctrine
from .errors import DoctrineError, DuplicateName, SpecSyntaxError, UnresolvedReference
from .order import FinitePoset, MonotoneMap, validate_poset

KEYS = {
    "poset": {"elements", "leq", "covers"},
    "category": {"objects", "arrow", "identity", "compose", "terminal", "product", "semilattice"},
    "doctrine": {"base", "fiber", "reindex"},
    "morphism": {"source", "target", "object", "arrow", "component"},
    "comonad": {"doctrine", "reader", "object", "arrow", "comult", "counit", "lift"},
}
BUILTINS = {"powerset": {"probes"}, "lt": {"atoms", "axioms"}}


@dataclass(frozen=True)
class Tok:
    text: str
    line: int
    col: int


@dataclass
class Entry:
    key: str
    args: tuple
    line: int = field(default=0, compare=False)

    def __repr__(self):
        return f"Entry({self.key} {' '.join(self.args)})"


@dataclass
class Block:
    kind: str
    name: str
    entries: list
    params: dict = field(default_factory=dict)
    line: int = field(default=0, compare=False)


@dataclass
class SpecDocument:
    blocks: list = field(default_factory=list)

    def __getitem__(self, name):
        for b in self.blocks:
            if b.name == name:
                return b
        raise UnresolvedReference(f"no block named {name!r}", name)

    def names(self, kind=None):
        return [b.name for b in self.blocks if kind is None or b.kind == kind]


def _tokens(text, lineno):
    out = []
    pos = 0
    while pos < len(text):
        if text[pos].isspace():
            pos += 1
            continue
        if text[pos] == "#":
            break
        start = pos
        if text[pos] == '"':
            pos += 1
            while pos < len(text) and text[pos] != '"':
                pos += 2 if text[pos] == "\\" else 1
            if pos >= len(text):
                raise SpecSyntaxError("unterminated string", lineno, start + 1)
            pos += 1
        else:
            depth = 0
            while pos < len(text) and (depth > 0 or not text[pos].isspace()):
                if text[pos] == "[":
                    depth += 1
                elif text[pos] == "]":
                    depth -= 1
                    if depth < 0:
                        raise SpecSyntaxError("unbalanced ']'", lineno, pos + 1)
                elif text[pos] == '"':
                    quote = pos
                    pos += 1
                    while pos < len(text) and text[pos] != '"':
                        pos += 2 if text[pos] == "\\" else 1
                    if pos >= len(text):
                        raise SpecSyntaxError("unterminated string", lineno, quote + 1)
                pos += 1
            if depth:
                raise SpecSyntaxError("unbalanced '['", lineno, start + 1)
        out.append(Tok(text[start:pos], lineno, start + 1))
    return out


_NAME = re.compile(r"^[A-Za-z_][\w.'-]*$")


def parse_spec_file(source):
    """Parse text (or a path ending in .spec) into a SpecDocument."""
    if isinstance(source, str) and "\n" not in source and source.endswith(".spec"):
        with open(source, encoding="utf-8") as fh:
            source = fh.read()
    doc = SpecDocument()
    seen = {}
    current = None
    for lineno, raw in enumerate(source.splitlines(), 1):
        toks = _tokens(raw, lineno)
        if not toks:
            continue
        head = toks[0]
        if current is None:
            if head.text == "builtin":
                blk = _parse_builtin(toks)
                _add(doc, seen, blk, head)
                continue
            if head.text not in KEYS:
                raise SpecSyntaxError(f"unknown block kind {head.text!r}", head.line, head.col)
            if len(toks) != 2:
                col = toks[2].col if len(toks) > 2 else head.col + len(head.text)
                raise SpecSyntaxError(f"expected '{head.text} NAME'", lineno, col)
            name = toks[1]
            if not _NAME.match(name.text):
                raise SpecSyntaxError(f"bad block name {name.text!r}", name.line, name.col)
            current = Block(head.text, name.text, [], line=lineno)
            current_head = head
            continue
        if head.text == "end":
            if len(toks) != 1:
                raise SpecSyntaxError("unexpected text after 'end'", lineno, toks[1].col)
            _add(doc, seen, current, current_head)
            current = None
            continue
        if head.text not in KEYS[current.kind]:
            raise SpecSyntaxError(f"unknown key {head.text!r} in {current.kind} block",
                                  head.line, head.col)
        current.entries.append(Entry(head.text, tuple(t.text for t in toks[1:]), lineno))
    if current is not None:
        raise SpecSyntaxError(f"block {current.name!r} is missing 'end'", current.line, 1)
    return doc


def _add(doc, seen, blk, tok):
    if blk.name in seen:
        raise DuplicateName(f"{blk.name!r} defined on lines {seen[blk.name]} and {tok.line}",
                            blk.name)
    seen[blk.name] = tok.line
    doc.blocks.append(blk)


def _parse_builtin(toks):
    head = toks[0]
    if len(toks) < 2:
        raise SpecSyntaxError("expected 'builtin [NAME] KIND key=value ...'", head.line, head.col)
    if toks[1].text in BUILTINS and not (len(toks) > 2 and toks[2].text in BUILTINS):
        name, kind, rest = toks[1].text, toks[1].text, toks[2:]
    else:
        if len(toks) < 3 or toks[2].text not in BUILTINS:
            t = toks[2] if len(toks) > 2 else toks[1]
            raise SpecSyntaxError(f"unknown builtin kind; expected one of {sorted(BUILTINS)}",
                                  t.line, t.col)
        name, kind, rest = toks[1].text, toks[2].text, toks[3:]
    params = {}
    for t in rest:
        if "=" not in t.text:
            raise SpecSyntaxError(f"expected key=value, got {t.text!r}", t.line, t.col)
        k, v = t.text.split("=", 1)
        if k not in BUILTINS[kind]:
            raise SpecSyntaxError(f"unknown key {k!r} for builtin {kind}", t.line, t.col)
        if k in params:
            raise SpecSyntaxError(f"repeated key {k!r}", t.line, t.col)
        params[k] = v
    return Block("builtin", name, [Entry("kind", (kind,), head.line)], params, head.line)


def print_spec(doc):
    """Canonical text; parse_spec_file(print_spec(d)) == d."""
    lines = []
    for b in doc.blocks:
        if b.kind == "builtin":
            kind = b.entries[0].args[0]
            parts = ["builtin", b.name, kind] + [f"{k}={b.params[k]}" for k in sorted(b.params)]
            lines.append(" ".join(parts))
        else:
            lines.append(f"{b.kind} {b.name}")
            for e in b.entries:
                lines.append("  " + " ".join((e.key,) + e.args))
            lines.append("end")
        lines.append("")
    return "\n".join(lines)


# ---------------------------------------------------------------------------
# building core objects


def _pair(text, sep, entry):
    if sep not in text:
        raise SpecSyntaxError(f"expected x{sep}y, got {text!r}", entry.line, 1)
    a, b = text.rsplit(sep, 1) if sep == ":" else text.split(sep, 1)
    return a, b


def _literal(text):
    try:
        return ast.literal_eval(text)
    except (ValueError, SyntaxError):
        inner = text.strip()
        if inner.startswith("[") and inner.endswith("]"):
            inner = inner[1:-1]
        return [p.strip() for p in inner.split(",") if p.strip()]


def _freeze(x):
    if isinstance(x, list):
        return tuple(_freeze(y) for y in x)
    return x


class Built:
    """Core objects built from a document, by name, resolved on demand."""

    def __init__(self, doc):
        self.doc = doc
        self.objects = {}
        self._building = set()

    def get(self, name, kind=None):
        if name in self.objects:
            obj = self.objects[name]
        else:
            blk = self.doc[name]
            if name in self._building:
                raise UnresolvedReference(f"cyclic reference through {name!r}", name)
            self._building.add(name)
            try:
                obj = self.objects[name] = getattr(self, f"_build_{blk.kind}")(blk)
            finally:
                self._building.discard(name)
        if kind is not None:
            actual = self.doc[name].kind
            ok = actual == kind or (kind == "doctrine" and actual == "builtin")
            if not ok:
                raise UnresolvedReference(f"{name!r} is a {actual}, not a {kind}", name)
        return obj

    def all(self):
        return {b.name: self.get(b.name) for b in self.doc.blocks}

    def _one(self, blk, key, required=True):
        es = [e for e in blk.entries if e.key == key]
        if len(es) > 1:
            raise SpecSyntaxError(f"repeated key {key!r}", es[1].line, 1)
        if not es:
            if required:
                raise SpecSyntaxError(f"{blk.kind} {blk.name!r} needs {key!r}", blk.line, 1)
            return None
        return es[0]

    def _build_poset(self, blk):
        els = []
        for e in blk.entries:
            if e.key == "elements":
                els.extend(e.args)
        if len(set(els)) != len(els):
            dup = next(x for x in els if els.count(x) > 1)
            raise DuplicateName(f"element {dup!r} repeated in poset {blk.name!r}", dup)
        leq = {(x, x) for x in els}
        covers = []
        for e in blk.entries:
            for t in e.args if e.key in ("leq", "covers") else ():
                a, b = _pair(t, "<=" if e.key == "leq" else "<", e)
                for x in (a, b):
                    if x not in els:
                        raise UnresolvedReference(f"unknown element {x!r} in {blk.name!r}", x)
                if e.key == "leq":
                    leq.add((a, b))
                else:
                    covers.append((a, b))
        if covers:
            # covers are closed transitively; explicit leq pairs are taken as given
            closure = set(leq) | set(covers)
            changed = True
            while changed:
                changed = False
                for (a, b) in list(closure):
                    for (c, d) in list(closure):
                        if b == c and (a, d) not in closure:
                            closure.add((a, d))
                            changed = True
            leq = closure
        return validate_poset(els, leq, blk.name)

    def _build_category(self, blk):
        sl = self._one(blk, "semilattice", required=False)
        if sl is not None:
            if len(blk.entries) != 1:
                raise SpecSyntaxError("'semilattice' excludes other keys", blk.line, 1)
            return semilattice_to_category(self.get(sl.args[0], "poset"), blk.name)
        objs = [x for e in blk.entries if e.key == "objects" for x in e.args]
        if len(set(objs)) != len(objs):
            raise DuplicateName(f"object repeated in category {blk.name!r}", objs)
        arrows, ids, comp, prods = {}, {}, {}, {}

        def obj(x):
            if x not in objs:
                raise UnresolvedReference(f"unknown object {x!r} in {blk.name!r}", x)
            return x

        def arr(f):
            if f not in arrows:
                raise UnresolvedReference(f"unknown arrow {f!r} in {blk.name!r}", f)
            return f

        terminal = None
        for e in blk.entries:
            if e.key == "arrow":
                self._arity(e, 3)
                if e.args[0] in arrows:
                    raise DuplicateName(f"arrow {e.args[0]!r} repeated", e.args[0])
                arrows[e.args[0]] = (obj(e.args[1]), obj(e.args[2]))
        for e in blk.entries:
            if e.key == "identity":
                self._arity(e, 2)
                ids[obj(e.args[0])] = arr(e.args[1])
            elif e.key == "compose":
                self._arity(e, 3)
                comp[arr(e.args[0]), arr(e.args[1])] = arr(e.args[2])
            elif e.key == "terminal":
                self._arity(e, 1)
                terminal = obj(e.args[0])
            elif e.key == "product":
                self._arity(e, 5)
                a, b, p, p1, p2 = e.args
                prods[obj(a), obj(b)] = (obj(p), arr(p1), arr(p2))
        for x in objs:
            if x not in ids:
                raise UnresolvedReference(f"object {x!r} has no identity", x)
        return FiniteCategory(blk.name, objs, arrows, comp, ids, terminal, prods)

    @staticmethod
    def _arity(e, n):
        if len(e.args) != n:
            raise SpecSyntaxError(f"{e.key!r} takes {n} arguments, got {len(e.args)}", e.line, 1)

    def _table(self, e, start, S, T):
        out = {}
        for t in e.args[start:]:
            x, y = _pair(t, ":", e)
            if x not in S or y not in T:
                raise UnresolvedReference(f"unknown element in {t!r}", t)
            if x in out:
                raise DuplicateName(f"element {x!r} mapped twice", x)
            out[x] = y
        missing = [x for x in S.elements if x not in out]
        if missing:
            raise SpecSyntaxError(f"table for {e.args[0]!r} misses {missing}", e.line, 1)
        return out

    def _build_doctrine(self, blk):
        C = self.get(self._one(blk, "base").args[0], "category")
        fibers = {}
        for e in blk.entries:
            if e.key == "fiber":
                self._arity(e, 2)
                a = e.args[0]
                if a not in C.objects():
                    raise UnresolvedReference(f"unknown object {a!r}", a)
                fibers[a] = self.get(e.args[1], "poset")
        for a in C.objects():
            if a not in fibers:
                raise SpecSyntaxError(f"no fiber for object {a!r}", blk.line, 1)
        tables = {}
        for e in blk.entries:
            if e.key == "reindex":
                f = e.args[0] if e.args else None
                if f not in C.arrows():
                    raise UnresolvedReference(f"unknown arrow {f!r}", f)
                tables[f] = self._table(e, 1, fibers[C.cod(f)], fibers[C.dom(f)])
        return tabulated_doctrine(C, fibers, tables, blk.name)

    def _build_morphism(self, blk):
        P = self.get(self._one(blk, "source").args[0], "doctrine")
        R = self.get(self._one(blk, "target").args[0], "doctrine")
        C, D = P.base, R.base
        om, am, comps = {}, {}, {}
        for e in blk.entries:
            if e.key == "object":
                self._arity(e, 2)
                om[e.args[0]] = e.args[1]
            elif e.key == "arrow":
                self._arity(e, 2)
                am[e.args[0]] = e.args[1]
        for a in C.objects():
            om.setdefault(a, a)
        for a in C.objects():
            am.setdefault(C.identity(a), D.identity(om[a]))
        F = Functor(C, D, om.__getitem__, lambda f: am[f], blk.name)
        for e in blk.entries:
            if e.key == "component":
                a = e.args[0]
                comps[a] = self._table(e, 1, P.fiber(a), R.fiber(om[a]))
        for f in C.arrows():
            if f not in am:
                raise SpecSyntaxError(f"no image for arrow {f!r}", blk.line, 1)
        return DoctrineMorphism(P, R, F, lambda a: MonotoneMap(P.fiber(a), R.fiber(om[a]),
                                                               comps[a].__getitem__),
                                blk.name)

    def _build_comonad(self, blk):
        from .reader import build_reader_comonad

        P = self.get(self._one(blk, "doctrine").args[0], "doctrine")
        rd = self._one(blk, "reader", required=False)
        if rd is not None:
            X = read_object(P, rd.args[0])
            phi = read_element(P, X, rd.args[1]) if len(rd.args) > 1 else None
            return build_reader_comonad(P, X, phi, validate=False)
        B = P.base
        om, am, gam, eps, lifts = {}, {}, {}, {}, {}
        for e in blk.entries:
            if e.key == "object":
                om[e.args[0]] = e.args[1]
            elif e.key == "arrow":
                am[e.args[0]] = e.args[1]
            elif e.key == "comult":
                gam[e.args[0]] = e.args[1]
            elif e.key == "counit":
                eps[e.args[0]] = e.args[1]
        for a in B.objects():
            am.setdefault(B.identity(a), B.identity(om[a]))
        for e in blk.entries:
            if e.key == "lift":
                a = e.args[0]
                lifts[a] = self._table(e, 1, P.fiber(a), P.fiber(om[a]))
        K = Functor(B, B, om.__getitem__, am.__getitem__, f"K{blk.name}")
        return IndexedPosetComonad(
            P, K, lambda a: MonotoneMap(P.fiber(a), P.fiber(om[a]), lifts[a].__getitem__),
            gam.__getitem__, eps.__getitem__, blk.name)

    def _build_builtin(self, blk):
        from .models import DEFAULT_PROBES, propositional_lt, powerset_doctrine

        kind = blk.entries[0].args[0]
        if kind == "powerset":
            raw = blk.params.get("probes")
            probes = DEFAULT_PROBES if raw is None else [tuple(_freeze(p)) for p in _literal(raw)]
            P = powerset_doctrine(probes, name=blk.name)
        else:
            atoms = _literal(blk.params.get("atoms", "[]"))
            axioms = _literal(blk.params.get("axioms", "[]"))
            P = propositional_lt([str(a) for a in atoms], [str(a) for a in axioms])
            P.name = blk.name
        P.builtin = kind
        return P


def build(doc):
    return Built(doc)


# ---------------------------------------------------------------------------
# reading and printing objects and elements of built doctrines


def read_object(P, text):
    kind = getattr(P, "builtin", None)
    if kind == "powerset":
        val = _literal(text)
        if not isinstance(val, (list, tuple)):
            raise UnresolvedReference(f"expected a finite set like [0,1], got {text!r}", text)
        return tuple(_freeze(v) for v in val)
    if text not in P.base.objects():
        raise UnresolvedReference(f"unknown object {text!r}", text)
    return text


def read_element(P, a, text):
    kind = getattr(P, "builtin", None)
    if kind == "powerset":
        val = _literal(text)
        el = frozenset(_freeze(v) for v in val)
        if not el <= frozenset(a):
            raise UnresolvedReference(f"{text!r} is not a subset of {list(a)!r}", text)
        return el
    if kind == "lt":
        if text.startswith('"') and text.endswith('"'):
            text = ast.literal_eval(text)
        return P.denote(text)
    if text not in P.fiber(a):
        raise UnresolvedReference(f"unknown element {text!r} of {P.name}({a})", text)
    return text


def show(x):
    """Deterministic text for elements, objects and arrows."""
    if isinstance(x, frozenset):
        return "{" + ",".join(sorted(show(y) for y in x)) + "}"
    if isinstance(x, tuple):
        return "(" + ",".join(show(y) for y in x) + ")"
    if isinstance(x, str):
        return x
    return repr(x)
