"""Command-line driver. Exit status: 0 all checks pass, 1 a check failed,
2 usage or parse error."""

from __future__ import annotations

import argparse
import re
import sys

from . import models, reader
from .category import validate_category_with_products
from .comonad import build_em_doctrine, build_kleisli_doctrine, factorize_oplax, validate_comonad
from .doctrine import (KINDS, detect_structure, identity_morphism, morphism_mismatch,
                       validate_doctrine, validate_morphism)
from .errors import DoctrineError, DuplicateName, SpecSyntaxError, UnresolvedReference, UsageError
from .specfile import build, parse_spec_file, read_element, read_object, show

DEMOS = ("powerset-collapse", "powerset-XY", "lt-axiom", "distributive-law", "kleisli-roundtrip")


class Report:
    def __init__(self, command):
        self.command = command
        self.rows = []
        self.notes = []
        self.data = []

    def check(self, name, ok, detail=""):
        self.rows.append(("PASS" if ok else "FAIL", name, detail))
        return ok

    def skip(self, name, reason):
        self.rows.append(("SKIP", name, reason))

    def note(self, text):
        self.notes.append(text)

    def kv(self, key, value):
        self.data.append((key, value))

    def error(self, name, exc):
        w = getattr(exc, "witness", None)
        detail = f"{type(exc).__name__}: {exc}"
        if w is not None:
            detail += f" [witness {show_any(w)}]"
        self.check(name, False, detail)

    @property
    def failed(self):
        return any(r[0] == "FAIL" for r in self.rows)

    @property
    def status(self):
        return 1 if self.failed else 0

    def render(self):
        out = [f"command: {self.command}", ""]
        for tag, name, detail in self.rows:
            out.append(f"{tag}  {name}" + (f"  -- {detail}" if detail else ""))
        if self.notes:
            out.append("")
            out.extend(self.notes)
        npass = sum(r[0] == "PASS" for r in self.rows)
        nskip = sum(r[0] == "SKIP" for r in self.rows)
        nfail = sum(r[0] == "FAIL" for r in self.rows)
        out.append("")
        out.append(f"result: {'fail' if self.failed else 'pass'} "
                   f"({npass} passed, {nfail} failed, {nskip} skipped)")
        out.append("")
        out.append("```report")
        out.append(f"command={self.command}")
        for i, (tag, name, _) in enumerate(self.rows, 1):
            out.append(f"check.{i:03d}.{_key(name)}={tag.lower()}")
        for k, v in self.data:
            out.append(f"{_key(k)}={v}")
        out.append(f"status={'fail' if self.failed else 'pass'}")
        out.append(f"exit={self.status}")
        out.append("```")
        return "\n".join(out) + "\n"


def _key(name):
    return re.sub(r"[^A-Za-z0-9_.-]+", "_", name).strip("_").lower()


def show_any(x):
    if isinstance(x, (list, tuple)) and not isinstance(x, str):
        return "(" + ", ".join(show_any(y) for y in x) + ")"
    return show(x)


# ---------------------------------------------------------------------------
# commands on files


def _load(path):
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as e:
        raise UsageError(f"cannot read {path}: {e.strerror}", path) from None
    return build(parse_spec_file(text))


def cmd_validate(args, rep):
    built = _load(args.file)
    for blk in built.doc.blocks:
        name = f"{blk.kind} {blk.name}"
        try:
            obj = built.get(blk.name)
            if blk.kind == "category":
                validate_category_with_products(obj, products=obj.has_products)
            elif blk.kind in ("doctrine", "builtin"):
                validate_doctrine(obj)
            elif blk.kind == "morphism":
                both = obj.source.structure("primary").holds and obj.target.structure("primary").holds
                validate_morphism(obj, preserves=("primary",) if both else ())
            elif blk.kind == "comonad":
                validate_comonad(obj)
            rep.check(name, True)
        except (UnresolvedReference, DuplicateName, SpecSyntaxError):
            raise
        except DoctrineError as e:
            rep.error(name, e)
    rep.kv("blocks", len(built.doc.blocks))


def _doctrine(built, name):
    if name is None:
        raise UsageError("--doctrine is required", None)
    return built.get(name, "doctrine")


def cmd_detect(args, rep):
    built = _load(args.file)
    P = _doctrine(built, args.doctrine)
    kinds = [args.kind] if args.kind else list(KINDS)
    for k in kinds:
        if k not in KINDS:
            raise UsageError(f"unknown kind {k!r}; choose from {', '.join(KINDS)}", k)
    report = detect_structure(P)
    for k in kinds:
        r = report.results[k]
        rep.kv(f"kind.{k}", "holds" if r.holds else "absent")
        line = f"{k:20s} {'holds' if r.holds else 'absent'}"
        if not r.holds and r.reason:
            line += f"  ({r.reason})"
        rep.note(line)
        for name, v in sorted(r.flags.items()):
            rep.kv(f"flag.{k}.{name}", str(v).lower())
        if args.kind:
            rep.check(f"{k} holds", r.holds, r.reason or "")
    if not args.kind:
        rep.check("detection", True)


def _extension(args, built, validate=True):
    P = _doctrine(built, args.doctrine)
    if args.object is None:
        raise UsageError("--object is required", None)
    X = read_object(P, args.object)
    phi = read_element(P, X, args.axiom) if args.axiom is not None else None
    return reader.extend(P, X, phi, validate=validate)


def _fiber_law(res, rep):
    P, B, X = res.P, res.P.base, res.X
    phi = res.phi
    ok, bad = True, None
    for a in P.objects():
        whole = P.fiber(B.prod(X, a))
        top = whole.top if phi is None else P.reindex(B.pr1(X, a))(phi)
        F = res.doctrine.fiber(a)
        want = [x for x in whole.elements if whole.leq(x, top)]
        if set(F.elements) != set(want) or F.top != top:
            ok, bad = False, a
    rep.check("fibers are the downsets below P(pr1)(phi)", ok,
              "" if ok else f"object {show(bad)}")


def cmd_extend(args, rep):
    built = _load(args.file)
    res = _extension(args, built)
    if args.axiom is None:
        rep.note("no axiom: constant only, a primary doctrine is not required")
    rep.check("extension construction", res.log.ok)
    _fiber_law(res, rep)
    _, ok = reader.interpret_new_constant(res)
    rep.check("axiom holds at the new constant", ok)
    for a in res.P.objects():
        F = res.doctrine.fiber(a)
        rep.kv(f"fiber.{show(a)}.size", len(F.elements))
    if not res.P.base.lazy:
        rep.note("extended doctrine:")
        rep.note(emit_extension(res, args.doctrine + "_ext"))
    else:
        rep.skip("emit doctrine block", "lazy base: fibers listed per probe only")
    _transport(res, rep)


def _transport(res, rep):
    rows = reader.transport_report(res)
    rep.note(f"{'kind':20s} {'in P':6s} {'witness':8s} {'detect':7s} {'agree':6s} preserved")
    for r in rows:
        pres = "-" if r.preserved is None else ("yes" if r.preserved else "no")
        rep.note(f"{r.kind:20s} {_yn(r.held):6s} {_yn(r.witness_ok) if r.held else '-':8s} "
                 f"{_yn(r.detected) if r.held else '-':7s} {_yn(r.agree) if r.held else '-':6s} "
                 f"{pres if r.held else '-'}" + (f"  {r.note}" if r.note else ""))
        if r.held:
            rep.check(f"transport {r.kind}", r.witness_ok and r.agree)
            rep.kv(f"transport.{r.kind}.preserved", pres)
            for k, v in sorted(r.flags.items()):
                if k in ("distributive", "frobenius_source", "frobenius_target"):
                    rep.kv(f"transport.{r.kind}.{k}", str(v).lower())


def _yn(b):
    return "yes" if b else "no"


def cmd_transport(args, rep):
    built = _load(args.file)
    res = _extension(args, built)
    _transport(res, rep)


def cmd_conservative(args, rep):
    built = _load(args.file)
    res = _extension(args, built)
    out = reader.conservativity_check(res)
    rep.kv("conservative", str(out["conservative"]).lower())
    rep.kv("criterion", "n/a" if out["criterion"] is None else str(out["criterion"]).lower())
    if out["witness"] is not None:
        a, u, v = out["witness"]
        rep.note(f"not conservative: over {show(a)}, f({show(u)}) <= f({show(v)}) "
                 f"but {show(u)} is not below {show(v)}")
    if out["criterion"] is not None:
        rep.check("conservativity agrees with the existential criterion", out["agree"])
    else:
        rep.skip("existential criterion", "doctrine is not existential")
        rep.check("fullness computed", True)


def cmd_factorize(args, rep):
    built = _load(args.file)
    res = _extension(args, built)
    if args.model is None or args.constant is None:
        raise UsageError("--model and --constant are required", None)
    G = built.get(args.model, "morphism")
    if G.source is not res.P:
        raise UsageError(f"model {args.model!r} does not start at {args.doctrine!r}", None)
    c = args.constant
    D = G.target.base
    if c not in D.arrows():
        raise UnresolvedReference(f"unknown arrow {c!r} in {D.name}", c)
    want = (D.terminal(), G.functor.obj(res.X))
    if (D.dom(c), D.cod(c)) != want:
        raise UsageError(f"constant {c!r} must be an arrow {show(want[0])} -> {show(want[1])}", None)
    fac = reader.factorize_model(res, G, c, check_preservation=True)
    rep.check("composite equals the model", fac.log.ok)
    rep.check("new constant goes to c", fac.constant_ok)
    rep.kv("constant_strict", str(fac.constant_strict).lower())
    for k, v in sorted(fac.preserved.items()):
        rep.kv(f"preserved.{k}", str(v).lower())
    verdict = reader.check_model_competitor(res, fac, G, c, fac.morphism)
    rep.check("uniqueness (strict)", verdict == "equal", verdict)
    F = fac.morphism.functor
    for g in res.category.probe_arrows():
        rep.note(f"G'({show(g.dom)} ~ {show(g.base)}) = {show(F.arr(g))}")


def emit_extension(res, name):
    """The extension over a finite base as self-contained spec blocks."""
    C, D = res.category, res.doctrine
    lines = []
    objs = list(C.objects())
    fib = {}
    for a in objs:
        F = D.fiber(a)
        pn = f"{name}_fiber_{show(a)}"
        fib[a] = pn
        els = [show(x) for x in F.elements]
        lines.append(f"poset {pn}")
        lines.append("  elements " + " ".join(els))
        pairs = [f"{show(x)}<={show(y)}" for x in F.elements for y in F.elements
                 if x != y and F.leq(x, y)]
        if pairs:
            lines.append("  leq " + " ".join(pairs))
        lines.append("end")
        lines.append("")
    arrows = list(C.arrows())
    nm = {g: f"{show(g.dom)}~{show(g.base)}" for g in arrows}
    cn = f"{name}_base"
    lines.append(f"category {cn}")
    lines.append("  objects " + " ".join(show(a) for a in objs))
    for g in arrows:
        lines.append(f"  arrow {nm[g]} {show(g.dom)} {show(g.cod)}")
    for a in objs:
        lines.append(f"  identity {show(a)} {nm[C.identity(a)]}")
    for f in arrows:
        for g in arrows:
            if g.dom == f.cod and C.identity(f.dom) != f and C.identity(g.dom) != g:
                lines.append(f"  compose {nm[g]} {nm[f]} {nm[C.compose(g, f)]}")
    lines.append(f"  terminal {show(C.terminal())}")
    for a in objs:
        for b in objs:
            p = C.product(a, b)
            lines.append(f"  product {show(a)} {show(b)} {show(p.obj)} {nm[p.pr1]} {nm[p.pr2]}")
    lines.append("end")
    lines.append("")
    lines.append(f"doctrine {name}")
    lines.append(f"  base {cn}")
    for a in objs:
        lines.append(f"  fiber {show(a)} {fib[a]}")
    for g in arrows:
        m = D.reindex(g)
        lines.append(f"  reindex {nm[g]} " + " ".join(f"{show(x)}:{show(m(x))}"
                                                     for x in m.source.elements))
    lines.append("end")
    return "\n".join(lines)


# ---------------------------------------------------------------------------
# demos


def demo_powerset_collapse(args, rep):
    r = models.powerset_collapse()
    for name, ok, detail in r.checks:
        rep.check(name, ok, detail)
    P = models.powerset_doctrine()
    out = reader.conservativity_check(reader.extend(P, (), None))
    rep.check("adding a constant of empty sort is not conservative",
              out["conservative"] is False and out["criterion"] is False)
    a, u, v = out["witness"]
    rep.note(f"counterexample over {show(a)}: f({show(u)}) <= f({show(v)})")


def demo_powerset_xy(args, rep):
    r = models.powerset_xy()
    models.powerset_factorization(report=r)
    for name, ok, detail in r.checks:
        rep.check(name, ok, detail)


def demo_lt_axiom(args, rep):
    cases = ((["p", "q"], [], "p"), (["p", "q"], [], "1"), (["p", "q"], [], "0"),
             (["p", "q", "r"], ["p >> q"], "q | r"))
    for atoms, axioms, phi in cases:
        out = models.lt_add_axiom_iso(atoms, axioms, phi)
        label = f"atoms {','.join(atoms)} theory [{'; '.join(axioms)}] axiom {phi}"
        rep.check(f"(LT_T)_phi iso LT_(T+phi): {label}", out["iso"], "")
        rep.kv(f"lt.{'.'.join(atoms)}.{_key(phi)}.size", out["size"])


def demo_distributive_law(args, rep):
    P = models.powerset_doctrine(((), (0,), (0, 1)))
    out = reader.distributive_law_check(P, (0, 1), frozenset({0}), (0,), frozenset({0}))
    for k in ("coherence", "invertible", "composite_is_reader", "unique_by_projections"):
        rep.check(f"powerset: {k.replace('_', ' ')}", out[k] is True)
    rep.kv("powerset.two_cell", out["two_cell"])
    for s in range(args.seed, args.seed + 5):
        Q = models.random_semilattice_doctrine(s)
        objs = list(Q.objects())
        X, Y = objs[-1], objs[len(objs) // 2]
        o = reader.distributive_law_check(Q, X, Q.fiber(X).elements[0], Y, Q.fiber(Y).elements[-1])
        rep.check(f"seed {s}: swap is a distributive law, composite is the reader comonad",
                  o["coherence"] and o["composite_is_reader"])


def demo_kleisli_roundtrip(args, rep):
    for inst in models.suite(12, seed=args.seed):
        Cm = inst.comonad
        validate_comonad(Cm)
        b = build_kleisli_doctrine(Cm)
        fac = factorize_oplax(b, b.universal)
        same = morphism_mismatch(fac.morphism, identity_morphism(b.doctrine)) is None
        rep.check(f"seed {inst.seed} ({inst.kind}): universal arrow factors as the identity",
                  b.log.ok and same)
        em = build_em_doctrine(Cm)
        rep.kv(f"seed.{inst.seed}.em_objects", len(em.base.objects()))


DEMO_FUNCS = {
    "powerset-collapse": demo_powerset_collapse,
    "powerset-XY": demo_powerset_xy,
    "lt-axiom": demo_lt_axiom,
    "distributive-law": demo_distributive_law,
    "kleisli-roundtrip": demo_kleisli_roundtrip,
}


def cmd_demo(args, rep):
    if args.name not in DEMO_FUNCS:
        raise UsageError(f"unknown demo {args.name!r}; choose from {', '.join(DEMOS)}", args.name)
    DEMO_FUNCS[args.name](args, rep)


# ---------------------------------------------------------------------------


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message, None)


def make_parser():
    p = _Parser(prog="doctrines", description="Finite doctrines and their Kleisli extensions.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)
    v = sub.add_parser("validate", help="parse a spec file and validate every block")
    v.add_argument("file")
    d = sub.add_parser("detect", help="detect structure on a doctrine")
    d.add_argument("file")
    d.add_argument("--doctrine")
    d.add_argument("--kind")
    for name, hlp in (("extend", "add a constant (and an axiom)"),
                      ("transport", "structure transport matrix"),
                      ("conservative", "conservativity of the extension"),
                      ("factorize", "factor a model through the extension")):
        s = sub.add_parser(name, help=hlp)
        s.add_argument("file")
        s.add_argument("--doctrine")
        s.add_argument("--object")
        s.add_argument("--axiom")
        if name == "factorize":
            s.add_argument("--model")
            s.add_argument("--constant")
    m = sub.add_parser("demo", help="run a worked example")
    m.add_argument("name", help=", ".join(DEMOS))
    m.add_argument("--seed", type=int, default=0)
    return p


COMMANDS = {"validate": cmd_validate, "detect": cmd_detect, "extend": cmd_extend,
            "transport": cmd_transport, "conservative": cmd_conservative,
            "factorize": cmd_factorize, "demo": cmd_demo}


def run_command(argv):
    """Returns (report text, exit status)."""
    command = " ".join(argv)
    try:
        args = make_parser().parse_args(argv)
    except UsageError as e:
        return f"usage error: {e}\n", 2
    rep = Report(command)
    try:
        COMMANDS[args.command](args, rep)
    except (UsageError, SpecSyntaxError, UnresolvedReference, DuplicateName) as e:
        return f"{type(e).__name__}: {e}\n", 2
    except DoctrineError as e:
        rep.error(args.command, e)
    return rep.render(), rep.status


def main(argv=None):
    text, status = run_command(sys.argv[1:] if argv is None else argv)
    (sys.stdout if status != 2 else sys.stderr).write(text)
    return status


if __name__ == "__main__":
    sys.exit(main())
