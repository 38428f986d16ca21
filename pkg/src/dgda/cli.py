"""Command line front end.

    dgda homology   SPEC
    dgda factorize  SPEC --mode {trivcof-fib,cof-trivfib,minimal}
    dgda resolve    SPEC --kind {koszul,koszul-tate,cofibrant}
    dgda verify     SPEC --check {rsda,pushout,square,d-squared}

SPEC is a JSON file ('-' for stdin). Exit codes: 0 all checks pass, 1 some
check failed or was inconclusive, 2 the input could not be parsed, 3 a
precondition of a construction failed.
"""
from __future__ import annotations

import argparse
import json
import sys
import time
from dataclasses import replace
from typing import Any, Dict, List, Optional

from . import __version__
from .coeff_rings import Poly
from .dga_core import (AlgElem, ChainMapError, Dga, DgaMorphism, RelationError, Rule, base_algebra,
                       free_algebra, identity_morphism, tensor_algebra)
from .expr import ExprError, label_map, parse_elem
from .factorization import (BudgetClosureError, EnumerationBudget, FactorizationError, FactorizationResult,
                            closed_budget, cof_trivfib, cofibrant_replacement, functorial_square,
                            minimal_variant, pushout_gen_cof, pushout_universal, trivcof_fib, verify_rsda)
from .graded_modules import DifferentialError, disc, named, sphere
from .homology_engine import (HomologyReport, Truncation, homology, is_fibration, is_weak_equivalence,
                              slice_dims)
from .koszul_tate import (JetSpec, NoetherError, WindowExit, koszul_resolution, koszul_tate, kt_verify,
                          polynomial_ring, quotient_by_equations, quotient_slice_dims)

EXIT_PASS, EXIT_FAIL, EXIT_PARSE, EXIT_PRECONDITION = 0, 1, 2, 3

PRECONDITION_ERRORS = (DifferentialError, ChainMapError, RelationError, FactorizationError,
                       NoetherError, WindowExit)


class SpecError(ValueError):
    """Malformed or unknown input."""


# -- parsing helpers --------------------------------------------------------------

def _fields(obj: Any, where: str, allowed: set, required: set = frozenset()) -> dict:
    if not isinstance(obj, dict):
        raise SpecError(f"{where}: expected an object")
    unknown = sorted(set(obj) - allowed)
    if unknown:
        raise SpecError(f"{where}: unknown field(s) {', '.join(unknown)}")
    missing = sorted(required - set(obj))
    if missing:
        raise SpecError(f"{where}: missing field(s) {', '.join(missing)}")
    return obj


def _int(v: Any, where: str, lo: int = 0) -> int:
    if isinstance(v, bool) or not isinstance(v, int) or v < lo:
        raise SpecError(f"{where}: expected an integer >= {lo}")
    return v


def _str_list(v: Any, where: str) -> List[str]:
    if not isinstance(v, list) or not all(isinstance(s, str) for s in v):
        raise SpecError(f"{where}: expected a list of strings")
    return v


def _elem(text: Any, X: Dga, where: str) -> AlgElem:
    try:
        return parse_elem(text, X)
    except ExprError as e:
        raise SpecError(f"{where}: {e}")


def _weight(v: Any, where: str) -> tuple:
    if isinstance(v, int) and not isinstance(v, bool):
        return (v, 0, 1)
    if isinstance(v, list) and len(v) == 3 and all(isinstance(x, int) and x >= 0 for x in v):
        return tuple(v)
    raise SpecError(f"{where}: weight is an integer or a triple [wt, ord, len]")


TOP_FIELDS = {"p", "vars", "algebras", "morphisms", "truncation", "budget",
              "homology", "factorize", "resolve", "verify", "description"}


class Problem:
    def __init__(self, doc: Any):
        doc = _fields(doc, "spec", TOP_FIELDS)
        self.doc = doc
        self.p = _int(doc.get("p", 0), "p")
        names = doc.get("vars")
        if names is not None:
            names = _str_list(names, "vars")
            if len(names) != self.p:
                raise SpecError("vars: one name per base variable")
        self.var_names = names
        self.algebras: Dict[str, Dga] = {}
        self.morphisms: Dict[str, DgaMorphism] = {}
        self._alg_docs = doc.get("algebras", {})
        if not isinstance(self._alg_docs, dict):
            raise SpecError("algebras: expected an object")
        self._mor_docs = doc.get("morphisms", {})
        if not isinstance(self._mor_docs, dict):
            raise SpecError("morphisms: expected an object")
        self.truncation_doc = _fields(doc.get("truncation", {}), "truncation", {"N", "d_x", "r", "L"})
        self.budget_doc = _fields(doc.get("budget", {}), "budget", {"stages", "pairs", "bs", "cycles"})

    # algebras and morphisms are built lazily so that a d-squared check can
    # inspect an algebra that would not validate
    def algebra(self, name: str, check: bool = True) -> Dga:
        if name in self.algebras:
            return self.algebras[name]
        if name not in self._alg_docs:
            raise SpecError(f"unknown algebra {name!r}")
        X = self._build_algebra(name, self._alg_docs[name], check)
        if check:
            self.algebras[name] = X
        return X

    def _build_algebra(self, name: str, a: Any, check: bool) -> Dga:
        where = f"algebras.{name}"
        a = _fields(a, where, {"generators", "d", "relations", "free", "tensor", "base"})
        p, vn = self.p, self.var_names
        if a.get("base"):
            if set(a) - {"base"}:
                raise SpecError(f"{where}: base algebra takes no other fields")
            return base_algebra(p, name, vn)
        if "free" in a:
            f = _fields(a["free"], f"{where}.free", {"sphere", "disc"})
            if len(f) != 1 or set(a) - {"free"}:
                raise SpecError(f"{where}: free takes exactly one of sphere, disc")
            kind, n = next(iter(f.items()))
            n = _int(n, f"{where}.free.{kind}", -1 if kind == "sphere" else 0)
            mod = sphere(n, p) if kind == "sphere" else disc(n, p)
            X = free_algebra(mod, name)
            X.var_names = list(vn) if vn else X.var_names
            return X
        if "tensor" in a:
            parts = _str_list(a["tensor"], f"{where}.tensor")
            if len(parts) != 2 or set(a) - {"tensor"}:
                raise SpecError(f"{where}: tensor takes two algebra names")
            return tensor_algebra(self.algebra(parts[0]), self.algebra(parts[1]), name)
        gens, hints = [], {}
        for k, gd in enumerate(a.get("generators", [])):
            gd = _fields(gd, f"{where}.generators[{k}]", {"name", "degree", "weight"}, {"name", "degree"})
            if not isinstance(gd["name"], str) or not gd["name"]:
                raise SpecError(f"{where}.generators[{k}]: name must be a non-empty string")
            g = named(gd["name"], _int(gd["degree"], f"{where}.generators[{k}].degree"), k)
            gens.append(g)
            if "weight" in gd:
                hints[g] = _weight(gd["weight"], f"{where}.generators[{k}].weight")
        if len({g.name for g in gens}) != len(gens):
            raise SpecError(f"{where}: generator names must be distinct")
        scratch = Dga(p, gens, {}, name=name, check=False, var_names=vn)
        labels = label_map(scratch)
        dd = a.get("d", {})
        if not isinstance(dd, dict):
            raise SpecError(f"{where}.d: expected an object")
        d = {}
        for lab, txt in dd.items():
            if lab not in labels:
                raise SpecError(f"{where}.d: unknown generator {lab!r}")
            d[labels[lab]] = _elem(txt, scratch, f"{where}.d.{lab}")
        rules = []
        for k, rd in enumerate(a.get("relations", [])):
            rd = _fields(rd, f"{where}.relations[{k}]", {"lhs", "rhs"}, {"lhs", "rhs"})
            lhs = _elem(rd["lhs"], scratch, f"{where}.relations[{k}].lhs")
            if len(lhs.terms) != 1 or next(iter(lhs.terms.values())) != Poly.one(p) or () in lhs.terms:
                raise SpecError(f"{where}.relations[{k}]: lhs must be a single monomial with coefficient 1")
            rules.append(Rule(next(iter(lhs.terms)), _elem(rd["rhs"], scratch, f"{where}.relations[{k}].rhs")))
        return Dga(p, gens, d, rules, name=name, hints=hints, check=check, var_names=vn)

    def morphism(self, name: str) -> DgaMorphism:
        if name in self.morphisms:
            return self.morphisms[name]
        if name not in self._mor_docs:
            raise SpecError(f"unknown morphism {name!r}")
        where = f"morphisms.{name}"
        m = _fields(self._mor_docs[name], where, {"source", "target", "images", "identity"})
        if "identity" in m:
            if set(m) != {"identity"}:
                raise SpecError(f"{where}: identity takes no other fields")
            f = identity_morphism(self.algebra(m["identity"]))
        else:
            _fields(m, where, {"source", "target", "images"}, {"source", "target"})
            S, T = self.algebra(m["source"]), self.algebra(m["target"])
            imgs = _fields(m.get("images", {}), f"{where}.images", {g.label() for g in S.gens})
            assign = {}
            for g in S.gens:
                if g.label() not in imgs:
                    raise SpecError(f"{where}: no image for {g.label()!r}")
                assign[g] = _elem(imgs[g.label()], T, f"{where}.images.{g.label()}")
            f = DgaMorphism(S, T, assign)
        self.morphisms[name] = f
        return f

    def truncation(self, args) -> Truncation:
        t = self.truncation_doc
        vals = {"N": t.get("N", 3), "d_x": t.get("d_x", 0), "r": t.get("r", 0), "L": t.get("L", 3)}
        for k in vals:
            vals[k] = _int(vals[k], f"truncation.{k}")
        over = {"N": args.trunc_degree, "d_x": args.poly_degree, "r": args.order, "L": args.word_len}
        for k, v in over.items():
            if v is not None:
                vals[k] = v
        return Truncation(**vals)

    def budget(self, t: Truncation, B: Dga, args) -> EnumerationBudget:
        b = self.budget_doc
        stages = _int(b.get("stages", 1), "budget.stages")
        if args.stages is not None:
            stages = args.stages
        pairs = b.get("pairs", "basis")
        if pairs not in ("basis", "all", "none"):
            raise SpecError("budget.pairs: one of basis, all, none")

        def lists(key):
            if key not in b:
                return None
            raw = _fields(b[key], f"budget.{key}", {str(n) for n in range(0, 64)})
            return {int(n): [_elem(s, B, f"budget.{key}.{n}") for s in _str_list(v, f"budget.{key}.{n}")]
                    for n, v in raw.items()}

        return EnumerationBudget(t, lists("bs"), lists("cycles"), stages, pairs)

    def section(self, key: str, allowed: set, required: set = frozenset()) -> dict:
        return _fields(self.doc.get(key, {}), key, allowed, required)


# -- report assembly ----------------------------------------------------------------------

class Report:
    def __init__(self, command: str, option: Optional[str], t: Optional[Truncation]):
        self.data: Dict[str, Any] = {"command": command, "version": __version__}
        if option is not None:
            self.data["option"] = option
        if t is not None:
            self.data["truncation"] = t.as_dict()
        self.data["objects"] = {}
        self.data["checks"] = {}
        self.lines: List[str] = []

    def obj(self, key: str, value: Any) -> None:
        self.data["objects"][key] = value

    def check(self, name: str, ok: Optional[bool], detail: Any = None) -> None:
        status = "inconclusive" if ok is None else ("pass" if ok else "fail")
        entry = {"status": status}
        if detail is not None:
            entry["detail"] = detail
        self.data["checks"][name] = entry

    def say(self, line: str = "") -> None:
        self.lines.append(line)

    def status(self, allow_flags: bool) -> int:
        st = [c["status"] for c in self.data["checks"].values()]
        if "fail" in st or ("inconclusive" in st and not allow_flags):
            return EXIT_FAIL
        return EXIT_PASS


def _check_from(rep, name: str, report: Report) -> None:
    """Record a CheckReport; flagged degrees make it inconclusive."""
    ok: Optional[bool] = rep.ok
    if ok and rep.inconclusive:
        ok = None
    report.check(name, ok, rep.to_json())


def _algebra_summary(X: Dga) -> dict:
    return {"name": X.name, "generators": len(X.gens),
            "by_degree": {str(n): sum(1 for g in X.gens if g.degree == n)
                          for n in sorted({g.degree for g in X.gens})},
            "relations": len(X.relations)}


def _homology_section(rep: HomologyReport, title: str, report: Report, key: str) -> None:
    report.obj(key, rep.to_json())
    report.say(f"{title}")
    report.say(rep.table())


def _factorization_checks(F: FactorizationResult, t: Truncation, report: Report) -> None:
    res = F.composite_residues()
    report.check("composite_equals_phi", not res,
                 {g.label(): e.to_str(F.middle.var_names) for g, e in sorted(res.items())} or None)
    rs = verify_rsda(F.left)
    report.check("left_is_rsda", rs["ok"], rs)
    coh = F.stage_coherence()
    report.check("stage_coherence", not coh, coh or None)
    _check_from(is_fibration(F.right, t), "right_is_fibration", report)
    if F.kind == "TrivCofFib":
        _check_from(is_weak_equivalence(F.left, t), "left_is_weak_equivalence", report)
    else:
        _check_from(is_weak_equivalence(F.right, t), "right_is_weak_equivalence", report)
    report.obj("middle", _algebra_summary(F.middle))
    report.obj("stage_log", F.stage_log())
    report.say(f"{F.kind}: middle algebra {F.middle.name} with {len(F.middle.gens)} generators")
    for st in F.stage_log():
        report.say(f"  stage {st['stage']}: {len(st['added'])} generator(s) added")
        for e in st["added"]:
            extra = e.get("index") or f"sigma = {e.get('sigma')}, b = {e.get('b')}"
            report.say(f"    {e['gen']} (deg {e['degree']}, {e['kind']}): {extra}")


# -- commands ----------------------------------------------------------------------------

def cmd_homology(P: Problem, args) -> Report:
    sec = P.section("homology", {"algebra", "expect"}, {"algebra"})
    t = P.truncation(args)
    X = P.algebra(sec["algebra"])
    rep = Report("homology", None, t)
    rep.obj("algebra", _algebra_summary(X))
    h = homology(X, t, reps=False)
    _homology_section(h, f"H({X.name}) on the window", rep, "homology")
    flagged = h.flagged()
    rep.check("window_unflagged", None if flagged else True, {"flagged": flagged} if flagged else None)
    if "expect" in sec:
        if not isinstance(sec["expect"], dict):
            raise SpecError("homology.expect must be an object mapping degrees to ranks")
        outside = sorted(k for k in sec["expect"] if k not in {str(n) for n in range(t.N + 1)})
        if outside:
            raise SpecError(f"homology.expect: degree(s) {', '.join(outside)} outside the window 0..{t.N}")
        exp = sec["expect"]
        bad = {n: {"expected": v, "got": h.h(int(n))} for n, v in exp.items() if h.h(int(n)) != v}
        rep.check("expected_ranks", not bad, bad or None)
    return rep


def _factorize(P: Problem, mode: str, phi: DgaMorphism, t: Truncation, args, budget=None) -> FactorizationResult:
    budget = budget or P.budget(t, phi.target, args)
    if mode == "trivcof-fib":
        return trivcof_fib(phi, budget)
    if mode == "cof-trivfib":
        return cof_trivfib(phi, budget)
    if mode == "minimal":
        return minimal_variant(phi, budget)
    raise SpecError(f"unknown mode {mode!r}")


def cmd_factorize(P: Problem, args) -> Report:
    sec = P.section("factorize", {"morphism", "mode"}, {"morphism"})
    mode = args.mode or sec.get("mode", "cof-trivfib")
    t = P.truncation(args)
    phi = P.morphism(sec["morphism"])
    rep = Report("factorize", mode, t)
    F = _factorize(P, mode, phi, t, args)
    _factorization_checks(F, t, rep)
    return rep


def _koszul(P: Problem, args, rep: Report, t: Truncation) -> None:
    sec = P.section("resolve", {"kind", "ring", "sequence", "expect_h0"}, {"ring", "sequence"})
    ring = _fields(sec["ring"], "resolve.ring", {"variables", "algebra"})
    if "algebra" in ring:
        R = P.algebra(ring["algebra"])
    else:
        R = polynomial_ring(_str_list(ring.get("variables", []), "resolve.ring.variables"))
    xs = [_elem(s, R, f"resolve.sequence[{k}]") for k, s in enumerate(_str_list(sec["sequence"], "resolve.sequence"))]
    K = koszul_resolution(R, xs)
    rep.obj("resolution", _algebra_summary(K))
    h = homology(K, t, reps=False)
    _homology_section(h, f"H({K.name}) on the window", rep, "homology")
    higher = [d.n for d in h.degrees if d.n >= 1 and not d.flagged and d.h]
    flagged = h.flagged()
    rep.check("higher_homology_vanishes", False if higher else (None if flagged else True),
              {"nonzero": higher, "flagged": flagged})
    h0 = slice_dims(K, 0, t)
    rep.obj("h0_slices", h0)
    Q = quotient_by_equations(R, xs)
    if Q is not None:
        qd = quotient_slice_dims(Q, t)
        rep.obj("quotient_slices", qd)
        rep.check("h0_matches_quotient", h0 == qd, {"h0": h0, "quotient": qd})
    if "expect_h0" in sec:
        exp = sec["expect_h0"]
        rep.check("h0_expected_slices", h0 == exp, {"expected": exp, "got": h0})
    rep.say(f"H_0 slices by polynomial degree: {h0}")


def _koszul_tate(P: Problem, args, rep: Report, t: Truncation) -> None:
    sec = P.section("resolve", {"kind", "jet", "equations", "noether", "antifield_order"}, {"jet", "equations"})
    jd = _fields(sec["jet"], "resolve.jet", {"p", "fields", "r", "base"}, {"fields", "r"})
    p = _int(jd.get("p", P.p), "resolve.jet.p")
    base = jd.get("base")
    try:
        spec = JetSpec(p, tuple(_str_list(jd["fields"], "resolve.jet.fields")), _int(jd["r"], "resolve.jet.r"),
                       tuple(_str_list(base, "resolve.jet.base")) if base is not None else None)
    except SpecError:
        raise
    except ValueError as e:
        raise SpecError(f"resolve.jet: {e}")
    from .koszul_tate import jet_algebra
    J = jet_algebra(spec)
    eqs = [_elem(s, J, f"resolve.equations[{k}]") for k, s in enumerate(_str_list(sec["equations"], "resolve.equations"))]
    idents = []
    for j, nd in enumerate(sec.get("noether", [])):
        if not isinstance(nd, list):
            raise SpecError(f"resolve.noether[{j}]: expected a list of terms")
        ident = {}
        for k, term in enumerate(nd):
            term = _fields(term, f"resolve.noether[{j}][{k}]", {"eq", "alpha", "coeff"}, {"eq", "coeff"})
            alpha = term.get("alpha", [0] * p)
            if not isinstance(alpha, list) or len(alpha) != p:
                raise SpecError(f"resolve.noether[{j}][{k}].alpha: {p} non-negative integers")
            key = (_int(term["eq"], f"resolve.noether[{j}][{k}].eq"),
                   tuple(_int(a, f"resolve.noether[{j}][{k}].alpha") for a in alpha))
            ident[key] = ident.get(key, AlgElem.zero(p)) + _elem(term["coeff"], J, f"resolve.noether[{j}][{k}].coeff")
        idents.append(ident)
    s = sec.get("antifield_order")
    kt = koszul_tate(spec, eqs, idents, None if s is None else _int(s, "resolve.antifield_order"))
    tt = replace(t, r=spec.r) if args.order is None and "r" not in P.truncation_doc else t
    rep.data["truncation"] = tt.as_dict()
    rep.obj("complex", _algebra_summary(kt.dga))
    res = kt.dga.d_squared_residues()
    rep.check("delta_squared_zero", not res, {g.label(): e.to_str() for g, e in res.items()} or None)
    v = kt_verify(kt, tt)
    _homology_section(v.report, "H(KT) on the window", rep, "homology")
    higher = [d.n for d in v.report.degrees if d.n >= 1 and not d.flagged and d.h]
    flagged = v.report.flagged()
    rep.check("higher_homology_vanishes", False if higher else (None if flagged else True),
              {"nonzero": higher, "flagged": flagged})
    rep.obj("h0_slices", v.h0_slices)
    rep.obj("quotient_slices", v.quotient_slices)
    rep.check("h0_matches_quotient", v.h0_matches, {"note": v.note} if v.note else None)
    rep.say(f"H_0 slices: {v.h0_slices}; quotient: {v.quotient_slices}")


def cmd_resolve(P: Problem, args) -> Report:
    sec = P.doc.get("resolve", {})
    kind = args.kind or (sec.get("kind") if isinstance(sec, dict) else None) or "koszul"
    t = P.truncation(args)
    rep = Report("resolve", kind, t)
    if kind == "koszul":
        _koszul(P, args, rep, t)
    elif kind == "koszul-tate":
        _koszul_tate(P, args, rep, t)
    elif kind == "cofibrant":
        sec = P.section("resolve", {"kind", "algebra"}, {"algebra"})
        B = P.algebra(sec["algebra"])
        F = cofibrant_replacement(B, P.budget(t, B, args))
        _factorization_checks(F, t, rep)
    else:
        raise SpecError(f"unknown kind {kind!r}")
    return rep


def cmd_verify(P: Problem, args) -> Report:
    sec = P.doc.get("verify", {})
    check = args.check or (sec.get("check") if isinstance(sec, dict) else None) or "d-squared"
    t = P.truncation(args)
    rep = Report("verify", check, t)
    if check == "d-squared":
        sec = P.section("verify", {"check", "algebra"}, {"algebra"})
        X = P.algebra(sec["algebra"], check=False)
        res = X.d_squared_residues()
        detail = {g.label(): e.to_str(X.var_names) for g, e in sorted(res.items())}
        rep.check("d_squared_zero", not res, detail or None)
        for lab, e in detail.items():
            rep.say(f"d^2({lab}) = {e}")
    elif check == "rsda":
        sec = P.section("verify", {"check", "morphism", "mode", "order"}, {"morphism"})
        f = P.morphism(sec["morphism"])
        if "mode" in sec:
            f = _factorize(P, sec["mode"], f, t, args).left
        order = None
        if "order" in sec:
            labels = label_map(f.target)
            names = _str_list(sec["order"], "verify.order")
            unknown = [n for n in names if n not in labels]
            if unknown:
                raise SpecError(f"verify.order: unknown generator(s) {', '.join(unknown)}")
            order = [labels[n] for n in names]
        r = verify_rsda(f, order)
        rep.check("rsda", r["ok"], r)
    elif check == "pushout":
        sec = P.section("verify", {"check", "algebra", "n", "kappa"}, {"algebra", "n", "kappa"})
        T = P.algebra(sec["algebra"])
        data = pushout_gen_cof(_int(sec["n"], "verify.n"), T, _elem(sec["kappa"], T, "verify.kappa"))
        rep.obj("pushout", _algebra_summary(data.algebra))
        res = data.algebra.d_squared_residues()
        rep.check("d_squared_zero", not res)
        chi = pushout_universal(data.i, data.j, data)
        chi2 = pushout_universal(data.i, data.j, data)
        ok_i = not chi.compose_after(data.i).agrees_with(data.i)
        ok_j = not chi.compose_after(data.j).agrees_with(data.j)
        rep.check("chi_restricts_to_i", ok_i)
        rep.check("chi_restricts_to_j", ok_j)
        rep.check("chi_deterministic", not chi.agrees_with(chi2))
        rep.check("chi_is_identity", all(chi.assign[g] == AlgElem.gen(g, T.nvars) for g in data.algebra.gens))
    elif check == "square":
        sec = P.section("verify", {"check", "u", "v", "phi", "phi2", "mode", "closed"},
                        {"u", "v", "phi", "phi2"})
        u, v = P.morphism(sec["u"]), P.morphism(sec["v"])
        phi, phi2 = P.morphism(sec["phi"]), P.morphism(sec["phi2"])
        mode = sec.get("mode", "cof-trivfib")
        if mode not in ("trivcof-fib", "cof-trivfib"):
            raise SpecError("verify.mode: functoriality holds for trivcof-fib and cof-trivfib")
        F = _factorize(P, mode, phi, t, args)
        b2 = P.budget(t, phi2.target, args)
        if sec.get("closed", True):
            b2 = closed_budget(F, u, v, b2)
        F2 = _factorize(P, mode, phi2, t, args, b2)
        try:
            sq = functorial_square(u, v, F, F2)
        except BudgetClosureError as e:
            rep.check("budget_closure", False, e.missing)
            rep.say(str(e))
            return rep
        rep.check("budget_closure", True)
        rep.check("omega_j_equals_j2_u", not sq.left_residues)
        rep.check("q2_omega_equals_v_q", not sq.right_residues)
        rep.obj("omega_generators", len(sq.omega.assign))
    else:
        raise SpecError(f"unknown check {check!r}")
    return rep


COMMANDS = {"homology": cmd_homology, "factorize": cmd_factorize, "resolve": cmd_resolve, "verify": cmd_verify}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="dgda", description="Exact constructions and checks for differential "
                                 "graded D-algebras on finite windows.")
    ap.add_argument("--version", action="version", version=f"dgda {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sp = sub.add_parser(name)
        sp.add_argument("spec", help="JSON problem file, '-' for stdin")
        sp.add_argument("--trunc-degree", type=int, metavar="N")
        sp.add_argument("--poly-degree", type=int, metavar="D")
        sp.add_argument("--order", type=int, metavar="R")
        sp.add_argument("--word-len", type=int, metavar="L")
        sp.add_argument("--stages", type=int, metavar="K")
        sp.add_argument("--allow-flags", action="store_true", help="inconclusive window checks do not fail the run")
        sp.add_argument("--json", metavar="OUT", help="write the machine report here ('-' for stdout)")
        sp.add_argument("--timing", action="store_true", help="include wall-clock time in the machine report")
        if name == "factorize":
            sp.add_argument("--mode", choices=["trivcof-fib", "cof-trivfib", "minimal"])
        if name == "resolve":
            sp.add_argument("--kind", choices=["koszul", "koszul-tate", "cofibrant"])
        if name == "verify":
            sp.add_argument("--check", choices=["rsda", "pushout", "square", "d-squared"])
    return ap


def _load(path: str) -> Any:
    if path == "-":
        return json.load(sys.stdin)
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)


def dumps(data: Any) -> str:
    return json.dumps(data, sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def run(args: argparse.Namespace) -> tuple:
    """(exit code, report dict or None, human text)."""
    start = time.perf_counter()
    for k in ("trunc_degree", "poly_degree", "order", "word_len", "stages"):
        v = getattr(args, k)
        if v is not None and v < 0:
            return EXIT_PARSE, None, f"error: --{k.replace('_', '-')} must be non-negative"
    try:
        P = Problem(_load(args.spec))
        rep = COMMANDS[args.command](P, args)
    except (json.JSONDecodeError, UnicodeDecodeError) as e:
        return EXIT_PARSE, None, f"parse error: {e}"
    except OSError as e:
        return EXIT_PARSE, None, f"cannot read spec: {e}"
    except SpecError as e:
        return EXIT_PARSE, None, f"spec error: {e}"
    except (*PRECONDITION_ERRORS, ValueError) as e:
        msg = f"precondition failed: {e}"
        res = getattr(e, "residue", None)
        if res is not None and hasattr(res, "to_str"):
            msg += f"\nresidue: {res.to_str()}"
        return EXIT_PRECONDITION, None, msg
    code = rep.status(args.allow_flags)
    rep.data["status"] = {EXIT_PASS: "pass", EXIT_FAIL: "fail"}[code]
    if args.timing:
        rep.data["timing_s"] = round(time.perf_counter() - start, 6)
    lines = list(rep.lines)
    for name, c in rep.data["checks"].items():
        lines.append(f"{name}: {c['status'].upper()}")
    lines.append(f"status: {rep.data['status']}")
    return code, rep.data, "\n".join(lines)


def main(argv: Optional[List[str]] = None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as e:
        # usage errors from argparse
        return EXIT_PARSE if e.code not in (0, None) else 0
    code, data, text = run(args)
    args_json = args.json
    # with --json - stdout carries only the machine report
    stream = sys.stdout if code in (EXIT_PASS, EXIT_FAIL) and args_json != "-" else sys.stderr
    print(text, file=stream)
    if data is not None and args_json:
        if args_json == "-":
            sys.stdout.write(dumps(data))
        else:
            with open(args_json, "w", encoding="utf-8") as fh:
                fh.write(dumps(data))
    return code


if __name__ == "__main__":
    sys.exit(main())
