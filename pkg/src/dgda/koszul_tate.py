"""Jet algebras, total derivatives, prolongation, Koszul resolutions and the
Koszul-Tate complex with antifields.

Jet coordinates phi^i_alpha are the decorations d^alpha phi^i of one degree-0
generator per field, so the total derivative D_k is the action of d_k. The
same action moves antifields: D_k(phi^{alpha*}) = phi^{(alpha+k)*}.
"""
from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

from .coeff_rings import MultiIndex, indices_up_to
from .dga_core import (AlgElem, Dga, DgaMorphism, OGen, RelationError, Rule, _raise_factor,
                       partial, partial_power, rsda_extend_differential)
from .graded_modules import NAMED, GenId, antifield_kind, intern_payload, named
from .homology_engine import HomologyReport, Truncation, Weights, enumerate_basis, homology, slice_dims


class WindowExit(ValueError):
    """A jet order above the window bound r was produced."""


class NoetherError(ValueError):
    def __init__(self, msg: str, index: int, residue: AlgElem):
        super().__init__(msg)
        self.index = index
        self.residue = residue


@dataclass(frozen=True)
class JetSpec:
    p: int
    fields: Tuple[str, ...]
    r: int
    base_names: Optional[Tuple[str, ...]] = None

    def __post_init__(self):
        if self.r < 0 or self.p < 0:
            raise ValueError("jet order and base dimension must be non-negative")
        if not self.fields:
            raise ValueError("at least one field is needed")
        if len(set(self.fields)) != len(self.fields):
            raise ValueError("field names must be distinct")
        if self.base_names is not None and len(self.base_names) != self.p:
            raise ValueError("one name per base variable")

    def field_gens(self) -> List[GenId]:
        return [named(f, 0, i) for i, f in enumerate(self.fields)]


# Noether identity: (equation index i, multi-index alpha) -> G^i_alpha
NoetherIdentity = Mapping[Tuple[int, MultiIndex], AlgElem]


def jet_algebra(spec: JetSpec) -> Dga:
    names = list(spec.base_names) if spec.base_names else None
    return Dga(spec.p, spec.field_gens(), {}, name="J", var_names=names)


def jet_coordinates(spec: JetSpec) -> List[OGen]:
    """All phi^i_alpha with |alpha| <= r."""
    return [OGen(g, a) for g in spec.field_gens() for a in indices_up_to(spec.p, spec.r)]


def jet_order(a: AlgElem) -> int:
    """Largest |alpha| over the jet coordinates occurring in a."""
    return max((sum(o.deco) for m in a.terms for o in m if o.gen.kind == NAMED), default=0)


def _check_window(a: AlgElem, r: Optional[int]) -> AlgElem:
    if r is not None and jet_order(a) > r:
        raise WindowExit(f"jet order {jet_order(a)} exceeds the window bound r = {r}")
    return a


def total_derivative(k: int, a: AlgElem, extended: bool = True, r: Optional[int] = None) -> AlgElem:
    """D_k a. Without extension, antifields are treated as constants."""
    if not 0 <= k < a.nvars:
        raise ValueError(f"no base direction {k} in dimension {a.nvars}")
    if extended:
        return _check_window(partial(k, a), r)
    out = AlgElem.zero(a.nvars)
    for m, f in a.terms.items():
        df = f.derivative(k)
        if df:
            out = out + AlgElem.mono(m, a.nvars, df)
        for j, o in enumerate(m):
            if o.gen.kind != NAMED:
                continue
            s, nm = _raise_factor(m, j, k, a.nvars)
            if s:
                out = out + AlgElem.mono(nm, a.nvars, f if s > 0 else -f)
    return _check_window(out, r)


def total_derivative_power(alpha: MultiIndex, a: AlgElem, r: Optional[int] = None) -> AlgElem:
    return _check_window(partial_power(alpha, a), r)


def prolong(F: AlgElem, lmax: int, r: Optional[int] = None) -> List[AlgElem]:
    """D^alpha F for all |alpha| <= lmax, in graded-lex order of alpha."""
    return [total_derivative_power(a, F, r) for a in indices_up_to(F.nvars, lmax)]


# -- Koszul resolution ----------------------------------------------------------------

def polynomial_ring(names: Sequence[str], name: str = "P") -> Dga:
    """Q[names] in field mode; each variable has polynomial weight 1."""
    gens = [named(v, 0, i) for i, v in enumerate(names)]
    return Dga(0, gens, {}, name=name, hints={g: (1, 0, 1) for g in gens})


def koszul_resolution(P: Dga, xs: Sequence[AlgElem], names: Sequence[str] | None = None) -> Dga:
    """P (x) S[phi^{a*}] with delta(phi^{a*}) = x^a."""
    W = Weights(P)
    gens, dvals, hints = [], {}, {}
    for a, xa in enumerate(xs):
        xa = P.reduce(xa)
        P.require(xa, "Koszul generator")
        deg = xa.degree()
        if deg not in (0, None):
            raise ValueError(f"Koszul generators live in degree 0, got degree {deg}")
        label = names[a] if names else f"{xa.to_str(P.var_names)}*"
        g = GenId(antifield_kind(1), 1, a, intern_payload("k:" + xa.key()), label)
        gens.append(g)
        dvals[g] = xa
        hints[g] = W.elem_meta(xa)
    return rsda_extend_differential(P, gens, dvals, name=f"K({P.name})", hints=hints)


# -- Koszul-Tate --------------------------------------------------------------------------

@dataclass
class KTComplex:
    dga: Dga
    spec: JetSpec
    jet: Dga
    eqs: List[AlgElem]
    noether: List[Dict[Tuple[int, MultiIndex], AlgElem]]
    antifields: List[GenId]
    ghosts: List[GenId]
    antifield_order: int

    def truncation(self, N: int, d_x: int = 0, L: int = 3) -> Truncation:
        return Truncation(N, d_x, self.spec.r, L)

    def antifield(self, i: int, alpha: MultiIndex | None = None) -> AlgElem:
        return AlgElem.gen(self.antifields[i], self.spec.p, alpha)

    def delta(self, a: AlgElem) -> AlgElem:
        return self.dga.d(a)


def noether_residue(eqs: Sequence[AlgElem], identity: NoetherIdentity, nvars: int) -> AlgElem:
    """sum G^i_alpha D^alpha F_i."""
    out = AlgElem.zero(nvars)
    for (i, alpha), G in sorted(identity.items(), key=lambda kv: (kv[0][0], kv[0][1])):
        out = out + G * partial_power(alpha, eqs[i])
    return out


def koszul_tate(spec: JetSpec, eqs: Sequence[AlgElem], noether: Sequence[NoetherIdentity] = (),
                antifield_order: Optional[int] = None, check: bool = True,
                names: Sequence[str] | None = None) -> KTComplex:
    """delta(phi^{alpha*}_i) = D^alpha F_i and delta(C^{beta*}_j) = D^beta sum G^i_{j alpha} D^alpha phi*_i,
    both through the D-action on decorated generators."""
    J = jet_algebra(spec)
    p = spec.p
    eqs = [J.reduce(F) for F in eqs]
    orders = []
    for i, F in enumerate(eqs):
        J.require(F, f"equation {i}")
        if F.degree() not in (0, None):
            raise ValueError(f"equation {i} is not of degree 0")
        _check_window(F, spec.r)
        orders.append(jet_order(F))
    top = max(orders, default=0)
    s = spec.r - top if antifield_order is None else antifield_order
    if s < 0 or top + s > spec.r:
        raise WindowExit(f"equations of order {top} prolonged {s} times leave the window r = {spec.r}")
    af, dvals, hints = [], {}, {}
    for i, F in enumerate(eqs):
        label = names[i] if names else f"{spec.fields[i] if len(eqs) == len(spec.fields) else 'E' + str(i + 1)}*"
        g = GenId(antifield_kind(1), 1, i, intern_payload("F:" + F.key()), label)
        af.append(g)
        dvals[g] = F
        hints[g] = (0, orders[i], 1)
    K1 = rsda_extend_differential(J, af, dvals, name="KT1", hints=hints)
    ghosts, gd = [], {}
    norm_noether = []
    for j, ident in enumerate(noether):
        ident = {(int(i), tuple(a)): J.reduce(G) for (i, a), G in ident.items()}
        norm_noether.append(ident)
        for (i, a), G in ident.items():
            if not 0 <= i < len(eqs):
                raise ValueError(f"Noether identity {j} refers to equation {i}")
            if len(a) != p:
                raise ValueError(f"Noether identity {j}: multi-index {a} has wrong length")
        res = noether_residue(eqs, ident, p)
        if check and res:
            raise NoetherError(f"Noether identity {j} fails: residue {res.to_str(J.var_names)}", j, res)
        val = AlgElem.zero(p)
        for (i, a), G in sorted(ident.items()):
            val = val + G * AlgElem.gen(af[i], p, a)
        g = GenId(antifield_kind(2), 2, j, intern_payload("G:" + val.key()), f"C{j + 1}*")
        ghosts.append(g)
        gd[g] = val
    if check:
        M = rsda_extend_differential(K1, ghosts, gd, name="KT")
    else:
        d = dict(K1.d_gen)
        d.update(gd)
        M = Dga(p, list(K1.gens) + ghosts, d, name="KT", hints=K1.hints, check=False,
                var_names=K1.var_names)
    return KTComplex(M, spec, J, eqs, norm_noether, af, ghosts, s)


# -- verification -----------------------------------------------------------------------------

def _solitary_leading(F: AlgElem) -> Optional[Tuple[OGen, AlgElem]]:
    """(o, rest) with F = c*o + c*rest and o larger than every coordinate in rest."""
    coords = {o for m in F.terms for o in m if o.gen.kind == NAMED}
    if not coords:
        return None
    lead = max(coords, key=lambda o: (sum(o.deco), o.gen.sort_key, o.deco))
    c = F.terms.get((lead,))
    if c is None or not c.is_const():
        return None
    rest = AlgElem(F.nvars, {m: f for m, f in F.terms.items() if m != (lead,)})
    for m in rest.terms:
        if lead in m:
            return None
    return lead, rest.scale(-1 / c.const_term())


def quotient_by_equations(J: Dga, eqs: Sequence[AlgElem]) -> Optional[Dga]:
    """J modulo the D-ideal of the equations, presented by rewriting on a
    solitary leading coordinate per equation; None when that is not possible."""
    rules: List[Rule] = []
    Q = J
    for F in eqs:
        F = Q.reduce(F)
        if not F:
            continue
        found = _solitary_leading(F)
        if found is None:
            return None
        lead, rhs = found
        rules.append(Rule((lead,), rhs))
        try:
            Q = Dga(J.nvars, J.gens, J.d_gen, rules, name=f"{J.name}/(F)", hints=J.hints,
                    var_names=J.var_names)
        except RelationError:
            return None
    return Q


def quotient_slice_dims(Q: Dga, t: Truncation) -> List[int]:
    """Degree-0 window dimension of a presented quotient, per polynomial degree."""
    W = Weights(Q)
    dims = [len(enumerate_basis(Q, 0, replace(t, d_x=w), W)) for w in range(t.d_x + 1)]
    return [dims[0]] + [b - a for a, b in zip(dims, dims[1:])]


@dataclass
class KTVerification:
    report: HomologyReport
    h0_slices: List[int]
    quotient_slices: Optional[List[int]]
    note: str = ""

    @property
    def h0_matches(self) -> Optional[bool]:
        if self.quotient_slices is None:
            return None
        return self.h0_slices == self.quotient_slices

    @property
    def acyclic(self) -> bool:
        return all(d.h == 0 for d in self.report.degrees if d.n >= 1 and not d.flagged)

    def to_json(self) -> dict:
        return {"homology": self.report.to_json(), "h0_slices": self.h0_slices,
                "quotient_slices": self.quotient_slices, "h0_matches": self.h0_matches,
                "acyclic": self.acyclic, "note": self.note}


def kt_verify(kt: KTComplex, t: Truncation) -> KTVerification:
    rep = homology(kt.dga, t, reps=False)
    h0 = slice_dims(kt.dga, 0, t)
    Q = quotient_by_equations(kt.jet, kt.eqs)
    if Q is None:
        return KTVerification(rep, h0, None, "no solitary leading coordinates; quotient comparison skipped")
    return KTVerification(rep, h0, quotient_slice_dims(Q, t))


def kt_as_undercategory_replacement(spec: JetSpec, eqs: Sequence[AlgElem], budget):
    """Cof-TrivFib factorization of the quotient map J -> J/(prolonged equations)."""
    from .factorization import FactorizationError, cof_trivfib
    J = jet_algebra(spec)
    Q = quotient_by_equations(J, [J.reduce(F) for F in eqs])
    if Q is None:
        raise FactorizationError("the quotient needs a solitary leading coordinate in every equation")
    quot = DgaMorphism(J, Q, {g: AlgElem.gen(g, spec.p) for g in J.gens})
    return cof_trivfib(quot, budget)
