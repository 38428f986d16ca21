"""The two factorizations of a morphism of differential graded D-algebras,
pushouts of generating cofibrations, the relative Sullivan recognizer, the
comparison maps between factorizations, and cofibrant replacement.

Index families are finite: target elements b, cycles and critical pairs come
from an EnumerationBudget, by default read off a truncation window.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence, Tuple, Union

from .dga_core import (AlgElem, ChainMapError, Dga, DgaMorphism, base_algebra, free_algebra,
                       inclusion, rsda_extend_differential, rsda_extend_morphism, unit_morphism)
from .graded_modules import (CYCLE, DISC_BOTTOM, DISC_TOP, SPHERE, GenId, GenKind, disc,
                             intern_payload, pair_kind)
from .homology_engine import (DgaComplex, Truncation, Weights, _Indexer, elem_coords, homology,
                              key_to_elem)
from .linalg import Echelon, kernel


class FactorizationError(ValueError):
    pass


class BudgetError(FactorizationError):
    pass


class BudgetClosureError(FactorizationError):
    def __init__(self, msg: str, missing: dict):
        super().__init__(msg)
        self.missing = missing


PairHook = Callable[[int, "FactorizationResult"], List[Tuple[AlgElem, AlgElem]]]


@dataclass
class EnumerationBudget:
    """Finite surrogate for the index families. None means: read off the window."""
    truncation: Truncation
    bs: Optional[Dict[int, List[AlgElem]]] = None
    cycles: Optional[Dict[int, List[AlgElem]]] = None
    stages: int = 1
    pairs: Union[str, Dict[int, List[Tuple[AlgElem, AlgElem]]]] = "basis"
    extra_bs: Dict[int, List[AlgElem]] = field(default_factory=dict)
    extra_cycles: Dict[int, List[AlgElem]] = field(default_factory=dict)
    pair_hook: Optional[PairHook] = None


@dataclass
class StageState:
    k: int
    algebra: Dga
    q: DgaMorphism
    added: List[GenId]
    pairs: List[Tuple[AlgElem, AlgElem]] = field(default_factory=list)


@dataclass
class FactorizationResult:
    kind: str
    phi: DgaMorphism
    middle: Dga
    left: DgaMorphism
    right: DgaMorphism
    stages: List[StageState]
    index: Dict[GenId, tuple]

    def lookup(self, kind: GenKind, degree: int, payload: str) -> Optional[GenId]:
        return self._by_payload().get((kind, degree, payload))

    def _by_payload(self):
        cache = getattr(self, "_payload_cache", None)
        if cache is None or len(cache) != len(self.index):
            cache = {(g.kind, g.degree, g.payload): g for g in self.index}
            self._payload_cache = cache
        return cache

    def composite_residues(self) -> Dict[GenId, AlgElem]:
        """right o left - phi on generators of the source."""
        out = {}
        for g in self.phi.source.gens:
            diff = self.right.apply(self.left.assign[g]) - self.phi.assign[g]
            if diff:
                out[g] = diff
        return out

    def stage_coherence(self) -> List[str]:
        problems = []
        for prev, cur in zip(self.stages, self.stages[1:]):
            for g in prev.algebra.gens:
                if cur.algebra.d_gen[g] != prev.algebra.d_gen[g]:
                    problems.append(f"stage {cur.k}: differential of {g.label()} changed")
                if cur.q.assign[g] != prev.q.assign[g]:
                    problems.append(f"stage {cur.k}: q({g.label()}) changed")
        return problems

    def stage_log(self) -> List[dict]:
        out = []
        for st in self.stages:
            added = []
            for g in st.added:
                idx = self.index[g]
                entry = {"gen": g.label(), "degree": g.degree, "kind": str(g.kind)}
                if idx[0] in ("top", "bottom", "cycle"):
                    entry["index"] = idx[1].to_str(self.middle.var_names)
                elif idx[0] == "pair":
                    entry["sigma"] = idx[2].to_str(self.middle.var_names)
                    entry["b"] = idx[3].to_str(self.middle.var_names)
                added.append(entry)
            out.append({"stage": st.k, "added": added})
        return out


# -- helpers -------------------------------------------------------------------

def _payload(tag: str, *elems: AlgElem) -> str:
    return intern_payload(tag + ":" + "|".join(e.key() for e in elems))


def _homogeneous_degree(e: AlgElem, what: str) -> Optional[int]:
    try:
        return e.degree()
    except ValueError:
        raise BudgetError(f"{what} is not homogeneous: {e.to_str()}")


def window_elements(B: Dga, n: int, t: Truncation) -> List[AlgElem]:
    return [key_to_elem(k, B.nvars) for k in DgaComplex(B).basis(n, t)]


def window_cycles(B: Dga, n: int, t: Truncation) -> List[AlgElem]:
    cx = DgaComplex(B)
    basis = cx.basis(n, t)
    ix = _Indexer()
    cols = [{ix(k): c for k, c in cx.boundary(b).items()} for b in basis] if n else [{} for _ in basis]
    out = []
    for vec in kernel(cols):
        out.append(cx.to_elem({basis[j]: c for j, c in vec.items()}))
    return out


def default_bs(B: Dga, t: Truncation) -> Dict[int, List[AlgElem]]:
    return {n: window_elements(B, n, t) for n in range(1, t.N + 1)}


def default_cycles(B: Dga, t: Truncation) -> Dict[int, List[AlgElem]]:
    return {n: window_cycles(B, n, t) for n in range(0, t.N + 1)}


def class_representatives(B: Dga, t: Truncation) -> Dict[int, List[AlgElem]]:
    rep = homology(B, t)
    return {d.n: list(d.reps) for d in rep.degrees}


def _merge(base: Dict[int, List[AlgElem]], extra: Dict[int, List[AlgElem]]) -> Dict[int, List[AlgElem]]:
    out = {n: list(v) for n, v in base.items()}
    for n, v in extra.items():
        out.setdefault(n, []).extend(v)
    return out


def _disc_gens(B: Dga, bs: Dict[int, List[AlgElem]], start: int, WB: Weights):
    """Generators s^-1 I_b, I_b for the budget, skipping repeated indices."""
    tops, bottoms, index, hints = [], [], {}, {}
    seen = set()
    ordinal = start
    for n in sorted(bs):
        for b in bs[n]:
            b = B.reduce(b)
            B.require(b, "budget element")
            deg = _homogeneous_degree(b, "budget element")
            if deg is not None and deg != n:
                raise BudgetError(f"budget element {b.to_str()} listed in degree {n} has degree {deg}")
            if n < 1:
                raise BudgetError("disc generators are indexed by elements of positive degree")
            pl = _payload("b", b)
            if (n, pl) in seen:
                continue
            seen.add((n, pl))
            top = GenId(DISC_TOP, n, ordinal, pl, f"I_b{ordinal}")
            bot = GenId(DISC_BOTTOM, n - 1, ordinal, pl, f"sI_b{ordinal}")
            ordinal += 1
            meta = WB.elem_meta(b)
            hints[top] = hints[bot] = meta
            tops.append(top)
            bottoms.append(bot)
            index[top] = ("top", b)
            index[bot] = ("bottom", b)
    return tops, bottoms, index, hints, ordinal


def _check_phi(phi: DgaMorphism) -> None:
    res = phi.chain_residues()
    if res:
        g = next(iter(res))
        raise ChainMapError(f"phi is not a chain map at {g.label()}", g, res[g])


# -- TrivCof-Fib ------------------------------------------------------------------

def trivcof_fib(phi: DgaMorphism, budget: EnumerationBudget) -> FactorizationResult:
    _check_phi(phi)
    A, B = phi.source, phi.target
    t = budget.truncation
    bs = default_bs(B, t) if budget.bs is None else budget.bs
    bs = _merge(bs, budget.extra_bs)
    WB = Weights(B)
    tops, bottoms, index, hints, _ = _disc_gens(B, bs, 0, WB)
    R1 = rsda_extend_differential(A, bottoms, {}, hints=hints)
    M = rsda_extend_differential(R1, tops, {g: AlgElem.gen(b, A.nvars) for g, b in zip(tops, bottoms)},
                                 name=f"{A.name}(x)S(U)", hints=hints)
    qvals = {}
    for g, idx in index.items():
        qvals[g] = idx[1] if idx[0] == "top" else B.d(idx[1])
    i = inclusion(A, M)
    p = rsda_extend_morphism(phi, M, qvals)
    for g in A.gens:
        index[g] = ("base",)
    res = FactorizationResult("TrivCofFib", phi, M, i, p, [StageState(0, M, p, tops + bottoms)], index)
    if res.composite_residues():
        raise FactorizationError("p o i differs from phi")
    return res


# -- Cof-TrivFib ------------------------------------------------------------------

def critical_pairs(R: Dga, q: DgaMorphism, n: int, t: Truncation, mode: str = "basis"
                   ) -> List[Tuple[AlgElem, AlgElem]]:
    """Pairs (sigma, b): sigma a window cycle of R in degree n, d_B b = q(sigma).
    mode 'basis' keeps sigma independent modulo window boundaries, 'all' keeps
    a basis of the whole critical space."""
    B = q.target
    cr, cb = DgaComplex(R), DgaComplex(B)
    Wn = cr.basis(n, t)
    if not Wn:
        return []
    ixr = _Indexer()
    cols = [{ixr(k): c for k, c in cr.boundary(b).items()} for b in Wn] if n else [{} for _ in Wn]
    kvecs = kernel(cols)
    if not kvecs:
        return []
    sigmas = [cr.to_elem({Wn[j]: c for j, c in v.items()}) for v in kvecs]
    WB1 = cb.basis(n + 1, t)
    ixb = _Indexer()
    big = [{ixb(k): c for k, c in elem_coords(q.apply(s)).items()} for s in sigmas]
    big += [{ixb(k): -c for k, c in cb.boundary(e).items()} for e in WB1]
    nk = len(sigmas)
    sol = kernel(big)
    # independent sigma-parts, first solution kept
    ech = Echelon(track=False)
    if mode == "basis":
        ups = cr.basis(n + 1, t)
        for col in [{ixr(k): c for k, c in cr.boundary(b).items()} for b in ups]:
            ech.add(col)
    elif mode != "all":
        raise BudgetError(f"unknown pair strategy {mode!r}")
    out = []
    for v in sol:
        cpart = {j: c for j, c in v.items() if j < nk}
        if not cpart:
            continue
        sigma = AlgElem.zero(R.nvars)
        for j, c in cpart.items():
            sigma = sigma + sigmas[j].scale(c)
        svec = {ixr(k): c for k, c in elem_coords(sigma).items()}
        if ech.add(svec) is not None:
            continue
        b = AlgElem.zero(R.nvars)
        for j, c in v.items():
            if j >= nk:
                b = b + key_to_elem(WB1[j - nk], R.nvars, c)
        out.append((sigma, B.reduce(b)))
    return out


def _validate_pair(R: Dga, q: DgaMorphism, sigma: AlgElem, b: AlgElem, k: int) -> int:
    B = q.target
    R.require(sigma, f"stage-{k} cycle")
    B.require(b, f"stage-{k} witness")
    n = _homogeneous_degree(sigma, "cycle")
    nb = _homogeneous_degree(b, "witness")
    if n is None:
        n = (nb - 1) if nb is not None else 0
    if nb is not None and nb != n + 1:
        raise BudgetError(f"pair degrees do not match: sigma in {n}, b in {nb}")
    if R.d(sigma):
        raise BudgetError(f"stage-{k} pair rejected: {sigma.to_str()} is not a cycle "
                          f"(d = {R.d(sigma).to_str()})")
    res = B.d(b) - q.apply(sigma)
    if res:
        raise BudgetError(f"stage-{k} pair rejected: d_B b - q(sigma) = {res.to_str()}")
    return n


def cof_trivfib(phi: DgaMorphism, budget: EnumerationBudget, minimal: bool = False) -> FactorizationResult:
    _check_phi(phi)
    A, B = phi.source, phi.target
    t = budget.truncation
    p = A.nvars
    WB = Weights(B)
    bs = _merge(default_bs(B, t) if budget.bs is None else budget.bs, budget.extra_bs)
    if budget.cycles is not None:
        cyc = budget.cycles
    elif minimal:
        cyc = class_representatives(B, t)
    else:
        cyc = default_cycles(B, t)
    cyc = _merge(cyc, budget.extra_cycles)
    tops, bottoms, index, hints, ordinal = _disc_gens(B, bs, 0, WB)
    cgens, seen = [], set()
    for n in sorted(cyc):
        for beta in cyc[n]:
            beta = B.reduce(beta)
            B.require(beta, "cycle")
            deg = _homogeneous_degree(beta, "cycle")
            if deg is not None and deg != n:
                raise BudgetError(f"cycle {beta.to_str()} listed in degree {n} has degree {deg}")
            if B.d(beta):
                raise BudgetError(f"budgeted element {beta.to_str()} is not a cycle")
            pl = _payload("c", beta)
            if (n, pl) in seen:
                continue
            seen.add((n, pl))
            g = GenId(CYCLE, n, ordinal, pl, f"I_c{ordinal}")
            ordinal += 1
            hints[g] = WB.elem_meta(beta)
            cgens.append(g)
            index[g] = ("cycle", beta)
    R = rsda_extend_differential(A, bottoms + cgens, {}, hints=hints)
    R = rsda_extend_differential(R, tops, {g: AlgElem.gen(b, p) for g, b in zip(tops, bottoms)},
                                 name="R0", hints=hints)
    qvals = {}
    for g, idx in index.items():
        qvals[g] = B.d(idx[1]) if idx[0] == "bottom" else idx[1]
    q = rsda_extend_morphism(phi, R, qvals)
    for g in A.gens:
        index[g] = ("base",)
    stages = [StageState(0, R, q, bottoms + cgens + tops)]
    result = FactorizationResult("MinimalCofTrivFib" if minimal else "CofTrivFib", phi, R,
                                 inclusion(A, R), q, stages, index)
    for k in range(1, budget.stages + 1):
        if isinstance(budget.pairs, dict):
            pairs = list(budget.pairs.get(k, []))
        elif budget.pairs == "none":
            pairs = []
        else:
            pairs = []
            for n in range(0, t.N):
                pairs.extend(critical_pairs(R, q, n, t, budget.pairs))
        if budget.pair_hook is not None:
            pairs.extend(budget.pair_hook(k, result))
        new, dvals, qv, seen = [], {}, {}, set()
        WR = Weights(R)
        for sigma, b in pairs:
            sigma, b = R.reduce(sigma), B.reduce(b)
            n = _validate_pair(R, q, sigma, b, k)
            pl = _payload("p", sigma, b)
            if pl in seen:
                continue
            seen.add(pl)
            g = GenId(pair_kind(k), n + 1, ordinal, pl, f"I{k}_{ordinal}")
            ordinal += 1
            ms, mb = WR.elem_meta(sigma), WB.elem_meta(b)
            hints[g] = tuple(max(x, y) for x, y in zip(ms, mb))
            new.append(g)
            dvals[g] = sigma
            qv[g] = b
            index[g] = ("pair", k, sigma, b)
        R = rsda_extend_differential(R, new, dvals, name=f"R{k}", hints=hints)
        q = rsda_extend_morphism(q, R, qv)
        stages.append(StageState(k, R, q, new, [(dvals[g], qv[g]) for g in new]))
        result.middle, result.right, result.left = R, q, inclusion(A, R)
    result.middle.name = f"{A.name}(x)S(V)"
    if result.composite_residues():
        raise FactorizationError("q o j differs from phi")
    return result


def minimal_variant(phi: DgaMorphism, budget: EnumerationBudget) -> FactorizationResult:
    return cof_trivfib(phi, budget, minimal=True)


# -- pushouts of generating cofibrations ---------------------------------------------

@dataclass
class PushoutData:
    n: int
    T: Dga
    kappa: AlgElem
    algebra: Dga
    disc_algebra: Dga
    new_gen: GenId
    top: GenId
    bottom: Optional[GenId]
    i: DgaMorphism
    j: DgaMorphism


def disc_algebra(n: int, nvars: int) -> Dga:
    return free_algebra(disc(n, nvars), name=f"S(D^{n})")


def pushout_gen_cof(n: int, T: Dga, kappa: AlgElem) -> PushoutData:
    p = T.nvars
    kappa = T.reduce(kappa)
    T.require(kappa, "kappa")
    if n == 0 and kappa:
        raise FactorizationError("for n = 0 the attaching element is 0")
    deg = _homogeneous_degree(kappa, "kappa")
    if deg is not None and deg != n - 1:
        raise FactorizationError(f"kappa has degree {deg}, expected {n - 1}")
    if T.d(kappa):
        raise FactorizationError(f"kappa is not a cycle: d = {T.d(kappa).to_str()}")
    used = sum(1 for g in T.gens if g.kind == SPHERE)
    e = GenId(SPHERE, n, used, _payload(f"po{n}", kappa), f"1_{n}" + (f".{used}" if used else ""))
    P = rsda_extend_differential(T, [e], {e: kappa}, name=f"{T.name}#S({n})")
    D = disc_algebra(n, p)
    top = next(g for g in D.gens if g.kind in (DISC_TOP, SPHERE))
    bottom = next((g for g in D.gens if g.kind == DISC_BOTTOM), None)
    jmap = {top: AlgElem.gen(e, p)}
    if bottom is not None:
        jmap[bottom] = kappa
    i = inclusion(T, P)
    j = DgaMorphism(D, P, jmap)
    return PushoutData(n, T, kappa, P, D, e, top, bottom, i, j)


def pushout_universal(i2: DgaMorphism, j2: DgaMorphism, data: PushoutData) -> DgaMorphism:
    """The map out of the pushout: t (x) x_1..x_k -> i'(t) * j'(x_1 I_n) * ..."""
    if i2.source is not data.T and i2.source.gens != data.T.gens:
        raise FactorizationError("i' must start at the pushout base")
    if i2.target is not j2.target:
        raise FactorizationError("i' and j' need a common target")
    if data.bottom is not None:
        mism = j2.assign[data.bottom] - i2.apply(data.kappa)
        if mism:
            raise ChainMapError(f"j' and i' are not compatible: residue {mism.to_str()}", data.bottom, mism)
    assign = dict(i2.assign)
    assign[data.new_gen] = j2.assign[data.top]
    return DgaMorphism(data.algebra, i2.target, assign)


# -- relative Sullivan recognizer ---------------------------------------------------

def verify_rsda(iota: DgaMorphism, order: Optional[Sequence[GenId]] = None) -> dict:
    """Check that iota is A -> A (x) S(V) with d lowering for a well-order on
    the new generators: the canonical one, or an explicit list."""
    A, M = iota.source, iota.target
    report = {"inclusion": [], "well_order": True, "lowering": [], "split": True}
    for g in A.gens:
        if g not in M.gen_set or iota.assign[g] != AlgElem.gen(g, A.nvars):
            report["inclusion"].append(g.label())
        elif M.d_gen[g] != A.d_gen[g]:
            report["inclusion"].append(g.label())
    base = A.gen_set
    new = [g for g in M.gens if g not in base]
    if order is None:
        order = new
        if M.gens != sorted(set(M.gens), key=lambda g: g.sort_key):
            report["well_order"] = False
    elif sorted(order, key=lambda g: g.sort_key) != new or len(set(order)) != len(order):
        report["well_order"] = False
    rank = {g: i for i, g in enumerate(order)}
    for v in new:
        for m in M.d_gen[v].terms:
            for o in m:
                if o.gen in base:
                    report["split"] = False
                    continue
                if o.gen not in rank or v not in rank or not rank[o.gen] < rank[v]:
                    report["lowering"].append(f"d({v.label()}) uses {o.gen.label()}")
    report["ok"] = not report["inclusion"] and report["well_order"] and not report["lowering"]
    return report


# -- functoriality -------------------------------------------------------------------

def _target_gen(F2: FactorizationResult, kind: GenKind, degree: int, payload: str, what: str, shown: str):
    g = F2.lookup(kind, degree, payload)
    if g is None:
        raise BudgetClosureError(f"budget closure fails: no {kind} generator indexed by {what} = {shown}",
                                 {"kind": str(kind), "degree": degree, "index": shown})
    return g


def _omega_assign(F: FactorizationResult, F2: FactorizationResult, u: DgaMorphism, v: DgaMorphism,
                  upto: int, target: Dga) -> Dict[GenId, AlgElem]:
    p = target.nvars
    B2 = F2.phi.target
    names = target.var_names
    assign: Dict[GenId, AlgElem] = {}
    for g in F.phi.source.gens:
        assign[g] = u.assign[g]
    for st in F.stages:
        if st.k > upto:
            break
        for g in st.added:
            idx = F.index[g]
            if idx[0] in ("top", "bottom", "cycle"):
                vb = B2.reduce(v.apply(idx[1]))
                tag = "c" if idx[0] == "cycle" else "b"
                kind = {"top": DISC_TOP, "bottom": DISC_BOTTOM, "cycle": CYCLE}[idx[0]]
                h = _target_gen(F2, kind, g.degree, _payload(tag, vb), f"v({idx[1].to_str(names)})", vb.to_str(names))
            else:
                _, k, sigma, b = idx
                part = DgaMorphism(F.stages[k - 1].algebra, target, assign, check=False)
                ws = target.reduce(part.apply(sigma))
                vb = B2.reduce(v.apply(b))
                h = _target_gen(F2, pair_kind(k), g.degree, _payload("p", ws, vb),
                                f"(omega(sigma), v(b)) at stage {k}", f"({ws.to_str(names)}, {vb.to_str(names)})")
            assign[g] = AlgElem.gen(h, p)
    return assign


@dataclass
class SquareReport:
    omega: DgaMorphism
    left_residues: Dict[GenId, AlgElem]
    right_residues: Dict[GenId, AlgElem]

    @property
    def ok(self) -> bool:
        return not self.left_residues and not self.right_residues


def functorial_square(u: DgaMorphism, v: DgaMorphism, F: FactorizationResult, F2: FactorizationResult
                      ) -> SquareReport:
    phi, phi2 = F.phi, F2.phi
    for g in phi.source.gens:
        diff = v.apply(phi.assign[g]) - phi2.apply(u.assign[g])
        if diff:
            raise ChainMapError(f"square does not commute at {g.label()}: {diff.to_str()}", g, diff)
    assign = _omega_assign(F, F2, u, v, len(F.stages), F2.middle)
    omega = DgaMorphism(F.middle, F2.middle, assign)
    left = {}
    for g in phi.source.gens:
        diff = omega.apply(F.left.assign[g]) - F2.left.apply(u.assign[g])
        if diff:
            left[g] = diff
    right = {}
    for g in F.middle.gens:
        diff = F2.right.apply(omega.assign[g]) - v.apply(F.right.assign[g])
        if diff:
            right[g] = diff
    return SquareReport(omega, left, right)


def closed_budget(F: FactorizationResult, u: DgaMorphism, v: DgaMorphism, budget: EnumerationBudget
                  ) -> EnumerationBudget:
    """Budget for the primed factorization that contains the images of F's indices."""
    B2 = v.target
    extra_bs: Dict[int, List[AlgElem]] = {n: list(x) for n, x in budget.extra_bs.items()}
    extra_cyc: Dict[int, List[AlgElem]] = {n: list(x) for n, x in budget.extra_cycles.items()}
    for g, idx in F.index.items():
        if idx[0] == "top":
            extra_bs.setdefault(g.degree, []).append(B2.reduce(v.apply(idx[1])))
        elif idx[0] == "cycle":
            extra_cyc.setdefault(g.degree, []).append(B2.reduce(v.apply(idx[1])))
    for n in extra_bs:
        extra_bs[n].sort(key=lambda e: e.key())
    inner = budget.pair_hook

    def hook(k: int, partial: FactorizationResult) -> List[Tuple[AlgElem, AlgElem]]:
        out = list(inner(k, partial)) if inner else []
        if k >= len(F.stages):
            return out
        assign = _omega_assign(F, partial, u, v, k - 1, partial.middle)
        part = DgaMorphism(F.stages[k - 1].algebra, partial.middle, assign, check=False)
        for g in F.stages[k].added:
            _, kk, sigma, b = F.index[g]
            out.append((part.apply(sigma), B2.reduce(v.apply(b))))
        return out

    return EnumerationBudget(budget.truncation, budget.bs, budget.cycles, max(budget.stages, len(F.stages) - 1),
                             budget.pairs, extra_bs, extra_cyc, hook)


# -- cofibrant replacement --------------------------------------------------------------

def cofibrant_replacement(B: Dga, budget: EnumerationBudget) -> FactorizationResult:
    O = base_algebra(B.nvars, var_names=B.var_names)
    return cof_trivfib(unit_morphism(O, B), budget)
