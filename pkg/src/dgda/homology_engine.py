"""Exact homology, fibration and weak-equivalence checks on finite windows.

A window keeps the basis elements x^a * (word in d^beta g) with
    homological degree n <= N,
    A = |a| + sum wt(g)        <= d_x,
    B = sum (|beta| + ord(g))  <= r,
    L = sum len(g)             <= L.
Generator weights (wt, ord, len) are the least values dominating every term of
d(g) (and any hint carried by the algebra), so the window is a subcomplex.
When d is not homogeneous for these weights, boundaries may enter the window
from outside; a probe with a window one step larger in the offending bounds
detects that and flags the degree instead of reporting a wrong rank.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Dict, Hashable, Iterable, List, Mapping, Sequence, Tuple

from .coeff_rings import MultiIndex, Poly, add_index, indices_up_to
from .dga_core import AlgElem, Dga, DgaMorphism, Monomial, OGen
from .graded_modules import FreeDgModule, GenId, ModElem
from .linalg import Echelon, Vec, dim_in_subspace, kernel, restrict

COORDS = ("A", "B", "L")


@dataclass(frozen=True)
class Truncation:
    N: int
    d_x: int = 0
    r: int = 0
    L: int = 3

    def __post_init__(self):
        if min(self.N, self.d_x, self.r, self.L) < 0:
            raise ValueError("truncation bounds must be non-negative")

    def enlarged(self, coords: Iterable[str]) -> "Truncation":
        coords = set(coords)
        return Truncation(self.N, self.d_x + ("A" in coords), self.r + ("B" in coords), self.L + ("L" in coords))

    def as_dict(self) -> dict:
        return {"N": self.N, "d_x": self.d_x, "r": self.r, "L": self.L}


Meta = Tuple[int, int, int]


def _mmax(a: Meta, b: Meta) -> Meta:
    return (max(a[0], b[0]), max(a[1], b[1]), max(a[2], b[2]))


class Weights:
    """Window weights of the generators of one algebra."""

    def __init__(self, X: Dga):
        self.X = X
        self.meta: Dict[GenId, Meta] = {}
        self.converged = True
        self._compute()

    def term_meta(self, m: Monomial, f: Poly) -> Meta:
        a = max((sum(e) for e in f.terms), default=0)
        A = a + sum(self.meta[o.gen][0] for o in m)
        B = sum(sum(o.deco) + self.meta[o.gen][1] for o in m)
        L = sum(self.meta[o.gen][2] for o in m)
        return (A, B, L)

    def elem_meta(self, e: AlgElem) -> Meta:
        out = (0, 0, 0)
        for m, f in e.terms.items():
            out = _mmax(out, self.term_meta(m, f))
        return out

    def _compute(self) -> None:
        X = self.X
        for g in X.gens:
            h = X.hints.get(g, (0, 0, 1))
            self.meta[g] = (h[0], h[1], max(1, h[2]))
        for _ in range(64):
            changed = False
            for g in X.gens:
                new = _mmax(self.meta[g], self.elem_meta(X.d_gen[g]))
                if new != self.meta[g]:
                    self.meta[g] = new
                    changed = True
            if not changed:
                return
        self.converged = False

    def homogeneous_coords(self) -> set:
        """Coordinates in which d preserves the weight exactly."""
        X = self.X
        ok = set(COORDS)
        if not self.converged:
            return set()
        for g in X.gens:
            target = self.meta[g]
            for m, f in X.d_gen[g].terms.items():
                tm = self.term_meta(m, f)
                lo = min((sum(e) for e in f.terms), default=0)
                for i, c in enumerate(COORDS):
                    if tm[i] != target[i]:
                        ok.discard(c)
                if lo != max((sum(e) for e in f.terms), default=0):
                    ok.discard("A")
                if X.nvars and not f.is_const():
                    # d^beta hits the coefficient and lowers A and B together
                    ok.discard("A")
                    ok.discard("B")
        for r in X.relations:
            lm = self.term_meta(r.lhs, Poly.one(X.nvars))
            for m, f in r.rhs.terms.items():
                tm = self.term_meta(m, f)
                for i, c in enumerate(COORDS):
                    if tm[i] != lm[i]:
                        ok.discard(c)
                if X.nvars and not f.is_const():
                    ok.discard("A")
                    ok.discard("B")
        return ok


def _candidates(X: Dga, W: Weights, n: int, t: Truncation) -> List[Tuple[OGen, Meta]]:
    out = []
    for g in X.gens:
        if g.degree > n:
            continue
        wt, od, ln = W.meta[g]
        if wt > t.d_x or od > t.r or ln > t.L:
            continue
        for beta in indices_up_to(X.nvars, t.r - od):
            out.append((OGen(g, beta), (wt, od + sum(beta), ln)))
    out.sort(key=lambda c: c[0])
    return out


Key = Tuple[Monomial, MultiIndex]


def enumerate_basis(X: Dga, n: int, t: Truncation, weights: Weights | None = None) -> List[Key]:
    """Window basis of degree n: pairs (monomial, exponent of x)."""
    W = weights or Weights(X)
    cands = _candidates(X, W, n, t)
    words: List[Tuple[Monomial, int]] = []

    def rec(start: int, word: list, deg: int, A: int, B: int, L: int) -> None:
        if deg == n:
            words.append((tuple(word), A))
        for i in range(start, len(cands)):
            o, (wa, wb, wl) = cands[i]
            nd = deg + o.gen.degree
            if nd > n or A + wa > t.d_x or B + wb > t.r or L + wl > t.L:
                continue
            word.append(o)
            rec(i + 1 if o.odd else i, word, nd, A + wa, B + wb, L + wl)
            word.pop()

    rec(0, [], 0, 0, 0, 0)
    out: List[Key] = []
    for m, A in words:
        if not X.is_reduced(m):
            continue
        for a in indices_up_to(X.nvars, t.d_x - A):
            out.append((m, a))
    return out


def key_to_elem(k: Key, nvars: int, c=1) -> AlgElem:
    return AlgElem.mono(k[0], nvars, Poly.monomial(k[1], c) if nvars else Poly.const(c, 0))


def elem_coords(e: AlgElem) -> Dict[Key, Fraction]:
    out: Dict[Key, Fraction] = {}
    for m, f in e.terms.items():
        for a, c in f.terms.items():
            out[(m, a)] = c
    return out


def shifted_coords(e: AlgElem, a: MultiIndex) -> Dict[Key, Fraction]:
    out: Dict[Key, Fraction] = {}
    for m, f in e.terms.items():
        for b, c in f.terms.items():
            out[(m, add_index(a, b))] = c
    return out


# -- generic window complexes -------------------------------------------------

class WindowComplex:
    """A chain complex presented through finite window bases."""
    homogeneous: set = set(COORDS)

    def basis(self, n: int, t: Truncation) -> list:
        raise NotImplementedError

    def boundary(self, key) -> Dict[Hashable, Fraction]:
        raise NotImplementedError

    def to_elem(self, vec: Dict[Hashable, Fraction]):
        return vec


class DgaComplex(WindowComplex):
    def __init__(self, X: Dga):
        self.X = X
        self.W = Weights(X)
        self.homogeneous = self.W.homogeneous_coords()
        self._basis: Dict[Tuple[int, Truncation], list] = {}

    def basis(self, n: int, t: Truncation) -> list:
        if n < 0:
            return []
        k = (n, t)
        if k not in self._basis:
            self._basis[k] = enumerate_basis(self.X, n, t, self.W)
        return self._basis[k]

    def boundary(self, key: Key) -> Dict[Key, Fraction]:
        m, a = key
        return shifted_coords(self.X.d_mono(m), a)

    def to_elem(self, vec) -> AlgElem:
        out = AlgElem.zero(self.X.nvars)
        for k, c in vec.items():
            out = out + key_to_elem(k, self.X.nvars, c)
        return out


class ConeComplex(WindowComplex):
    """Cone(f)_n = A_{n-1} + B_n, d(a, b) = (-d a, f a + d b)."""

    def __init__(self, f: DgaMorphism):
        self.f = f
        self.ca = DgaComplex(f.source)
        self.cb = DgaComplex(f.target)
        self.homogeneous = self.ca.homogeneous & self.cb.homogeneous & _morphism_homogeneous(f, self.ca.W, self.cb.W)

    def basis(self, n: int, t: Truncation) -> list:
        return [("a",) + k for k in self.ca.basis(n - 1, t)] + [("b",) + k for k in self.cb.basis(n, t)]

    def boundary(self, key) -> Dict[Hashable, Fraction]:
        side, m, a = key
        out: Dict[Hashable, Fraction] = {}
        if side == "a":
            for k, c in self.ca.boundary((m, a)).items():
                out[("a",) + k] = -c
            for k, c in shifted_coords(self.f.image_mono(m), a).items():
                out[("b",) + k] = out.get(("b",) + k, 0) + c
        else:
            for k, c in self.cb.boundary((m, a)).items():
                out[("b",) + k] = c
        return {k: c for k, c in out.items() if c}


def _morphism_homogeneous(f: DgaMorphism, WA: Weights, WB: Weights) -> set:
    ok = set(COORDS)
    for g in f.source.gens:
        target = WA.meta[g]
        for m, p in f.assign[g].terms.items():
            tm = WB.term_meta(m, p)
            for i, c in enumerate(COORDS):
                if tm[i] != target[i]:
                    ok.discard(c)
            if f.source.nvars and not p.is_const():
                ok.discard("A")
                ok.discard("B")
    return ok


class ModuleComplex(WindowComplex):
    """A free dg D-module as a complex of Q-vector spaces: basis x^a d^beta g."""

    def __init__(self, V: FreeDgModule):
        self.V = V
        self.homogeneous = set(COORDS)
        for g in V.gens:
            for h, op in V.d[g].terms.items():
                if any(sum(a) for (a, _b) in op.terms) or any(sum(b) for (_a, b) in op.terms):
                    self.homogeneous = set()

    def basis(self, n: int, t: Truncation) -> list:
        p = self.V.nvars
        out = []
        for g in self.V.gens:
            if g.degree != n:
                continue
            for beta in indices_up_to(p, t.r):
                for a in indices_up_to(p, t.d_x):
                    out.append((g, a, beta))
        return out

    def boundary(self, key) -> Dict[Hashable, Fraction]:
        from .coeff_rings import WeylOp, weyl_mul
        g, a, beta = key
        op = WeylOp.monomial(a, beta)
        out: Dict[Hashable, Fraction] = {}
        for h, c in self.V.d[g].terms.items():
            for (a2, b2), v in weyl_mul(op, c).terms.items():
                out[(h, a2, b2)] = out.get((h, a2, b2), 0) + v
        return {k: v for k, v in out.items() if v}


# -- reports ------------------------------------------------------------------

@dataclass
class DegreeReport:
    n: int
    dim: int
    ker: int
    im: int
    h: int
    flagged: bool
    reps: list = field(default_factory=list)


@dataclass
class HomologyReport:
    truncation: Truncation
    degrees: List[DegreeReport]

    def h(self, n: int) -> int:
        return self[n].h

    def __getitem__(self, n: int) -> DegreeReport:
        for d in self.degrees:
            if d.n == n:
                return d
        raise KeyError(n)

    def ranks(self) -> Dict[int, int]:
        return {d.n: d.h for d in self.degrees}

    def flagged(self) -> List[int]:
        return [d.n for d in self.degrees if d.flagged]

    def to_json(self) -> dict:
        return {str(d.n): {"ker": d.ker, "im": d.im, "h": d.h, "flagged": d.flagged} for d in self.degrees}

    def table(self) -> str:
        lines = ["deg\tdim\tker\tim\th"]
        for d in self.degrees:
            h = "?" if d.flagged else str(d.h)
            lines.append(f"{d.n}\t{d.dim}\t{d.ker}\t{d.im}\t{h}")
        return "\n".join(lines)


class _Indexer:
    def __init__(self):
        self.idx: Dict[Hashable, int] = {}

    def __call__(self, k) -> int:
        i = self.idx.get(k)
        if i is None:
            i = len(self.idx)
            self.idx[k] = i
        return i


def _columns(cx: WindowComplex, basis: list, ix: _Indexer) -> List[Vec]:
    return [{ix(k): c for k, c in cx.boundary(b).items()} for b in basis]


def _intersection_basis(cols: List[Vec], inside) -> List[Vec]:
    """Basis of span(cols) meet the coordinate subspace picked by inside."""
    outer = [restrict(c, lambda j: not inside(j)) for c in cols]
    out = []
    for comb in kernel(outer):
        v: Vec = {}
        for j, a in comb.items():
            for i, x in cols[j].items():
                v[i] = v.get(i, 0) + a * x
        v = {i: x for i, x in v.items() if x}
        if v:
            out.append(v)
    return out


def homology_of(cx: WindowComplex, t: Truncation, degrees: Sequence[int] | None = None,
                probe: bool = True, reps: bool = True) -> HomologyReport:
    degrees = list(range(t.N + 1)) if degrees is None else list(degrees)
    bigger = t.enlarged(set(COORDS) - cx.homogeneous)
    need_probe = probe and bigger != t
    out = []
    for n in degrees:
        ix = _Indexer()
        Wn = cx.basis(n, t)
        win = {ix(k) for k in Wn}
        inside = win.__contains__
        cols_n = _columns(cx, Wn, ix) if n >= 1 else [{} for _ in Wn]
        kvecs = kernel(cols_n)
        W1 = cx.basis(n + 1, t)
        cols_up = _columns(cx, W1, ix)
        leak = any(not inside(j) for c in cols_up for j in c)
        if leak:
            im_basis = _intersection_basis(cols_up, inside)
            im = len(im_basis)
        else:
            im_basis = cols_up
            im = dim_in_subspace(cols_up, inside)
        flagged = leak
        if need_probe and not flagged:
            Wp = cx.basis(n + 1, bigger)
            if len(Wp) > len(W1):
                im_plus = dim_in_subspace(_columns(cx, Wp, ix), inside)
                flagged = im_plus > im
        h = len(kvecs) - im
        rep_list = []
        if reps and h > 0:
            e = Echelon(track=False)
            for v in im_basis:
                e.add(v)
            for kv in kvecs:
                vec: Vec = {}
                for j, a in kv.items():
                    vec[ix(Wn[j])] = vec.get(ix(Wn[j]), 0) + a
                if e.add(vec) is None:
                    back = {k: vec[ix(k)] for k in Wn if ix(k) in vec and vec[ix(k)]}
                    rep_list.append(cx.to_elem(back))
        out.append(DegreeReport(n, len(Wn), len(kvecs), im, h, flagged, rep_list))
    return HomologyReport(t, out)


def homology(X: Dga, t: Truncation, probe: bool = True, reps: bool = True) -> HomologyReport:
    return homology_of(DgaComplex(X), t, probe=probe, reps=reps)


def module_homology(V: FreeDgModule, t: Truncation) -> HomologyReport:
    return homology_of(ModuleComplex(V), t, reps=False)


def slice_dims(X: Dga, n: int, t: Truncation) -> List[int]:
    """dim H_n in each polynomial-weight slice A = 0..d_x (graded complexes)."""
    cx = DgaComplex(X)
    prev = 0
    out = []
    for w in range(t.d_x + 1):
        tw = replace(t, d_x=w)
        hw = homology_of(cx, tw, degrees=[n], reps=False)[n].h
        out.append(hw - prev)
        prev = hw
    return out


def matrix_of_d(X: Dga, n: int, t: Truncation):
    """(source basis, target basis, columns as dicts, leaked) for d_n on the window."""
    cx = DgaComplex(X)
    src = cx.basis(n, t)
    tgt = cx.basis(n - 1, t)
    pos = {k: i for i, k in enumerate(tgt)}
    cols = []
    leaked = False
    for k in src:
        col = {}
        for k2, c in cx.boundary(k).items():
            if k2 in pos:
                col[pos[k2]] = c
            else:
                leaked = True
        cols.append(col)
    return src, tgt, cols, leaked


# -- morphism checks -------------------------------------------------------------

@dataclass
class CheckReport:
    ok: bool
    per_degree: Dict[int, dict]
    inconclusive: List[int] = field(default_factory=list)

    def to_json(self) -> dict:
        return {"ok": self.ok, "inconclusive": self.inconclusive,
                "degrees": {str(k): v for k, v in sorted(self.per_degree.items())}}


def is_fibration(f: DgaMorphism, t: Truncation) -> CheckReport:
    cs, ct = DgaComplex(f.source), DgaComplex(f.target)
    per: Dict[int, dict] = {}
    ok = True
    for n in range(1, t.N + 1):
        ix = _Indexer()
        tgt = ct.basis(n, t)
        win = {ix(k) for k in tgt}
        cols = []
        for m, a in cs.basis(n, t):
            cols.append({ix(k): c for k, c in shifted_coords(f.image_mono(m), a).items()})
        r = dim_in_subspace(cols, win.__contains__)
        surj = r == len(tgt)
        per[n] = {"target_dim": len(tgt), "rank": r, "surjective": surj}
        ok = ok and surj
    return CheckReport(ok, per)


def is_weak_equivalence(f: DgaMorphism, t: Truncation) -> CheckReport:
    """Cone of f acyclic in degrees 0..N-1; flagged degrees are inconclusive."""
    rep = homology_of(ConeComplex(f), t, degrees=range(0, t.N), reps=False)
    per = {d.n: {"h": d.h, "flagged": d.flagged} for d in rep.degrees}
    bad = [d.n for d in rep.degrees if not d.flagged and d.h != 0]
    inc = [d.n for d in rep.degrees if d.flagged]
    return CheckReport(not bad, per, inc)


def cone_homology(f: DgaMorphism, t: Truncation) -> HomologyReport:
    return homology_of(ConeComplex(f), t, degrees=range(0, t.N), reps=False)


def is_cofibration_module(source: FreeDgModule, target: FreeDgModule, images: Mapping[GenId, ModElem],
                          t: Truncation | None = None) -> CheckReport:
    """Injective on window slices and split by a triangular change of basis,
    so the cokernel is free on the remaining target generators."""
    from .coeff_rings import WeylOp, weyl_mul
    t = t or Truncation(max([g.degree for g in target.gens] + [0]), 1, 1, 1)
    per: Dict[int, dict] = {}
    ok = True
    # chain map on generators
    for g in source.gens:
        lhs = target.apply_d(images.get(g, _zero_mod(target)))
        rhs = _zero_mod(target)
        for h, op in source.d[g].terms.items():
            rhs = rhs + images.get(h, _zero_mod(target)).act(op)
        if lhs != rhs:
            per.setdefault(g.degree, {})["chain_map"] = False
            ok = False
    scx = ModuleComplex(source)
    for n in range(t.N + 1):
        ix = _Indexer()
        cols = []
        for g, a, beta in scx.basis(n, t):
            op = WeylOp.monomial(a, beta)
            col = {}
            for h, c in images.get(g, _zero_mod(target)).terms.items():
                for key, v in weyl_mul(op, c).terms.items():
                    col[ix((h,) + key)] = v
            cols.append(col)
        e = Echelon(track=False)
        inj = all(e.add(c) is None for c in cols)
        per.setdefault(n, {})["injective"] = inj
        ok = ok and inj
    # triangular unit-leading images give a complement basis
    used = set()
    for g in source.gens:
        img = images.get(g, _zero_mod(target))
        if not img.terms:
            ok = False
            per.setdefault(g.degree, {})["free_cokernel"] = False
            continue
        lead = max(img.terms)
        op = img.terms[lead]
        unit = op.nvars == 0 or all(not any(a) and not any(b) for (a, b) in op.terms)
        if not unit or lead in used:
            ok = False
            per.setdefault(g.degree, {})["free_cokernel"] = False
        used.add(lead)
    return CheckReport(ok, per)


def _zero_mod(V: FreeDgModule):
    from .graded_modules import ModElem
    return ModElem(V.nvars)
