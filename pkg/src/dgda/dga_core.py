"""Free graded-commutative algebras over O with a D-action, their differentials
and morphisms.

A free D-module D.v has O-basis d^beta v, so a monomial is a sorted word in
pairs (generator, beta). Signs come only from reordering odd factors.
"""
from __future__ import annotations

from fractions import Fraction
from itertools import permutations
from math import factorial
from typing import (Dict, Iterable, List, Mapping, NamedTuple, Optional,
                    Sequence, Tuple, Union)

from .coeff_rings import (DimensionMismatch, MultiIndex, Number, Poly, WeylOp,
                          add_index, index_le, sub_index, unit_index, zero_index)
from .graded_modules import (DifferentialError, FreeDgModule, GenId, ModElem,
                             canonical_well_order)


class OGen(NamedTuple):
    gen: GenId
    deco: MultiIndex

    @property
    def degree(self) -> int:
        return self.gen.degree

    @property
    def odd(self) -> bool:
        return self.gen.degree % 2 == 1

    def key(self) -> str:
        return self.gen.key() + ("@" + ",".join(map(str, self.deco)) if any(self.deco) else "")

    def label(self) -> str:
        if not any(self.deco):
            return self.gen.label()
        return f"{self.gen.label()}[{','.join(map(str, self.deco))}]"


Monomial = Tuple[OGen, ...]
UNIT: Monomial = ()


def mono_degree(m: Monomial) -> int:
    return sum(o.gen.degree for o in m)


def mono_key(m: Monomial) -> str:
    return "*".join(o.key() for o in m)


def order_key(m: Monomial):
    """Monomial order used for rewriting: total jet order, then length, then
    lexicographic in the canonical generator order."""
    return (sum(sum(o.deco) for o in m), len(m), tuple((o.gen.sort_key, o.deco) for o in m))


def normalize_word(word: Sequence[OGen]) -> Tuple[int, Monomial]:
    """Sort a word into canonical order; returns (sign, monomial), sign 0 if an
    odd factor repeats."""
    arr = list(word)
    sign = 1
    for i in range(1, len(arr)):
        j = i
        while j > 0 and arr[j] < arr[j - 1]:
            if arr[j].odd and arr[j - 1].odd:
                sign = -sign
            arr[j], arr[j - 1] = arr[j - 1], arr[j]
            j -= 1
    for i in range(1, len(arr)):
        if arr[i].odd and arr[i] == arr[i - 1]:
            return 0, UNIT
    return sign, tuple(arr)


def mono_mul(m1: Monomial, m2: Monomial) -> Tuple[int, Monomial]:
    if not m1:
        return 1, m2
    if not m2:
        return 1, m1
    odd1 = [o for o in m1 if o.odd]
    sign = 1
    if odd1:
        for b in m2:
            if b.odd:
                c = 0
                for a in odd1:
                    if a == b:
                        return 0, UNIT
                    if b < a:
                        c += 1
                if c & 1:
                    sign = -sign
    return sign, tuple(sorted(m1 + m2))


class AmbientError(ValueError):
    pass


class AlgElem:
    """Finite sum of Poly * Monomial."""

    __slots__ = ("nvars", "terms")

    def __init__(self, nvars: int, terms: Mapping[Monomial, Poly] | None = None):
        self.nvars = nvars
        self.terms: Dict[Monomial, Poly] = {}
        if terms:
            for m, f in terms.items():
                if f.nvars != nvars:
                    raise DimensionMismatch(f"coefficient in {f.nvars} variables, algebra in {nvars}")
                if f:
                    self.terms[m] = f

    @classmethod
    def _raw(cls, nvars: int, terms: Dict[Monomial, Poly]) -> "AlgElem":
        obj = cls.__new__(cls)
        obj.nvars = nvars
        obj.terms = terms
        return obj

    @classmethod
    def zero(cls, nvars: int) -> "AlgElem":
        return cls._raw(nvars, {})

    @classmethod
    def one(cls, nvars: int) -> "AlgElem":
        return cls.const(1, nvars)

    @classmethod
    def const(cls, c: Number, nvars: int) -> "AlgElem":
        return cls.poly(Poly.const(c, nvars))

    @classmethod
    def poly(cls, f: Poly) -> "AlgElem":
        return cls._raw(f.nvars, {UNIT: f} if f else {})

    @classmethod
    def gen(cls, g: GenId, nvars: int, deco: MultiIndex | None = None) -> "AlgElem":
        return cls._raw(nvars, {(OGen(g, deco or zero_index(nvars)),): Poly.one(nvars)})

    @classmethod
    def mono(cls, m: Monomial, nvars: int, c: Union[Number, Poly] = 1) -> "AlgElem":
        f = c if isinstance(c, Poly) else Poly.const(c, nvars)
        return cls._raw(nvars, {m: f} if f else {})

    def is_zero(self) -> bool:
        return not self.terms

    def __bool__(self) -> bool:
        return bool(self.terms)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, AlgElem):
            return NotImplemented
        return self.nvars == other.nvars and self.terms == other.terms

    def __hash__(self) -> int:
        return hash(self.key())

    def _check(self, other: "AlgElem") -> None:
        if self.nvars != other.nvars:
            raise DimensionMismatch(f"base dimension {self.nvars} != {other.nvars}")

    def __add__(self, other: "AlgElem") -> "AlgElem":
        self._check(other)
        out = dict(self.terms)
        for m, f in other.terms.items():
            g = out.get(m)
            if g is None:
                out[m] = f
            else:
                s = g + f
                if s:
                    out[m] = s
                else:
                    del out[m]
        return AlgElem._raw(self.nvars, out)

    def __neg__(self) -> "AlgElem":
        return AlgElem._raw(self.nvars, {m: -f for m, f in self.terms.items()})

    def __sub__(self, other: "AlgElem") -> "AlgElem":
        return self + (-other)

    def scale(self, c: Union[Number, Poly]) -> "AlgElem":
        if isinstance(c, Poly):
            out = {}
            for m, f in self.terms.items():
                g = f * c
                if g:
                    out[m] = g
            return AlgElem._raw(self.nvars, out)
        if not c:
            return AlgElem.zero(self.nvars)
        return AlgElem._raw(self.nvars, {m: f.scale(c) for m, f in self.terms.items()})

    def __mul__(self, other: Union["AlgElem", Number, Poly]) -> "AlgElem":
        if isinstance(other, AlgElem):
            return sym_mul(self, other)
        return self.scale(other)

    def __rmul__(self, other: Union[Number, Poly]) -> "AlgElem":
        return self.scale(other)

    def degrees(self) -> set:
        return {mono_degree(m) for m in self.terms}

    def degree(self) -> Optional[int]:
        """Homogeneous degree, None for zero; raises on inhomogeneous input."""
        ds = self.degrees()
        if not ds:
            return None
        if len(ds) > 1:
            raise ValueError(f"inhomogeneous element with degrees {sorted(ds)}")
        return ds.pop()

    def generators(self) -> set:
        return {o.gen for m in self.terms for o in m}

    def coefficient(self, m: Monomial) -> Poly:
        return self.terms.get(m, Poly(self.nvars))

    def sorted_terms(self) -> list:
        return sorted(self.terms.items(), key=lambda t: order_key(t[0]))

    def key(self) -> str:
        """Canonical serialization of the normal form."""
        return "|".join(f"{mono_key(m)}={f.key()}" for m, f in self.sorted_terms())

    def to_str(self, var_names: Sequence[str] | None = None) -> str:
        if not self.terms:
            return "0"
        parts = []
        for m, f in self.sorted_terms():
            word = "*".join(o.label() for o in m)
            if not word:
                parts.append(f.to_str(var_names))
            elif f == Poly.one(self.nvars):
                parts.append(word)
            elif f == Poly.const(-1, self.nvars):
                parts.append("-" + word)
            elif len(f.terms) == 1:
                parts.append(f"{f.to_str(var_names)}*{word}")
            else:
                parts.append(f"({f.to_str(var_names)})*{word}")
        out = parts[0]
        for s in parts[1:]:
            out += " - " + s[1:] if s.startswith("-") else " + " + s
        return out

    def __repr__(self) -> str:
        return f"AlgElem({self.to_str()})"


def sym_mul(a: AlgElem, b: AlgElem) -> AlgElem:
    a._check(b)
    out: Dict[Monomial, Poly] = {}
    for m1, f1 in a.terms.items():
        for m2, f2 in b.terms.items():
            s, m = mono_mul(m1, m2)
            if not s:
                continue
            f = f1 * f2
            if s < 0:
                f = -f
            g = out.get(m)
            if g is not None:
                f = g + f
            if f:
                out[m] = f
            else:
                out.pop(m, None)
    return AlgElem._raw(a.nvars, out)


def product(elems: Iterable[AlgElem], nvars: int) -> AlgElem:
    out = AlgElem.one(nvars)
    for e in elems:
        out = sym_mul(out, e)
    return out


def _raise_factor(m: Monomial, j: int, i: int, nvars: int) -> Tuple[int, Monomial]:
    o = m[j]
    word = list(m)
    word[j] = OGen(o.gen, add_index(o.deco, unit_index(i, nvars)))
    return normalize_word(word)


def partial(i: int, a: AlgElem) -> AlgElem:
    """Action of the vector field d_i: derivative on coefficients, Leibniz on words."""
    p = a.nvars
    out = AlgElem.zero(p)
    acc: Dict[Monomial, Poly] = {}

    def put(m: Monomial, f: Poly) -> None:
        g = acc.get(m)
        if g is not None:
            f = g + f
        if f:
            acc[m] = f
        else:
            acc.pop(m, None)

    for m, f in a.terms.items():
        df = f.derivative(i)
        if df:
            put(m, df)
        for j in range(len(m)):
            s, nm = _raise_factor(m, j, i, p)
            if s:
                put(nm, f if s > 0 else -f)
    out.terms = acc
    return out


def partial_power(beta: MultiIndex, a: AlgElem) -> AlgElem:
    for i, k in enumerate(beta):
        for _ in range(k):
            a = partial(i, a)
    return a


def theta_action(op: WeylOp, a: AlgElem) -> AlgElem:
    if op.nvars != a.nvars:
        raise DimensionMismatch(f"operator in {op.nvars} variables, element in {a.nvars}")
    out = AlgElem.zero(a.nvars)
    cache: Dict[MultiIndex, AlgElem] = {}
    for (alpha, beta), c in op.terms.items():
        if beta not in cache:
            cache[beta] = partial_power(beta, a)
        out = out + cache[beta].scale(Poly.monomial(alpha, c))
    return out


class RelationError(ValueError):
    pass


class Rule(NamedTuple):
    """lhs -> rhs. A one-factor lhs (g, beta0) also rewrites (g, beta) for
    beta >= beta0 to d^(beta-beta0) rhs, which keeps the ideal D-stable."""
    lhs: Monomial
    rhs: AlgElem


class ChainMapError(ValueError):
    def __init__(self, msg: str, gen: Optional[GenId] = None, residue: Optional[AlgElem] = None):
        super().__init__(msg)
        self.gen = gen
        self.residue = residue


class Dga:
    """Finitely generated (optionally presented) differential graded algebra
    over O with D-action. The differential is given on generators and
    extended D-linearly and as a degree -1 derivation."""

    def __init__(self, nvars: int, gens: Iterable[GenId], d: Mapping[GenId, AlgElem] | None = None,
                 relations: Sequence[Rule] = (), name: str = "", hints: Mapping[GenId, tuple] | None = None,
                 check: bool = True, var_names: Sequence[str] | None = None):
        self.nvars = nvars
        self.gens: List[GenId] = canonical_well_order(gens)
        self.gen_set = frozenset(self.gens)
        d = d or {}
        self.d_gen: Dict[GenId, AlgElem] = {g: d.get(g, AlgElem.zero(nvars)) for g in self.gens}
        for g in d:
            if g not in self.gen_set:
                raise DifferentialError(f"differential given for unknown generator {g.label()}", g)
        self.relations: List[Rule] = list(relations)
        self.name = name
        self.hints: Dict[GenId, tuple] = dict(hints or {})
        self.var_names = list(var_names) if var_names else [f"x{i + 1}" for i in range(nvars)]
        self._d_ogen: Dict[OGen, AlgElem] = {}
        self._d_mono: Dict[Monomial, AlgElem] = {}
        self._reduce_cache: Dict[Monomial, AlgElem] = {}
        self._gen_cache: Dict[GenId, AlgElem] = {}
        self._check_rules()
        if check:
            self.validate()

    # -- construction checks -------------------------------------------------
    def _check_rules(self) -> None:
        for r in self.relations:
            if not r.lhs:
                raise RelationError("relation with empty left-hand side")
            for o in r.lhs:
                if o.gen not in self.gen_set:
                    raise RelationError(f"relation uses unknown generator {o.gen.label()}")
            for m in r.rhs.terms:
                if order_key(m) >= order_key(r.lhs):
                    raise RelationError(
                        f"rule {mono_key(r.lhs)} -> ... does not decrease the monomial order at {mono_key(m)}")
            try:
                deg = r.rhs.degree()
            except ValueError as e:
                raise RelationError(str(e))
            if deg is not None and deg != mono_degree(r.lhs):
                raise RelationError("relation is not homogeneous")

    def validate(self) -> None:
        for g in self.gens:
            val = self.d_gen[g]
            for h in val.generators():
                if h not in self.gen_set:
                    raise DifferentialError(f"d({g.label()}) uses unknown generator {h.label()}", g)
            for deg in val.degrees():
                if deg != g.degree - 1:
                    raise DifferentialError(
                        f"d({g.label()}) has degree {deg}, expected {g.degree - 1}", g, val)
        for g, res in self.d_squared_residues().items():
            raise DifferentialError(f"d^2({g.label()}) = {res.to_str()} != 0", g, res)
        for r in self.relations:
            lhs = AlgElem.mono(r.lhs, self.nvars)
            res = self.d(lhs - r.rhs)
            if res:
                raise RelationError(f"relation {mono_key(r.lhs)} is not closed under d: residue {res.to_str()}")

    def d_squared_residues(self) -> Dict[GenId, AlgElem]:
        out = {}
        for g in self.gens:
            res = self.d(self.d_gen[g])
            if res:
                out[g] = res
        return out

    # -- elements --------------------------------------------------------------
    def gen(self, g: GenId, deco: MultiIndex | None = None) -> AlgElem:
        if g not in self.gen_set:
            raise AmbientError(f"{g.label()} is not a generator of {self.name or 'this algebra'}")
        return self.reduce(AlgElem.gen(g, self.nvars, deco))

    def one(self) -> AlgElem:
        return AlgElem.one(self.nvars)

    def zero(self) -> AlgElem:
        return AlgElem.zero(self.nvars)

    def const(self, c: Number) -> AlgElem:
        return AlgElem.const(c, self.nvars)

    def var(self, i: int) -> AlgElem:
        return AlgElem.poly(Poly.var(i, self.nvars))

    def contains(self, a: AlgElem) -> bool:
        return a.nvars == self.nvars and a.generators() <= self.gen_set

    def require(self, a: AlgElem, what: str = "element") -> None:
        if a.nvars != self.nvars:
            raise DimensionMismatch(f"{what} in {a.nvars} variables, algebra in {self.nvars}")
        extra = a.generators() - self.gen_set
        if extra:
            raise AmbientError(f"{what} uses generators outside {self.name or 'the algebra'}: "
                               + ", ".join(sorted(g.label() for g in extra)))

    def generator(self, label: str) -> GenId:
        for g in self.gens:
            if g.label() == label:
                return g
        raise KeyError(label)

    def mul(self, a: AlgElem, b: AlgElem) -> AlgElem:
        return self.reduce(sym_mul(a, b))

    def act(self, op: WeylOp, a: AlgElem) -> AlgElem:
        return self.reduce(theta_action(op, a))

    # -- rewriting -------------------------------------------------------------
    def _match(self, m: Monomial) -> Optional[AlgElem]:
        p = self.nvars
        for r in self.relations:
            if len(r.lhs) == 1:
                (lo,) = r.lhs
                for j, o in enumerate(m):
                    if o.gen == lo.gen and index_le(lo.deco, o.deco):
                        rest = m[:j] + m[j + 1:]
                        s, _ = normalize_word((o,) + rest)
                        rep = partial_power(sub_index(o.deco, lo.deco), r.rhs)
                        return sym_mul(rep, AlgElem.mono(rest, p, s))
            else:
                rest = list(m)
                ok = True
                for o in r.lhs:
                    if o in rest:
                        rest.remove(o)
                    else:
                        ok = False
                        break
                if ok:
                    s, _ = normalize_word(r.lhs + tuple(rest))
                    return sym_mul(r.rhs, AlgElem.mono(tuple(rest), p, s))
        return None

    def _reduce_mono(self, m: Monomial, depth: int = 0) -> AlgElem:
        hit = self._reduce_cache.get(m)
        if hit is not None:
            return hit
        if depth > 500:
            raise RelationError("rewriting did not terminate")
        rep = self._match(m)
        if rep is None:
            out = AlgElem.mono(m, self.nvars)
        else:
            out = AlgElem.zero(self.nvars)
            for m2, f in rep.terms.items():
                out = out + self._reduce_mono(m2, depth + 1).scale(f)
        self._reduce_cache[m] = out
        return out

    def reduce(self, a: AlgElem) -> AlgElem:
        if not self.relations:
            return a
        out = AlgElem.zero(self.nvars)
        for m, f in a.terms.items():
            out = out + self._reduce_mono(m).scale(f)
        return out

    def is_reduced(self, m: Monomial) -> bool:
        return not self.relations or self._match(m) is None

    # -- differential ---------------------------------------------------------
    def d_ogen(self, o: OGen) -> AlgElem:
        hit = self._d_ogen.get(o)
        if hit is None:
            hit = self.reduce(partial_power(o.deco, self.d_gen[o.gen]))
            self._d_ogen[o] = hit
        return hit

    def d_mono(self, m: Monomial) -> AlgElem:
        hit = self._d_mono.get(m)
        if hit is not None:
            return hit
        p = self.nvars
        out = AlgElem.zero(p)
        sign = 1
        for j, o in enumerate(m):
            do = self.d_ogen(o)
            if do:
                left = AlgElem.mono(m[:j], p, sign)
                right = AlgElem.mono(m[j + 1:], p)
                out = out + sym_mul(sym_mul(left, do), right)
            if o.odd:
                sign = -sign
        out = self.reduce(out)
        self._d_mono[m] = out
        return out

    def d(self, a: AlgElem) -> AlgElem:
        out = AlgElem.zero(self.nvars)
        for m, f in a.terms.items():
            dm = self.d_mono(m)
            if dm:
                out = out + dm.scale(f)
        return out

    def __repr__(self) -> str:
        return f"Dga({self.name or '?'}: {[g.label() for g in self.gens]})"

    def describe(self) -> List[str]:
        lines = []
        for g in self.gens:
            lines.append(f"{g.label()} (deg {g.degree}): d = {self.d_gen[g].to_str(self.var_names)}")
        for r in self.relations:
            lines.append(f"rule {'*'.join(o.label() for o in r.lhs)} -> {r.rhs.to_str(self.var_names)}")
        return lines


def base_algebra(nvars: int, name: str = "O", var_names: Sequence[str] | None = None) -> Dga:
    """O itself: no generators."""
    return Dga(nvars, [], {}, name=name, var_names=var_names)


class DgaMorphism:
    """Morphism determined by generator images, extended multiplicatively,
    O-linearly and D-linearly."""

    def __init__(self, source: Dga, target: Dga, assign: Mapping[GenId, AlgElem], check: bool = True,
                 name: str = ""):
        if source.nvars != target.nvars:
            raise DimensionMismatch("source and target have different base dimensions")
        self.source = source
        self.target = target
        self.name = name
        missing = [g for g in source.gens if g not in assign]
        if missing:
            raise ChainMapError("no image for generator " + ", ".join(g.label() for g in missing), missing[0])
        self.assign: Dict[GenId, AlgElem] = {g: target.reduce(assign[g]) for g in source.gens}
        self._ogen: Dict[OGen, AlgElem] = {}
        self._mono: Dict[Monomial, AlgElem] = {}
        if check:
            self.validate()

    def validate(self) -> None:
        for g in self.source.gens:
            img = self.assign[g]
            self.target.require(img, f"image of {g.label()}")
            for deg in img.degrees():
                if deg != g.degree:
                    raise ChainMapError(f"image of {g.label()} has degree {deg}, expected {g.degree}", g, img)
        for g, res in self.chain_residues().items():
            raise ChainMapError(f"d f({g.label()}) - f d({g.label()}) = {res.to_str()} != 0", g, res)

    def chain_residues(self) -> Dict[GenId, AlgElem]:
        out = {}
        for g in self.source.gens:
            res = self.target.d(self.assign[g]) - self.apply(self.source.d_gen[g])
            if res:
                out[g] = res
        return out

    def image_ogen(self, o: OGen) -> AlgElem:
        hit = self._ogen.get(o)
        if hit is None:
            hit = self.target.reduce(partial_power(o.deco, self.assign[o.gen]))
            self._ogen[o] = hit
        return hit

    def image_mono(self, m: Monomial) -> AlgElem:
        hit = self._mono.get(m)
        if hit is None:
            hit = AlgElem.one(self.target.nvars)
            for o in m:
                hit = sym_mul(hit, self.image_ogen(o))
            hit = self.target.reduce(hit)
            self._mono[m] = hit
        return hit

    def apply(self, a: AlgElem) -> AlgElem:
        out = AlgElem.zero(self.target.nvars)
        for m, f in a.terms.items():
            out = out + self.image_mono(m).scale(f)
        return out

    __call__ = apply

    def compose_after(self, other: "DgaMorphism") -> "DgaMorphism":
        """self o other."""
        return DgaMorphism(other.source, self.target,
                           {g: self.apply(v) for g, v in other.assign.items()}, check=False)

    def agrees_with(self, other: "DgaMorphism") -> Dict[GenId, AlgElem]:
        """Generator-wise differences with another morphism on the same source."""
        out = {}
        for g in self.source.gens:
            diff = self.assign[g] - other.apply(AlgElem.gen(g, self.source.nvars))
            if diff:
                out[g] = diff
        return out


def extend_morphism(assign: Mapping[GenId, AlgElem], source: Dga, target: Dga) -> DgaMorphism:
    return DgaMorphism(source, target, assign)


def identity_morphism(A: Dga) -> DgaMorphism:
    return DgaMorphism(A, A, {g: AlgElem.gen(g, A.nvars) for g in A.gens}, check=False)


def unit_morphism(O: Dga, B: Dga) -> DgaMorphism:
    return DgaMorphism(O, B, {}, check=False)


def inclusion(A: Dga, M: Dga) -> DgaMorphism:
    """a -> a for A a sub-presentation of M."""
    return DgaMorphism(A, M, {g: AlgElem.gen(g, A.nvars) for g in A.gens})


def modelem_to_alg(m: ModElem) -> AlgElem:
    out = AlgElem.zero(m.nvars)
    for g, op in m.terms.items():
        out = out + theta_action(op, AlgElem.gen(g, m.nvars))
    return out


def free_algebra(V: FreeDgModule, name: str = "") -> Dga:
    return Dga(V.nvars, V.gens, {g: modelem_to_alg(V.d[g]) for g in V.gens}, name=name)


def tensor_algebra(A: Dga, B: Dga, name: str = "") -> Dga:
    if A.nvars != B.nvars:
        raise DimensionMismatch("tensor factors have different base dimensions")
    shared = A.gen_set & B.gen_set
    if shared:
        raise AmbientError("tensor factors share generators: " + ", ".join(g.label() for g in shared))
    d = dict(A.d_gen)
    d.update(B.d_gen)
    hints = dict(A.hints)
    hints.update(B.hints)
    return Dga(A.nvars, A.gens + B.gens, d, A.relations + B.relations,
               name=name or f"{A.name}(x){B.name}", hints=hints, check=False, var_names=A.var_names)


def product_morphism(phi: DgaMorphism, psi: DgaMorphism, AB: Dga | None = None) -> DgaMorphism:
    """chi(a (x) b) = phi(a) * psi(b) on A (x) B."""
    if phi.target is not psi.target:
        raise AmbientError("product morphism needs a common target")
    AB = AB or tensor_algebra(phi.source, psi.source)
    assign = dict(phi.assign)
    assign.update(psi.assign)
    return DgaMorphism(AB, phi.target, assign)


def rsda_extend_differential(T: Dga, new_gens: Sequence[GenId], dvals: Mapping[GenId, AlgElem],
                             name: str = "", hints: Mapping[GenId, tuple] | None = None) -> Dga:
    """T (x) S(V) with d(g) = dvals[g], each a d_T-cycle of T in degree deg g - 1."""
    p = T.nvars
    for g in new_gens:
        if g in T.gen_set:
            raise DifferentialError(f"{g.label()} already generates T", g)
        val = dvals.get(g, AlgElem.zero(p))
        extra = val.generators() - T.gen_set
        if extra:
            raise DifferentialError(f"d({g.label()}) is not in T", g, val)
        for deg in val.degrees():
            if deg != g.degree - 1:
                raise DifferentialError(f"d({g.label()}) has degree {deg}, expected {g.degree - 1}", g, val)
        res = T.d(val)
        if res:
            raise DifferentialError(f"d({g.label()}) is not a cycle: d_T = {res.to_str()}", g, res)
    d = dict(T.d_gen)
    for g in new_gens:
        d[g] = T.reduce(dvals.get(g, AlgElem.zero(p)))
    allhints = dict(T.hints)
    allhints.update(hints or {})
    return Dga(p, list(T.gens) + list(new_gens), d, T.relations, name=name or T.name,
               hints=allhints, check=False, var_names=T.var_names)


def rsda_terms(T: Dga, M: Dga, t: AlgElem, vs: Sequence[OGen]) -> List[Tuple[str, AlgElem]]:
    """Terms of d(t (x) v_1 ... v_k) in M = T (x) S(V), listed as
    d_T(t) v_1..v_k followed by the sign-weighted (t * d v_l) (x) (rest)."""
    p = M.nvars
    pdeg = t.degree() or 0
    degs = [o.degree for o in vs]
    terms = [("d_T(t)", M.mul(T.d(t), AlgElem.mono(normalize_word(vs)[1], p, normalize_word(vs)[0])))]
    for l, o in enumerate(vs):
        e = pdeg + degs[l] * sum(degs[:l])
        rest = list(vs[:l]) + list(vs[l + 1:])
        s, rm = normalize_word(rest)
        piece = M.mul(M.mul(t, M.d_ogen(o)), AlgElem.mono(rm, p, s))
        terms.append((f"t*d(v{l + 1})", piece if e % 2 == 0 else -piece))
    return terms


def rsda_extend_morphism(p: DgaMorphism, M: Dga, qvals: Mapping[GenId, AlgElem]) -> DgaMorphism:
    """q on M = T (x) S(V) restricting to p on T with q(g) = qvals[g]; needs
    d_B q(g) = p(d g)."""
    T, B = p.source, p.target
    assign = dict(p.assign)
    for g in M.gens:
        if g in T.gen_set:
            continue
        if g not in qvals:
            raise ChainMapError(f"no value for new generator {g.label()}", g)
        val = B.reduce(qvals[g])
        B.require(val, f"q({g.label()})")
        for deg in val.degrees():
            if deg != g.degree:
                raise ChainMapError(f"q({g.label()}) has degree {deg}, expected {g.degree}", g, val)
        assign[g] = val
    q = DgaMorphism(M, B, assign, check=False)
    for g in M.gens:
        if g in T.gen_set:
            continue
        res = B.d(assign[g]) - q.apply(M.d_gen[g])
        if res:
            raise ChainMapError(f"d_B q({g.label()}) != q(d {g.label()}): residue {res.to_str()}", g, res)
    return q


# -- symmetrizer ------------------------------------------------------------
Word = Tuple[OGen, ...]
Tensor = Dict[Word, Fraction]


def permute_word(word: Word, perm: Sequence[int]) -> Tuple[int, Word]:
    """Move factor perm[i] to slot i, with the Koszul sign of the reordering."""
    new = tuple(word[j] for j in perm)
    sign = 1
    n = len(perm)
    for a in range(n):
        for b in range(a + 1, n):
            if perm[a] > perm[b] and word[perm[a]].odd and word[perm[b]].odd:
                sign = -sign
    return sign, new


def tensor_add(t: Tensor, w: Word, c: Fraction) -> None:
    v = t.get(w, 0) + c
    if v:
        t[w] = v
    else:
        t.pop(w, None)


def act_perm(t: Tensor, perm: Sequence[int]) -> Tensor:
    out: Tensor = {}
    for w, c in t.items():
        s, nw = permute_word(w, perm)
        tensor_add(out, nw, c * s)
    return out


def symmetrize(t: Union[Tensor, Word]) -> Tensor:
    if isinstance(t, tuple):
        t = {t: Fraction(1)}
    out: Tensor = {}
    for w, c in t.items():
        n = len(w)
        if n == 0:
            tensor_add(out, w, c)
            continue
        inv = Fraction(1, factorial(n))
        for perm in permutations(range(n)):
            s, nw = permute_word(w, perm)
            tensor_add(out, nw, c * s * inv)
    return out


def symmetric_word_to_alg(t: Tensor, nvars: int) -> AlgElem:
    """Image of a tensor in the free graded-commutative algebra."""
    out = AlgElem.zero(nvars)
    for w, c in t.items():
        s, m = normalize_word(w)
        if s:
            out = out + AlgElem.mono(m, nvars, c * s)
    return out
