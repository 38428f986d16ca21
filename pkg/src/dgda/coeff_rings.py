"""Exact coefficients: rationals, the polynomial ring O = Q[x_1..x_p] and the
Weyl algebra D acting on it.

Weyl operators are kept in normal order, sum of c * x^alpha d^beta with every
x to the left of every d, which makes coefficient-wise equality a test of
operator equality.
"""
from __future__ import annotations

from fractions import Fraction
from itertools import product
from math import comb
from typing import Dict, Iterable, Iterator, Mapping, Tuple, Union

Scalar = Fraction
MultiIndex = Tuple[int, ...]
Number = Union[int, Fraction]


class DimensionMismatch(ValueError):
    pass


def scalar(c: Number) -> Fraction:
    return c if isinstance(c, Fraction) else Fraction(c)


def zero_index(p: int) -> MultiIndex:
    return (0,) * p


def unit_index(i: int, p: int) -> MultiIndex:
    return tuple(1 if j == i else 0 for j in range(p))


def add_index(a: MultiIndex, b: MultiIndex) -> MultiIndex:
    return tuple(x + y for x, y in zip(a, b))


def sub_index(a: MultiIndex, b: MultiIndex) -> MultiIndex:
    return tuple(x - y for x, y in zip(a, b))


def index_le(a: MultiIndex, b: MultiIndex) -> bool:
    return all(x <= y for x, y in zip(a, b))


def falling(n: int, k: int) -> int:
    out = 1
    for j in range(k):
        out *= n - j
    return out


def indices_up_to(p: int, total: int) -> Iterator[MultiIndex]:
    """All multi-indices of length p with |alpha| <= total, graded then lex."""
    for t in range(total + 1):
        yield from indices_of_degree(p, t)


def indices_of_degree(p: int, t: int) -> Iterator[MultiIndex]:
    if p == 0:
        if t == 0:
            yield ()
        return
    if p == 1:
        yield (t,)
        return
    for first in range(t, -1, -1):
        for rest in indices_of_degree(p - 1, t - first):
            yield (first,) + rest


def sub_indices(beta: MultiIndex) -> Iterator[MultiIndex]:
    return product(*(range(b + 1) for b in beta))


def _check(p: int, q: int) -> None:
    if p != q:
        raise DimensionMismatch(f"base dimension {p} != {q}")


class Poly:
    """Element of Q[x_1..x_p] as a sparse map exponent -> coefficient."""

    __slots__ = ("nvars", "terms")

    def __init__(self, nvars: int, terms: Mapping[MultiIndex, Number] | None = None):
        self.nvars = nvars
        clean: Dict[MultiIndex, Fraction] = {}
        if terms:
            for e, c in terms.items():
                if len(e) != nvars:
                    raise DimensionMismatch(f"exponent {e} in {nvars} variables")
                if c:
                    clean[tuple(e)] = scalar(c)
        self.terms = clean

    @classmethod
    def _raw(cls, nvars: int, terms: Dict[MultiIndex, Fraction]) -> "Poly":
        obj = cls.__new__(cls)
        obj.nvars = nvars
        obj.terms = terms
        return obj

    @classmethod
    def const(cls, c: Number, nvars: int) -> "Poly":
        return cls._raw(nvars, {zero_index(nvars): scalar(c)} if c else {})

    @classmethod
    def one(cls, nvars: int) -> "Poly":
        return cls.const(1, nvars)

    @classmethod
    def var(cls, i: int, nvars: int) -> "Poly":
        return cls._raw(nvars, {unit_index(i, nvars): Fraction(1)})

    @classmethod
    def monomial(cls, exps: MultiIndex, c: Number = 1) -> "Poly":
        return cls(len(exps), {tuple(exps): c})

    def is_zero(self) -> bool:
        return not self.terms

    def is_const(self) -> bool:
        return all(not any(e) for e in self.terms)

    def const_term(self) -> Fraction:
        return self.terms.get(zero_index(self.nvars), Fraction(0))

    def degree(self) -> int:
        return max((sum(e) for e in self.terms), default=-1)

    def min_degree(self) -> int:
        return min((sum(e) for e in self.terms), default=-1)

    def __bool__(self) -> bool:
        return bool(self.terms)

    def __eq__(self, other: object) -> bool:
        if isinstance(other, (int, Fraction)):
            other = Poly.const(other, self.nvars)
        if not isinstance(other, Poly):
            return NotImplemented
        return self.nvars == other.nvars and self.terms == other.terms

    def __hash__(self) -> int:
        return hash((self.nvars, frozenset(self.terms.items())))

    def __neg__(self) -> "Poly":
        return Poly._raw(self.nvars, {e: -c for e, c in self.terms.items()})

    def __add__(self, other: "Poly") -> "Poly":
        if not isinstance(other, Poly):
            other = Poly.const(other, self.nvars)
        _check(self.nvars, other.nvars)
        out = dict(self.terms)
        for e, c in other.terms.items():
            v = out.get(e, 0) + c
            if v:
                out[e] = v
            else:
                out.pop(e, None)
        return Poly._raw(self.nvars, out)

    __radd__ = __add__

    def __sub__(self, other: "Poly") -> "Poly":
        if not isinstance(other, Poly):
            other = Poly.const(other, self.nvars)
        return self + (-other)

    def scale(self, c: Number) -> "Poly":
        if not c:
            return Poly(self.nvars)
        c = scalar(c)
        return Poly._raw(self.nvars, {e: v * c for e, v in self.terms.items()})

    def __mul__(self, other: Union["Poly", Number]) -> "Poly":
        if isinstance(other, (int, Fraction)):
            return self.scale(other)
        return poly_mul(self, other)

    __rmul__ = __mul__

    def shift(self, exps: MultiIndex, c: Number = 1) -> "Poly":
        """Multiply by c * x^exps."""
        c = scalar(c)
        return Poly._raw(self.nvars, {add_index(e, exps): v * c for e, v in self.terms.items()} if c else {})

    def derivative(self, i: int) -> "Poly":
        out: Dict[MultiIndex, Fraction] = {}
        for e, c in self.terms.items():
            if e[i]:
                ne = e[:i] + (e[i] - 1,) + e[i + 1:]
                out[ne] = c * e[i]
        return Poly._raw(self.nvars, out)

    def diff(self, beta: MultiIndex) -> "Poly":
        """Apply d^beta."""
        out: Dict[MultiIndex, Fraction] = {}
        for e, c in self.terms.items():
            if index_le(beta, e):
                f = 1
                for ei, bi in zip(e, beta):
                    f *= falling(ei, bi)
                out[sub_index(e, beta)] = c * f
        return Poly._raw(self.nvars, out)

    def sorted_terms(self) -> list:
        return sorted(self.terms.items(), key=lambda t: (sum(t[0]), tuple(-x for x in t[0])))

    def key(self) -> str:
        return ";".join(f"{_fmt_exps(e)}:{c}" for e, c in self.sorted_terms())

    def to_str(self, names: Iterable[str] | None = None) -> str:
        names = list(names) if names is not None else [f"x{i + 1}" for i in range(self.nvars)]
        if not self.terms:
            return "0"
        parts = []
        for e, c in self.sorted_terms():
            mono = "*".join(n if k == 1 else f"{n}^{k}" for n, k in zip(names, e) if k)
            parts.append(_join_coeff(c, mono))
        return _join_terms(parts)

    def __repr__(self) -> str:
        return f"Poly({self.to_str()})"


def _fmt_exps(e: MultiIndex) -> str:
    return ",".join(map(str, e))


def _join_coeff(c: Fraction, mono: str) -> str:
    if not mono:
        return str(c)
    if c == 1:
        return mono
    if c == -1:
        return "-" + mono
    return f"{c}*{mono}"


def _join_terms(parts: list) -> str:
    out = parts[0]
    for s in parts[1:]:
        out += " - " + s[1:] if s.startswith("-") else " + " + s
    return out


def poly_mul(a: Poly, b: Poly) -> Poly:
    _check(a.nvars, b.nvars)
    out: Dict[MultiIndex, Fraction] = {}
    for e1, c1 in a.terms.items():
        for e2, c2 in b.terms.items():
            e = add_index(e1, e2)
            v = out.get(e, 0) + c1 * c2
            if v:
                out[e] = v
            else:
                out.pop(e, None)
    return Poly._raw(a.nvars, out)


class WeylOp:
    """Normal-ordered element sum c * x^alpha d^beta of the Weyl algebra."""

    __slots__ = ("nvars", "terms")

    def __init__(self, nvars: int, terms: Mapping[Tuple[MultiIndex, MultiIndex], Number] | None = None):
        self.nvars = nvars
        clean: Dict[Tuple[MultiIndex, MultiIndex], Fraction] = {}
        if terms:
            for (a, b), c in terms.items():
                if len(a) != nvars or len(b) != nvars:
                    raise DimensionMismatch(f"index ({a}, {b}) in {nvars} variables")
                if c:
                    clean[(tuple(a), tuple(b))] = scalar(c)
        self.terms = clean

    @classmethod
    def const(cls, c: Number, nvars: int) -> "WeylOp":
        z = zero_index(nvars)
        return cls(nvars, {(z, z): c})

    @classmethod
    def one(cls, nvars: int) -> "WeylOp":
        return cls.const(1, nvars)

    @classmethod
    def x(cls, i: int, nvars: int) -> "WeylOp":
        return cls(nvars, {(unit_index(i, nvars), zero_index(nvars)): 1})

    @classmethod
    def d(cls, i: int, nvars: int) -> "WeylOp":
        return cls(nvars, {(zero_index(nvars), unit_index(i, nvars)): 1})

    @classmethod
    def monomial(cls, alpha: MultiIndex, beta: MultiIndex, c: Number = 1) -> "WeylOp":
        return cls(len(alpha), {(tuple(alpha), tuple(beta)): c})

    @classmethod
    def from_poly(cls, f: Poly) -> "WeylOp":
        z = zero_index(f.nvars)
        return cls(f.nvars, {(e, z): c for e, c in f.terms.items()})

    def is_zero(self) -> bool:
        return not self.terms

    def __bool__(self) -> bool:
        return bool(self.terms)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, WeylOp):
            return NotImplemented
        return self.nvars == other.nvars and self.terms == other.terms

    def __hash__(self) -> int:
        return hash((self.nvars, frozenset(self.terms.items())))

    def __neg__(self) -> "WeylOp":
        return WeylOp(self.nvars, {k: -c for k, c in self.terms.items()})

    def __add__(self, other: "WeylOp") -> "WeylOp":
        _check(self.nvars, other.nvars)
        out = dict(self.terms)
        for k, c in other.terms.items():
            out[k] = out.get(k, 0) + c
        return WeylOp(self.nvars, out)

    def __sub__(self, other: "WeylOp") -> "WeylOp":
        return self + (-other)

    def scale(self, c: Number) -> "WeylOp":
        return WeylOp(self.nvars, {k: v * c for k, v in self.terms.items()})

    def __mul__(self, other: Union["WeylOp", Number]) -> "WeylOp":
        if isinstance(other, (int, Fraction)):
            return self.scale(other)
        return weyl_mul(self, other)

    def __rmul__(self, other: Number) -> "WeylOp":
        return self.scale(other)

    def order(self) -> int:
        return max((sum(b) for _, b in self.terms), default=-1)

    def sorted_terms(self) -> list:
        return sorted(self.terms.items(), key=lambda t: (sum(t[0][1]), t[0][1], sum(t[0][0]), t[0][0]))

    def to_str(self) -> str:
        if not self.terms:
            return "0"
        parts = []
        for (a, b), c in self.sorted_terms():
            fs = [f"x{i + 1}" + (f"^{k}" if k > 1 else "") for i, k in enumerate(a) if k]
            fs += [f"d{i + 1}" + (f"^{k}" if k > 1 else "") for i, k in enumerate(b) if k]
            parts.append(_join_coeff(c, "*".join(fs)))
        return _join_terms(parts)

    def __repr__(self) -> str:
        return f"WeylOp({self.to_str()})"


def weyl_mul(a: WeylOp, b: WeylOp) -> WeylOp:
    # x^a1 d^b1 x^a2 d^b2 = sum_k prod_i C(b1_i,k_i) (a2_i)_(k_i) x^(a1+a2-k) d^(b1+b2-k)
    _check(a.nvars, b.nvars)
    out: Dict[Tuple[MultiIndex, MultiIndex], Fraction] = {}
    for (a1, b1), c1 in a.terms.items():
        for (a2, b2), c2 in b.terms.items():
            for k in sub_indices(b1):
                f = 1
                for bi, ai, ki in zip(b1, a2, k):
                    f *= comb(bi, ki) * falling(ai, ki)
                    if not f:
                        break
                if not f:
                    continue
                key = (sub_index(add_index(a1, a2), k), sub_index(add_index(b1, b2), k))
                out[key] = out.get(key, 0) + c1 * c2 * f
    return WeylOp(a.nvars, out)


def weyl_apply(op: WeylOp, f: Poly) -> Poly:
    _check(op.nvars, f.nvars)
    out = Poly(f.nvars)
    for (alpha, beta), c in op.terms.items():
        out = out + f.diff(beta).shift(alpha, c)
    return out
