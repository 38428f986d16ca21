"""Free non-negatively graded D-modules with well-ordered bases, discs and spheres."""
from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from functools import total_ordering
from typing import Dict, Iterable, List, Mapping, Optional, Sequence

from .coeff_rings import DimensionMismatch, WeylOp, weyl_mul

# kind tags and their rank in the canonical order; the index breaks ties
# (stage for pair generators, level for antifields)
KIND_RANK = {
    "Named": 0,
    "Sphere": 1,
    "DiscBottom": 2,
    "DiscTop": 3,
    "CycleGen": 4,
    "PairGen": 5,
    "Antifield": 6,
}


@dataclass(frozen=True)
class GenKind:
    tag: str
    index: int = 0

    def __post_init__(self):
        if self.tag not in KIND_RANK:
            raise ValueError(f"unknown generator kind {self.tag!r}")
        if self.tag == "PairGen" and self.index < 1:
            raise ValueError("pair generators carry a stage k >= 1")
        if self.tag == "Antifield" and self.index not in (1, 2):
            raise ValueError("antifield level must be 1 or 2")

    @property
    def rank(self) -> tuple:
        return (KIND_RANK[self.tag], self.index)

    def __str__(self) -> str:
        return f"{self.tag}({self.index})" if self.tag in ("PairGen", "Antifield") else self.tag


NAMED = GenKind("Named")
SPHERE = GenKind("Sphere")
DISC_TOP = GenKind("DiscTop")
DISC_BOTTOM = GenKind("DiscBottom")
CYCLE = GenKind("CycleGen")


def pair_kind(k: int) -> GenKind:
    return GenKind("PairGen", k)


def antifield_kind(level: int) -> GenKind:
    return GenKind("Antifield", level)


def intern_payload(serialized: str) -> str:
    """Content address for an indexing element given its canonical serialization."""
    return hashlib.sha256(serialized.encode()).hexdigest()[:16]


@total_ordering
@dataclass(frozen=True)
class GenId:
    kind: GenKind
    degree: int
    ordinal: int = 0
    payload: str = ""
    name: str = ""
    sort_key: tuple = field(init=False, repr=False, compare=False, hash=False)

    def __post_init__(self):
        if self.degree < 0:
            raise ValueError("generator degrees are non-negative")
        object.__setattr__(self, "sort_key",
                           (self.degree, self.kind.rank, self.ordinal, self.payload, self.name))

    def __lt__(self, other: "GenId") -> bool:
        return self.sort_key < other.sort_key

    @property
    def odd(self) -> bool:
        return self.degree % 2 == 1

    def key(self) -> str:
        return f"{self.kind}:{self.degree}:{self.ordinal}:{self.name}:{self.payload}"

    def label(self) -> str:
        return self.name or f"{self.kind}[{self.degree},{self.ordinal}]"

    def __repr__(self) -> str:
        return f"<{self.label()}|{self.degree}>"


def named(name: str, degree: int, ordinal: int = 0) -> GenId:
    return GenId(NAMED, degree, ordinal, name, name)


def canonical_well_order(gens: Iterable[GenId]) -> List[GenId]:
    return sorted(set(gens), key=lambda g: g.sort_key)


class ModElem:
    """Element sum D_g * g of a free D-module, coefficients normal-ordered."""

    __slots__ = ("nvars", "terms")

    def __init__(self, nvars: int, terms: Mapping[GenId, WeylOp] | None = None):
        self.nvars = nvars
        self.terms: Dict[GenId, WeylOp] = {}
        for g, op in (terms or {}).items():
            if op.nvars != nvars:
                raise DimensionMismatch(f"coefficient in {op.nvars} variables, module in {nvars}")
            if op:
                self.terms[g] = op

    @classmethod
    def gen(cls, g: GenId, nvars: int) -> "ModElem":
        return cls(nvars, {g: WeylOp.one(nvars)})

    def is_zero(self) -> bool:
        return not self.terms

    def __bool__(self) -> bool:
        return bool(self.terms)

    def __eq__(self, other: object) -> bool:
        return isinstance(other, ModElem) and self.nvars == other.nvars and self.terms == other.terms

    def __add__(self, other: "ModElem") -> "ModElem":
        out = dict(self.terms)
        for g, op in other.terms.items():
            out[g] = out[g] + op if g in out else op
        return ModElem(self.nvars, out)

    def __neg__(self) -> "ModElem":
        return ModElem(self.nvars, {g: -op for g, op in self.terms.items()})

    def __sub__(self, other: "ModElem") -> "ModElem":
        return self + (-other)

    def act(self, op: WeylOp) -> "ModElem":
        return ModElem(self.nvars, {g: weyl_mul(op, c) for g, c in self.terms.items()})

    def degrees(self) -> set:
        return {g.degree for g in self.terms}

    def __repr__(self) -> str:
        return " + ".join(f"({op.to_str()}){g.label()}" for g, op in sorted(self.terms.items())) or "0"


class DifferentialError(ValueError):
    def __init__(self, msg: str, gen: Optional[GenId] = None, residue=None):
        super().__init__(msg)
        self.gen = gen
        self.residue = residue


class FreeDgModule:
    def __init__(self, nvars: int, gens: Sequence[GenId], d: Mapping[GenId, ModElem]):
        self.nvars = nvars
        self.gens = canonical_well_order(gens)
        self.d = {g: d.get(g, ModElem(nvars)) for g in self.gens}

    def apply_d(self, m: ModElem) -> ModElem:
        out = ModElem(self.nvars)
        for g, op in m.terms.items():
            out = out + self.d[g].act(op)
        return out

    def d_squared(self) -> Dict[GenId, ModElem]:
        return {g: self.apply_d(self.d[g]) for g in self.gens}

    def rank_in_degree(self, n: int) -> int:
        return sum(1 for g in self.gens if g.degree == n)

    def __repr__(self) -> str:
        return f"FreeDgModule({[g.label() for g in self.gens]})"


def extend_differential(gens: Sequence[GenId], assignment: Mapping[GenId, ModElem], nvars: int = 0) -> FreeDgModule:
    gens = canonical_well_order(gens)
    known = set(gens)
    for g, val in assignment.items():
        if g not in known:
            raise DifferentialError(f"assignment for unknown generator {g.label()}", g)
        for h in val.terms:
            if h not in known:
                raise DifferentialError(f"d({g.label()}) uses unknown generator {h.label()}", g)
            if h.degree != g.degree - 1:
                raise DifferentialError(
                    f"d({g.label()}) has a term in degree {h.degree}, expected {g.degree - 1}", g)
    mod = FreeDgModule(nvars, gens, assignment)
    for g, res in mod.d_squared().items():
        if res:
            raise DifferentialError(f"d^2({g.label()}) = {res!r} != 0", g, res)
    return mod


def sphere(n: int, nvars: int = 0, name: str = "", ordinal: int = 0, payload: str = "") -> FreeDgModule:
    if n < -1:
        raise ValueError("sphere(n) needs n >= -1")
    if n == -1:
        return FreeDgModule(nvars, [], {})
    g = GenId(SPHERE, n, ordinal, payload or f"S{n}", name or f"1_{n}")
    return FreeDgModule(nvars, [g], {})


def disc(n: int, nvars: int = 0, name: str = "", ordinal: int = 0, payload: str = "") -> FreeDgModule:
    if n < 0:
        raise ValueError("disc(n) needs n >= 0")
    if n == 0:
        return sphere(0, nvars, name, ordinal, payload)
    tag = payload or f"D{n}"
    base = name or f"I_{n}"
    top = GenId(DISC_TOP, n, ordinal, tag, base)
    bottom = GenId(DISC_BOTTOM, n - 1, ordinal, tag, "s^-1 " + base)
    return extend_differential([top, bottom], {top: ModElem.gen(bottom, nvars)}, nvars)


def disc_generators(mod: FreeDgModule):
    """(top, bottom) of a disc module, bottom None for disc(0)."""
    top = [g for g in mod.gens if g.kind in (DISC_TOP, SPHERE)]
    bottom = [g for g in mod.gens if g.kind == DISC_BOTTOM]
    return top[0], (bottom[0] if bottom else None)
