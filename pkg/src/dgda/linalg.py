"""Sparse exact linear algebra over Q.

Vectors are dicts int -> Fraction. The incremental echelon form keeps, for
every pivot row, the combination of inserted vectors that produced it, which
gives kernels and preimages without a second elimination pass.
"""
from __future__ import annotations

import heapq
from fractions import Fraction
from typing import Dict, Hashable, Iterable, List, Optional, Sequence, Tuple

Vec = Dict[int, Fraction]


def axpy(y: Vec, c: Fraction, x: Vec) -> None:
    """y += c * x in place."""
    for j, a in x.items():
        v = y.get(j, 0) + c * a
        if v:
            y[j] = v
        else:
            y.pop(j, None)


class Echelon:
    def __init__(self, track: bool = True):
        self.rows: Dict[int, Tuple[Vec, Dict[Hashable, Fraction]]] = {}
        self.track = track

    def __len__(self) -> int:
        return len(self.rows)

    @property
    def rank(self) -> int:
        return len(self.rows)

    def reduce(self, v: Vec) -> Tuple[Vec, Dict[Hashable, Fraction]]:
        r = dict(v)
        combo: Dict[Hashable, Fraction] = {}
        heap = list(r)
        heapq.heapify(heap)
        while heap:
            i = heapq.heappop(heap)
            if i not in r or i not in self.rows:
                continue
            c = r[i]
            row, rc = self.rows[i]
            for j, a in row.items():
                nv = r.get(j, 0) - c * a
                if nv:
                    if j not in r:
                        heapq.heappush(heap, j)
                    r[j] = nv
                else:
                    r.pop(j, None)
            if self.track:
                for t, a in rc.items():
                    nv = combo.get(t, 0) + c * a
                    if nv:
                        combo[t] = nv
                    else:
                        combo.pop(t, None)
        return r, combo

    def add(self, v: Vec, tag: Hashable = None) -> Optional[Dict[Hashable, Fraction]]:
        """Insert v. Returns None if v was independent, else the combination
        of earlier tags equal to v."""
        r, combo = self.reduce(v)
        if not r:
            return combo
        p = min(r)
        inv = 1 / r[p]
        row = {j: a * inv for j, a in r.items()}
        rc: Dict[Hashable, Fraction] = {}
        if self.track:
            rc = {t: -a * inv for t, a in combo.items()}
            rc[tag] = rc.get(tag, 0) + inv
        self.rows[p] = (row, rc)
        return None

    def contains(self, v: Vec) -> bool:
        return not self.reduce(v)[0]

    def solve(self, v: Vec) -> Optional[Dict[Hashable, Fraction]]:
        r, combo = self.reduce(v)
        return None if r else combo


def rank(vectors: Iterable[Vec]) -> int:
    e = Echelon(track=False)
    for v in vectors:
        e.add(v)
    return e.rank


def kernel(columns: Sequence[Vec]) -> List[Vec]:
    """Basis of {c : sum_j c_j columns[j] = 0}, as dicts j -> c_j."""
    e = Echelon()
    out: List[Vec] = []
    for j, col in enumerate(columns):
        dep = e.add(col, j)
        if dep is not None:
            vec = {t: -a for t, a in dep.items()}
            vec[j] = Fraction(1)
            out.append(vec)
    return out


def restrict(v: Vec, keep) -> Vec:
    return {j: a for j, a in v.items() if keep(j)}


def dim_in_subspace(columns: Sequence[Vec], inside) -> int:
    """dim(span(columns) meet the coordinate subspace spanned by indices with inside(j))."""
    full = rank(columns)
    outside = rank(restrict(c, lambda j: not inside(j)) for c in columns)
    return full - outside
