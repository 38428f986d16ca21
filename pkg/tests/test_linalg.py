from fractions import Fraction

import sympy
from hypothesis import given, strategies as st

from dgda.linalg import Echelon, dim_in_subspace, kernel, rank

entries = st.integers(-3, 3).map(Fraction)
matrices = st.integers(1, 5).flatmap(
    lambda rows: st.lists(st.lists(entries, min_size=rows, max_size=rows), min_size=1, max_size=6))


def as_vecs(cols):
    return [{i: a for i, a in enumerate(c) if a} for c in cols]


@given(matrices)
def test_rank_matches_sympy(cols):
    assert rank(as_vecs(cols)) == sympy.Matrix(cols).rank()


@given(matrices)
def test_kernel(cols):
    vecs = as_vecs(cols)
    ker = kernel(vecs)
    assert len(ker) == len(cols) - sympy.Matrix(cols).rank()
    for k in ker:
        total = {}
        for j, c in k.items():
            for i, a in vecs[j].items():
                total[i] = total.get(i, 0) + c * a
        assert not any(total.values())


@given(matrices)
def test_solve_gives_preimage(cols):
    vecs = as_vecs(cols)
    e = Echelon()
    for j, v in enumerate(vecs):
        e.add(v, j)
    target = {}
    for j, v in enumerate(vecs):
        for i, a in v.items():
            target[i] = target.get(i, 0) + (j + 1) * a
    combo = e.solve(target)
    assert combo is not None
    back = {}
    for j, c in combo.items():
        for i, a in vecs[j].items():
            back[i] = back.get(i, 0) + c * a
    assert {i: a for i, a in back.items() if a} == {i: a for i, a in target.items() if a}


def test_dim_in_subspace():
    # span{e0 + e1, e2} meets span{e0, e1} in a line
    cols = [{0: Fraction(1), 1: Fraction(1)}, {2: Fraction(1)}]
    assert dim_in_subspace(cols, lambda j: j < 2) == 1
    assert dim_in_subspace(cols, lambda j: j == 0) == 0


def test_independent_add_returns_none():
    e = Echelon()
    assert e.add({0: Fraction(2)}, "a") is None
    assert e.add({0: Fraction(4)}, "b") == {"a": 2}
    assert e.contains({0: Fraction(1)})
    assert not e.contains({1: Fraction(1)})
