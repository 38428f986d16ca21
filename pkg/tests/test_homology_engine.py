"""Windowed homology, fibration and weak-equivalence checks."""
import json

import pytest

from dgda.dga_core import AlgElem, Dga, free_algebra, identity_morphism, unit_morphism, base_algebra
from dgda.graded_modules import ModElem, disc, named, sphere
from dgda.homology_engine import (Truncation, Weights, enumerate_basis, homology, is_cofibration_module,
                                  is_fibration, is_weak_equivalence, matrix_of_d, module_homology, slice_dims)

import support


def test_truncation_rejects_negative():
    with pytest.raises(ValueError):
        Truncation(-1)


@pytest.mark.parametrize("p,dx,r", [(0, 0, 0), (1, 1, 1), (1, 2, 0)])
def test_module_sphere_and_disc(p, dx, r):
    t = Truncation(5, dx, r, 3)
    slice_size = (dx + 1) * (r + 1) if p else 1
    for n in range(1, 5):
        assert set(module_homology(disc(n, p), t).ranks().values()) == {0}
        ranks = module_homology(sphere(n, p), t).ranks()
        assert ranks[n] == slice_size
        assert all(h == 0 for k, h in ranks.items() if k != n)


def test_free_disc_algebra_is_contractible_to_O():
    t = Truncation(4, 1, 1, 3)
    ranks = homology(support.free_algebra(disc(2, 1)), t).ranks()
    assert ranks == {0: 2, 1: 0, 2: 0, 3: 0, 4: 0}


def test_free_sphere_algebra_field_mode():
    # S(S^2) = Q[e], one class in every even degree
    t = Truncation(6, 0, 0, 3)
    ranks = homology(free_algebra(sphere(2, 0)), t).ranks()
    assert ranks == {0: 1, 1: 0, 2: 1, 3: 0, 4: 1, 5: 0, 6: 1}


def test_odd_sphere_exterior():
    t = Truncation(4, 0, 0, 4)
    ranks = homology(free_algebra(sphere(1, 0)), t).ranks()
    assert ranks == {0: 1, 1: 1, 2: 0, 3: 0, 4: 0}


def test_basis_enumeration_respects_window():
    X = support.mixed_algebra(1)
    t = Truncation(3, 1, 1, 2)
    W = Weights(X)
    for n in range(4):
        for m, a in enumerate_basis(X, n, t, W):
            assert sum(o.degree for o in m) == n
            assert len(m) <= t.L
            assert sum(a) <= t.d_x


def test_matrix_of_d_squares_to_zero():
    X = support.mixed_algebra(0)
    t = Truncation(3, 2, 0, 3)
    src2, tgt2, cols2, _ = matrix_of_d(X, 2, t)
    src1, tgt1, cols1, _ = matrix_of_d(X, 1, t)
    assert tgt2 == src1
    for col in cols2:
        total = {}
        for j, c in col.items():
            for i, a in cols1[j].items():
                total[i] = total.get(i, 0) + c * a
        assert not any(total.values())


def test_homology_report_formats():
    rep = homology(free_algebra(sphere(1, 0)), Truncation(2, 0, 0, 2))
    js = rep.to_json()
    assert set(js) == {"0", "1", "2"}
    json.dumps(js)
    assert rep.table().splitlines()[0].startswith("deg")
    assert rep.flagged() == []


def test_reps_are_cycles():
    X = support.mixed_algebra(0)
    rep = homology(X, Truncation(3, 2, 0, 3))
    for d in rep.degrees:
        for r in d.reps:
            assert not X.d(r)


def test_slice_dims_polynomial_ring():
    from dgda.koszul_tate import polynomial_ring
    P = polynomial_ring(["x", "y"])
    # monomials of degree w in two variables
    assert slice_dims(P, 0, Truncation(0, 4, 0, 4)) == [1, 2, 3, 4, 5]


def test_nonhomogeneous_is_flagged():
    # d v1 = a - b^2, d v2 = b^2: a is a boundary, but only through weight-2 generators
    a, b = named("a", 0, 0), named("b", 0, 1)
    v1, v2 = named("v1", 1, 2), named("v2", 1, 3)
    A, B = AlgElem.gen(a, 0), AlgElem.gen(b, 0)
    X = Dga(0, [a, b, v1, v2], {v1: A - B * B, v2: B * B}, hints={a: (1, 0, 1), b: (1, 0, 1)})
    rep = homology(X, Truncation(2, 1, 0, 2))
    assert rep.flagged() == [0]
    # the window still counts a as a class; it is not one in the full complex
    assert rep[0].h == 3


def test_identity_is_weak_equivalence_and_fibration():
    X = support.mixed_algebra(1)
    t = Truncation(3, 1, 1, 2)
    idm = identity_morphism(X)
    assert is_weak_equivalence(idm, t).ok
    assert is_fibration(idm, t).ok


def test_unit_into_sphere_not_weak_equivalence():
    B = free_algebra(sphere(2, 0))
    f = unit_morphism(base_algebra(0), B)
    rep = is_weak_equivalence(f, Truncation(3, 0, 0, 2))
    assert not rep.ok
    assert not is_fibration(f, Truncation(3, 0, 0, 2)).ok


def test_unit_into_disc_is_weak_equivalence():
    B = free_algebra(disc(3, 1))
    assert is_weak_equivalence(unit_morphism(base_algebra(1), B), Truncation(4, 1, 1, 3)).ok


def test_cofibration_module_check():
    S, D = sphere(2, 0), disc(3, 0)
    bottom = [g for g in D.gens if g.degree == 2][0]
    rep = is_cofibration_module(S, D, {S.gens[0]: ModElem.gen(bottom, 0)})
    assert rep.ok
    bad = is_cofibration_module(S, D, {S.gens[0]: ModElem(0)})
    assert not bad.ok
