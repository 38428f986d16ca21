import pytest

from dgda.coeff_rings import WeylOp
from dgda.graded_modules import (CYCLE, DISC_BOTTOM, DISC_TOP, NAMED, SPHERE, DifferentialError, GenId,
                                 ModElem, antifield_kind, canonical_well_order, disc, extend_differential,
                                 intern_payload, named, pair_kind, sphere)


def test_kind_order():
    kinds = [NAMED, SPHERE, DISC_BOTTOM, DISC_TOP, CYCLE, pair_kind(1), pair_kind(2), antifield_kind(1)]
    gens = [GenId(k, 3, 0, "p") for k in kinds]
    assert canonical_well_order(reversed(gens)) == gens


def test_degree_dominates_kind():
    assert GenId(antifield_kind(2), 1) < GenId(NAMED, 2, 0, "a", "a")


def test_order_is_total_and_deterministic():
    gens = [named("b", 1), named("a", 1), named("a", 1, 1), GenId(CYCLE, 1, 0, intern_payload("x"))]
    assert canonical_well_order(gens) == canonical_well_order(list(reversed(gens)))
    assert len(canonical_well_order(gens + gens)) == 4


def test_kind_validation():
    with pytest.raises(ValueError):
        pair_kind(0)
    with pytest.raises(ValueError):
        antifield_kind(3)
    with pytest.raises(ValueError):
        GenId(NAMED, -1)


def test_payload_is_content_address():
    assert intern_payload("abc") == intern_payload("abc")
    assert intern_payload("abc") != intern_payload("abd")
    assert len(intern_payload("abc")) == 16


def test_disc_structure():
    D = disc(3, 1)
    top = [g for g in D.gens if g.kind == DISC_TOP][0]
    bottom = [g for g in D.gens if g.kind == DISC_BOTTOM][0]
    assert (top.degree, bottom.degree) == (3, 2)
    assert D.d[top] == ModElem.gen(bottom, 1)
    assert not any(D.d_squared().values())


def test_sphere_structure():
    S = sphere(2, 1)
    assert [g.degree for g in S.gens] == [2]
    assert not S.d[S.gens[0]]
    assert sphere(-1).gens == []


def test_extend_differential_rejects_wrong_degree():
    a, b = named("a", 2), named("b", 0)
    with pytest.raises(DifferentialError):
        extend_differential([a, b], {a: ModElem.gen(b, 0)})


def test_extend_differential_rejects_d_squared():
    a, b, c = named("a", 2), named("b", 1), named("c", 0)
    with pytest.raises(DifferentialError):
        extend_differential([a, b, c], {a: ModElem.gen(b, 0), b: ModElem.gen(c, 0)})


def test_extend_differential_accepts_weyl_coefficients():
    a, b = named("a", 1), named("b", 0)
    val = ModElem(1, {b: WeylOp.d(0, 1) + WeylOp.x(0, 1)})
    mod = extend_differential([a, b], {a: val}, 1)
    assert mod.d[a] == val
    assert mod.rank_in_degree(1) == 1


def test_unknown_generator_in_assignment():
    a, b = named("a", 1), named("b", 0)
    with pytest.raises(DifferentialError):
        extend_differential([a], {a: ModElem.gen(b, 0)})
