"""Graded-commutative algebra, differentials, rewriting and morphisms."""
import random
from fractions import Fraction
from itertools import permutations, product

import pytest
from hypothesis import given, settings, strategies as st

from dgda.coeff_rings import Poly, WeylOp
from dgda.dga_core import (AlgElem, ChainMapError, Dga, DgaMorphism, OGen, RelationError, Rule, act_perm,
                           free_algebra, identity_morphism, normalize_word, partial, partial_power,
                           product_morphism, rsda_extend_differential, rsda_extend_morphism, rsda_terms,
                           sym_mul, symmetric_word_to_alg, symmetrize, tensor_algebra, theta_action)
from dgda.graded_modules import DifferentialError, disc, named, sphere

import support

ALGS = {X.name + str(X.nvars) + str(i): X for i, X in enumerate(support.constructed_algebras())}
seeds = st.integers(0, 10 ** 6)


@pytest.fixture(scope="module")
def mixed1():
    return support.mixed_algebra(1)


class TestProducts:
    @settings(max_examples=80)
    @given(seeds, st.sampled_from(sorted(ALGS)))
    def test_associative_unital(self, seed, name):
        X = ALGS[name]
        rng = random.Random(seed)
        a, b, c = (support.rand_elem(rng, X) for _ in range(3))
        assert X.mul(X.mul(a, b), c) == X.mul(a, X.mul(b, c))
        assert X.mul(a, X.one()) == a == X.mul(X.one(), a)

    @settings(max_examples=80)
    @given(seeds, st.sampled_from(sorted(ALGS)))
    def test_graded_commutative(self, seed, name):
        X = ALGS[name]
        rng = random.Random(seed)
        m1, m2 = support.rand_monomial(rng, X), support.rand_monomial(rng, X)
        a, b = AlgElem.mono(m1, X.nvars), AlgElem.mono(m2, X.nvars)
        s = support.sign(sum(o.degree for o in m1) * sum(o.degree for o in m2))
        assert X.mul(a, b) == X.mul(b, a).scale(s)

    def test_odd_square_vanishes(self):
        X = free_algebra(sphere(1, 0))
        e = X.gen(X.gens[0])
        assert not X.mul(e, e)

    def test_even_powers(self):
        X = free_algebra(sphere(2, 0))
        e = X.gen(X.gens[0])
        assert X.mul(e, e).terms == {(OGen(X.gens[0], ()), OGen(X.gens[0], ())): Poly.one(0)}

    def test_normalize_word_sign(self):
        u, v = named("u", 1, 0), named("v", 1, 1)
        s, m = normalize_word([OGen(v, ()), OGen(u, ())])
        assert s == -1 and m == (OGen(u, ()), OGen(v, ()))
        assert normalize_word([OGen(u, ()), OGen(u, ())])[0] == 0


class TestDifferential:
    @settings(max_examples=80)
    @given(seeds, st.sampled_from(sorted(ALGS)))
    def test_leibniz(self, seed, name):
        X = ALGS[name]
        rng = random.Random(seed)
        m1 = support.rand_monomial(rng, X)
        a, b = AlgElem.mono(m1, X.nvars), support.rand_elem(rng, X)
        s = support.sign(sum(o.degree for o in m1))
        assert X.d(X.mul(a, b)) == X.mul(X.d(a), b) + X.mul(a, X.d(b)).scale(s)

    @pytest.mark.parametrize("name", sorted(ALGS))
    def test_d_squared_zero(self, name):
        X = ALGS[name]
        assert X.d_squared_residues() == {}
        rng = random.Random(7)
        for _ in range(10):
            assert not X.d(X.d(support.rand_elem(rng, X)))

    def test_d_commutes_with_derivatives(self, mixed1):
        rng = random.Random(3)
        for _ in range(20):
            a = support.rand_elem(rng, mixed1)
            assert mixed1.d(partial(0, a)) == partial(0, mixed1.d(a))

    def test_bad_differential_rejected(self):
        u, v = named("u", 1), named("v", 2)
        with pytest.raises(DifferentialError):
            Dga(0, [u, v], {v: AlgElem.gen(u, 0), u: AlgElem.one(0)})

    def test_wrong_degree_rejected(self):
        u, v = named("u", 1), named("v", 3)
        with pytest.raises(DifferentialError):
            Dga(0, [u, v], {v: AlgElem.gen(u, 0)})


class TestDerivations:
    def test_partial_is_derivation(self, mixed1):
        rng = random.Random(11)
        for _ in range(30):
            m = support.rand_monomial(rng, mixed1)
            a, b = AlgElem.mono(m, 1), support.rand_elem(rng, mixed1)
            # total derivative is even
            assert partial(0, mixed1.mul(a, b)) == mixed1.mul(partial(0, a), b) + mixed1.mul(a, partial(0, b))

    def test_partial_on_coefficients(self):
        x = AlgElem.poly(Poly.var(0, 1))
        assert partial(0, x * x) == AlgElem.poly(Poly.var(0, 1)).scale(2)

    def test_partial_raises_decoration(self):
        a = named("a", 0)
        assert partial(0, AlgElem.gen(a, 1, (1,))) == AlgElem.gen(a, 1, (2,))
        assert partial_power((3,), AlgElem.gen(a, 1)) == AlgElem.gen(a, 1, (3,))

    def test_theta_action_commutator(self, mixed1):
        # (d x - x d) acts as the identity
        a = AlgElem.gen(mixed1.gens[0], 1)
        lhs = theta_action(WeylOp.d(0, 1), theta_action(WeylOp.x(0, 1), a)) \
            - theta_action(WeylOp.x(0, 1), theta_action(WeylOp.d(0, 1), a))
        assert lhs == a


class TestRelations:
    def test_rewriting(self):
        X = support.quotient_algebra()
        x = X.gen(X.gens[0])
        assert not X.reduce(x * x + x)
        assert X.reduce(AlgElem.const(2, 0) + x) == AlgElem.const(2, 0)

    def test_relation_must_lower_order(self):
        a = named("a", 0)
        m = (OGen(a, ()),)
        with pytest.raises(RelationError):
            Dga(0, [a], {}, relations=[Rule(m, AlgElem.mono(m + m, 0))])

    def test_decorated_rule_rewrites_higher_derivatives(self):
        a = named("a", 0)
        X = Dga(1, [a], {}, relations=[Rule((OGen(a, (1,)),), AlgElem.zero(1))])
        assert not X.reduce(AlgElem.gen(a, 1, (3,)))
        assert X.reduce(AlgElem.gen(a, 1)) == AlgElem.gen(a, 1)


class TestMorphisms:
    def test_identity(self, mixed1):
        f = identity_morphism(mixed1)
        rng = random.Random(5)
        for _ in range(10):
            a = support.rand_elem(rng, mixed1)
            assert f.apply(a) == a

    def test_chain_map_enforced(self):
        S = free_algebra(sphere(2, 0))
        D = free_algebra(disc(3, 0))
        top, bottom = sorted(D.gens, key=lambda g: -g.degree)
        DgaMorphism(S, D, {S.gens[0]: D.gen(bottom)})
        with pytest.raises(ChainMapError):
            DgaMorphism(D, S, {top: S.zero(), bottom: S.gen(S.gens[0])})

    def test_morphism_is_multiplicative(self):
        S = free_algebra(sphere(2, 1))
        T = free_algebra(sphere(2, 1, name="e'"))
        e, e2 = S.gens[0], T.gens[0]
        x = AlgElem.poly(Poly.var(0, 1))
        f = DgaMorphism(S, T, {e: T.gen(e2) + x * T.gen(e2, (1,))})
        a = S.gen(e, (1,))
        assert f.apply(S.mul(a, a)) == T.mul(f.apply(a), f.apply(a))
        assert f.apply(a) == partial(0, f.apply(S.gen(e)))

    def test_tensor_and_product(self):
        A, B = free_algebra(sphere(1, 0)), free_algebra(sphere(2, 0, name="e"))
        AB = tensor_algebra(A, B)
        assert len(AB.gens) == 2
        f = product_morphism(identity_morphism(AB).compose_after(
            DgaMorphism(A, AB, {A.gens[0]: AB.gen(A.gens[0])})),
            DgaMorphism(B, AB, {B.gens[0]: AB.gen(B.gens[0])}), AB)
        assert f.agrees_with(identity_morphism(AB)) == {}


class TestRsda:
    def test_extension_and_terms(self):
        T = free_algebra(sphere(1, 0))
        u = T.gens[0]
        v1, v2 = named("v1", 2, 0), named("v2", 3, 1)
        M = rsda_extend_differential(T, [v1, v2], {v1: T.gen(u), v2: AlgElem.zero(0)})
        t = T.gen(u)
        vs = [OGen(v1, ()), OGen(v2, ())]
        total = AlgElem.zero(0)
        for _, term in rsda_terms(T, M, t, vs):
            total = total + term
        assert total == M.d(M.mul(t, AlgElem.mono(tuple(vs), 0)))

    def test_extension_rejects_non_cycle(self):
        T = support.mixed_algebra(0)
        v = named("z", 2, 9)
        with pytest.raises(DifferentialError):
            rsda_extend_differential(T, [v], {v: T.gen(T.gens[2])})  # d v = a != 0

    def test_extend_morphism(self):
        T = free_algebra(sphere(1, 0))
        u = T.gens[0]
        v = named("v", 2)
        M = rsda_extend_differential(T, [v], {v: T.gen(u)})
        B = free_algebra(disc(2, 0))
        top, bottom = sorted(B.gens, key=lambda g: -g.degree)
        p = DgaMorphism(T, B, {u: B.gen(bottom)})
        q = rsda_extend_morphism(p, M, {v: B.gen(top)})
        assert q.chain_residues() == {}
        with pytest.raises(ChainMapError):
            rsda_extend_morphism(p, M, {v: B.zero()})


class TestSymmetrizer:
    def test_idempotent_mixed_parity(self):
        e, o = OGen(named("e", 2, 0), ()), OGen(named("o", 1, 1), ())
        for n in range(5):
            for w in product([e, o], repeat=n):
                s = symmetrize(w)
                assert symmetrize(s) == s

    def test_invariant(self):
        e, o = OGen(named("e", 2, 0), ()), OGen(named("o", 1, 1), ())
        s = symmetrize((o, e, o))
        for perm in permutations(range(3)):
            assert act_perm(s, perm) == s

    def test_matches_algebra_product(self):
        e, o = OGen(named("e", 2, 0), ()), OGen(named("o", 1, 1), ())
        w = (e, o, e)
        img = symmetric_word_to_alg(symmetrize(w), 0)
        assert img == symmetric_word_to_alg({w: Fraction(1)}, 0)
        # o sorts before e, and moving the even e past o costs no sign
        assert sym_mul(AlgElem.mono((e,), 0), AlgElem.mono((o,), 0)) == AlgElem.mono((o, e), 0)
