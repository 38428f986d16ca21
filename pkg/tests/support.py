"""Shared builders and random generators for the test suite."""
from __future__ import annotations

import random
from fractions import Fraction
from typing import List

from dgda.coeff_rings import Poly, WeylOp, indices_up_to
from dgda.dga_core import (AlgElem, Dga, DgaMorphism, OGen, Rule, base_algebra, free_algebra,
                           normalize_word, tensor_algebra)
from dgda.graded_modules import disc, named, sphere
from dgda.homology_engine import Truncation
from dgda.koszul_tate import polynomial_ring


# -- random scalars, polynomials, operators -------------------------------------------------

def rand_frac(rng: random.Random) -> Fraction:
    return Fraction(rng.randint(-5, 5), rng.randint(1, 3))


def rand_poly(rng: random.Random, p: int, deg: int = 2, terms: int = 3) -> Poly:
    out = {}
    exps = list(indices_up_to(p, deg))
    for _ in range(rng.randint(0, terms)):
        out[rng.choice(exps)] = rand_frac(rng)
    return Poly(p, out)


def rand_weyl(rng: random.Random, p: int, deg: int = 2, terms: int = 3) -> WeylOp:
    out = {}
    exps = list(indices_up_to(p, deg))
    for _ in range(rng.randint(0, terms)):
        out[(rng.choice(exps), rng.choice(exps))] = rand_frac(rng)
    return WeylOp(p, out)


# -- algebras used across tests ----------------------------------------------------------------

def mixed_algebra(p: int = 0) -> Dga:
    """a (0), u (1), v (1), w (2): d u = 0, d v = a (+ x a + d a), d w = a u (+ x d u)."""
    a, u, v, w = named("a", 0, 0), named("u", 1, 1), named("v", 1, 2), named("w", 2, 3)
    A = lambda g, deco=None: AlgElem.gen(g, p, deco)
    dv = A(a)
    dw = A(a) * A(u)
    if p:
        x = AlgElem.poly(Poly.var(0, p))
        e1 = tuple(1 if i == 0 else 0 for i in range(p))
        dv = dv + x * A(a) + A(a, e1)
        dw = dw + x * A(u, e1)
    return Dga(p, [a, u, v, w], {v: dv, w: dw}, name="M", hints={a: (1, 0, 1)})


def quotient_algebra() -> Dga:
    x = named("x", 0)
    return Dga(0, [x], {}, relations=[Rule((OGen(x, ()),), AlgElem.zero(0))], name="Q[x]/(x)",
               hints={x: (1, 0, 1)})


def constructed_algebras() -> List[Dga]:
    """A spread of algebras built by the library's constructors."""
    from dgda.koszul_tate import JetSpec, jet_algebra, koszul_resolution, koszul_tate
    out = []
    for p in (0, 1):
        for n in (1, 2, 3):
            out.append(free_algebra(disc(n, p), name=f"S(D{n})"))
            out.append(free_algebra(sphere(n, p), name=f"S(S{n})"))
        out.append(mixed_algebra(p))
    out.append(tensor_algebra(free_algebra(disc(2, 0), "D2"), free_algebra(sphere(3, 0), "S3")))
    P = polynomial_ring(["x", "y", "z"])
    x, y, _ = [AlgElem.gen(g, 0) for g in P.gens]
    out.append(koszul_resolution(P, [x, y]))
    spec = JetSpec(1, ("phi",), 5, ("t",))
    J = jet_algebra(spec)
    out.append(koszul_tate(spec, [AlgElem.gen(J.gens[0], 1, (2,))]).dga)
    return out


def rand_monomial(rng: random.Random, X: Dga, max_len: int = 3, max_deco: int = 2):
    ogens = [OGen(g, a) for g in X.gens for a in indices_up_to(X.nvars, max_deco)]
    if not ogens:
        return ()
    while True:
        word = [rng.choice(ogens) for _ in range(rng.randint(0, max_len))]
        s, m = normalize_word(word)
        if s:
            return m


def rand_elem(rng: random.Random, X: Dga, terms: int = 3, degree: int | None = None) -> AlgElem:
    out = AlgElem.zero(X.nvars)
    for _ in range(terms * 6):
        if len(out.terms) >= terms:
            break
        m = rand_monomial(rng, X)
        if degree is not None and sum(o.degree for o in m) != degree:
            continue
        out = out + AlgElem.mono(m, X.nvars, rand_poly(rng, X.nvars, 1, 2) if X.nvars else rand_frac(rng))
    return X.reduce(out)


def sign(n: int) -> int:
    return -1 if n % 2 else 1


# -- morphism fixtures for the factorization tests -------------------------------------------

def _unit(B: Dga) -> DgaMorphism:
    from dgda.dga_core import unit_morphism
    return unit_morphism(base_algebra(B.nvars, var_names=B.var_names), B)


def exterior_quotient() -> DgaMorphism:
    """Q[a] -> Q[a] (x) L[u], d u = a^2."""
    a, u = named("a", 0, 0), named("u", 1, 1)
    A = Dga(0, [a], {}, name="Q[a]", hints={a: (1, 0, 1)})
    B = Dga(0, [a, u], {u: AlgElem.gen(a, 0) * AlgElem.gen(a, 0)}, name="Q[a]/(a^2)", hints={a: (1, 0, 1)})
    return DgaMorphism(A, B, {a: B.gen(a)})


def factorization_fixtures():
    """(name, phi, truncation) triples; windows sized for sub-second runs."""
    from dgda.dga_core import inclusion
    from dgda.koszul_tate import koszul_resolution
    out = []
    for n in (1, 2):
        out.append((f"O->S(S{n}) p=0", _unit(free_algebra(sphere(n, 0))), Truncation(3, 0, 0, 2)))
    out.append(("O->S(S1) p=1", _unit(free_algebra(sphere(1, 1))), Truncation(2, 1, 1, 2)))
    out.append(("O->S(D2) p=1", _unit(free_algebra(disc(2, 1))), Truncation(3, 1, 1, 2)))
    out.append(("O->Q[x]/(x)", _unit(quotient_algebra()), Truncation(3, 1, 0, 2)))
    S2 = free_algebra(sphere(2, 0))
    S23 = tensor_algebra(S2, free_algebra(sphere(3, 0, name="1_3")))
    out.append(("S(S2)->S(S2)(x)S(S3)", inclusion(S2, S23), Truncation(3, 0, 0, 2)))
    from dgda.dga_core import identity_morphism
    out.append(("id S(S1)", identity_morphism(free_algebra(sphere(1, 0))), Truncation(3, 0, 0, 2)))
    out.append(("O->M p=0", _unit(mixed_algebra(0)), Truncation(2, 1, 0, 2)))
    out.append(("Q[a]->Q[a]/(a^2)", exterior_quotient(), Truncation(2, 2, 0, 2)))
    P = polynomial_ring(["x"])
    K = koszul_resolution(P, [AlgElem.gen(P.gens[0], 0)])
    out.append(("Q[x]->K(x)", inclusion(P, K), Truncation(2, 2, 0, 2)))
    return out


def square_fixtures():
    """(name, mode, u, v, phi, phi2, truncation) for commuting squares v phi = phi2 u."""
    from dgda.dga_core import identity_morphism, inclusion
    out = []
    S = free_algebra(sphere(2, 0))
    e = S.gens[0]
    S12 = tensor_algebra(free_algebra(sphere(2, 0, name="e1", ordinal=1)),
                         free_algebra(sphere(2, 0, name="e2", ordinal=2)))
    e1, e2 = S12.gens
    v = DgaMorphism(S, S12, {e: S12.gen(e1) + S12.gen(e2)})
    phi, phi2 = _unit(S), _unit(S12)
    u = identity_morphism(phi.source)
    t = Truncation(3, 0, 0, 2)
    out.append(("diagonal cof", "cof", u, v, phi, phi2, t))
    out.append(("diagonal trivcof", "trivcof", u, v, phi, phi2, t))
    M = mixed_algebra(1)
    phiM = _unit(M)
    out.append(("identity p=1", "cof", identity_morphism(phiM.source), identity_morphism(M), phiM, phiM,
                Truncation(2, 1, 1, 2)))
    S1 = free_algebra(sphere(1, 0))
    S1S2 = tensor_algebra(S1, free_algebra(sphere(2, 0, name="1_2")))
    out.append(("inclusion S1", "cof", identity_morphism(_unit(S1).source), inclusion(S1, S1S2), _unit(S1),
                _unit(S1S2), Truncation(3, 0, 0, 2)))
    q = exterior_quotient()
    A, B = q.source, q.target
    a, uu = B.gens
    u2 = DgaMorphism(A, A, {a: A.gen(a).scale(2)})
    v2 = DgaMorphism(B, B, {a: B.gen(a).scale(2), uu: B.gen(uu).scale(4)})
    out.append(("scaling", "cof", u2, v2, q, q, Truncation(2, 2, 0, 2)))
    return out


# -- CLI fixture corpus ----------------------------------------------------------------------

from pathlib import Path

FIXTURES = Path(__file__).parent / "fixtures"

EXPECTED_EXIT = {
    "cofibrant_O": 0, "disc_homology": 0, "dsq_good": 0, "koszul_x": 0, "koszul_xy": 0, "kt_noether": 0,
    "kt_phi2": 0, "minimal_quotient": 0, "pushout": 0, "quotient_cof": 0, "rsda_cof": 0,
    "sphere_homology": 0, "sphere_trivcof": 0, "square": 0,
    "dsq_bad": 1, "flagged_homology": 1, "rsda_bad": 1, "square_open": 1, "trivcof_empty_budget": 1,
    "malformed": 2, "unknown_field": 2,
    "kt_noether_bad": 3,
}


def fixture_command(name: str) -> str:
    if name.startswith(("koszul", "kt_", "cofibrant")):
        return "resolve"
    if "homology" in name or name in ("unknown_field", "malformed"):
        return "homology"
    if name.startswith(("rsda", "pushout", "square", "dsq")):
        return "verify"
    return "factorize"
