import itertools
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from maxorders import lattice as L
from maxorders.affine import (
    AffineMonoid,
    AffineSyntaxError,
    cone_hrep,
    hilbert_basis,
    in_cone,
    is_maximal_order,
    member,
    minimal_primes,
    parse_affine,
    spectrum,
    unit_group,
)

from . import oracles as O


def random_unimodular(rng, d, steps=6):
    m = L.identity(d)
    for _ in range(steps):
        i, j = rng.sample(range(d), 2) if d > 1 else (0, 0)
        if i == j:
            continue
        k = rng.choice([-2, -1, 1, 2])
        m[i] = [a + k * b for a, b in zip(m[i], m[j])]
    if rng.random() < 0.5:
        m[0] = [-a for a in m[0]]
    return m


def transform(m, vecs):
    return [tuple(L.matvec(m, v)) for v in vecs]


def orthant_gens(rng, d, n, top=2):
    gens = []
    while len(gens) < n:
        g = tuple(rng.randint(0, top) for _ in range(d))
        if any(g) and g not in gens:
            gens.append(g)
    return gens


@st.composite
def orthant_monoids(draw, max_dim=4, max_gens=5, top=2):
    d = draw(st.integers(1, max_dim))
    n = draw(st.integers(1, max_gens))
    vec = st.tuples(*[st.integers(0, top)] * d).filter(any)
    gens = draw(st.lists(vec, min_size=1, max_size=n, unique=True))
    seed = draw(st.integers(0, 2**30))
    return gens, seed


# -- cones -----------------------------------------------------------------------

@given(orthant_monoids(max_dim=3, max_gens=4))
@settings(max_examples=60, deadline=None)
def test_cone_hrep_agrees_with_caratheodory(data):
    gens, seed = data
    d = len(gens[0])
    rng = random.Random(seed)
    m = random_unimodular(rng, d)
    tg = transform(m, gens)
    hrep = cone_hrep(tg, d)
    for x in itertools.product(range(-2, 3), repeat=d):
        assert in_cone(hrep, x) == O.in_rational_cone(tg, x)


# -- membership ------------------------------------------------------------------

@given(orthant_monoids(max_dim=3, max_gens=4))
@settings(max_examples=60, deadline=None)
def test_member_against_coefficient_scan(data):
    gens, seed = data
    d = len(gens[0])
    rng = random.Random(seed)
    m = random_unimodular(rng, d)
    b = AffineMonoid(d, tuple(transform(m, gens)))
    box = 3
    # nonnegative generators: a representation of x <= box has coefficients <= box
    pts = O.monoid_points(gens, box)
    for x in itertools.product(range(-1, box + 1), repeat=d):
        tx = tuple(L.matvec(m, x))
        r = member(b, tx)
        assert bool(r) == (tuple(x) in pts)
        if r:
            assert b.combination(r.coefficients) == tx
            assert all(c >= 0 for c in r.coefficients)


def test_member_with_units():
    b = AffineMonoid(2, ((1, 0), (-1, 0), (0, 1), (1, 2)))
    for x in itertools.product(range(-3, 4), repeat=2):
        r = member(b, x)
        assert bool(r) == (x[1] >= 0)
        if r:
            assert b.combination(r.coefficients) == x


def test_member_when_units_need_long_relations():
    # the plane is all units; every relation among the units has large coefficients
    b = AffineMonoid(3, ((7, 1, 0), (-1, -9, 0), (-5, 11, 0), (0, 0, 1)))
    assert len(unit_group(b)) == 2
    for c in [(0, 0, 0, 0), (-4, 3, -7, 2), (5, -6, 1, 0)]:
        x = b.combination(c)
        r = member(b, x)
        assert r and b.combination(r.coefficients) == x and min(r.coefficients) >= 0
    assert not member(b, (0, 0, -1))


def test_member_outside_group():
    b = AffineMonoid(2, ((2, 0), (0, 2)))
    assert not member(b, (1, 1))
    assert "gr(B)" in member(b, (1, 1)).reason


@given(orthant_monoids(max_dim=3, max_gens=3))
@settings(max_examples=40, deadline=None)
def test_unit_group_against_lineality(data):
    gens, seed = data
    d = len(gens[0])
    rng = random.Random(seed)
    u = tuple(rng.randint(-1, 1) for _ in range(d))
    allg = list(gens) + ([u, tuple(-c for c in u)] if any(u) else [])
    m = random_unimodular(rng, d)
    tg = transform(m, allg)
    b = AffineMonoid(d, tuple(tg))
    expected = [g for g in tg if O.in_rational_cone(tg, tuple(-c for c in g))]
    got = unit_group(b)
    if expected:
        assert L.lattice_basis(got) == L.lattice_basis(expected)
    else:
        assert got == []


# -- faces and primes ----------------------------------------------------------------

def _face_sets(primes):
    return {p.face_generators for p in primes}


@given(orthant_monoids())
@settings(max_examples=60, deadline=None)
def test_minimal_primes_against_divisor_closed_subsets(data):
    gens, seed = data
    d = len(gens[0])
    m = random_unimodular(random.Random(seed), d)
    b = AffineMonoid(d, tuple(transform(m, gens)))
    assert _face_sets(minimal_primes(b)) == O.maximal_proper_faces(gens)


@given(orthant_monoids())
@settings(max_examples=60, deadline=None)
def test_spectrum_against_face_lattice(data):
    gens, seed = data
    d = len(gens[0])
    m = random_unimodular(random.Random(seed), d)
    b = AffineMonoid(d, tuple(transform(m, gens)))
    sp = spectrum(b)
    fs = O.faces(gens)
    full = frozenset(range(len(gens)))
    assert {p.face_generators for p in sp.primes} == set(fs) - {full}
    dim_b = O.rank(gens)
    assert sp.dim == dim_b
    for p, h, dep in zip(sp.primes, sp.heights, sp.depths):
        f = p.face_generators
        assert h == O.longest_chain_above(fs, f)
        dim_quotient = O.rank([gens[i] for i in f])
        # Schelter: dim(B/P) + ht(P) = dim(B)
        assert dim_quotient + h == dim_b
        assert dep == dim_quotient


def test_prime_certificates():
    b = AffineMonoid(3, ((1, 0, 0), (0, 1, 0), (1, 1, 1), (0, 0, 1)))
    for p in spectrum(b).primes:
        cert = p.certificate
        for i, g in enumerate(b.local_generators):
            v = L.dot(cert, g)
            assert v >= 0
            assert (v == 0) == (i in p.face_generators)


# -- normality and Hilbert bases ---------------------------------------------------------

def _orthant_hilbert_oracle(gens):
    d = len(gens[0])
    top = [sum(g[i] for g in gens) for i in range(d)]
    pts = [
        x for x in itertools.product(*(range(t + 1) for t in top))
        if O.in_rational_cone(gens, x)
    ]
    return O.irreducibles(pts)


@given(orthant_monoids(max_dim=2, max_gens=4, top=3))
@settings(max_examples=40, deadline=None)
def test_hilbert_basis_2d(data):
    gens, _ = data
    assert hilbert_basis(gens, len(gens[0])) == _orthant_hilbert_oracle(gens)


@pytest.mark.parametrize("seed", range(12))
def test_hilbert_basis_3d(seed):
    rng = random.Random(seed)
    gens = orthant_gens(rng, 3, rng.randint(2, 4))
    expected = _orthant_hilbert_oracle(gens)
    m = random_unimodular(rng, 3)
    assert hilbert_basis(transform(m, gens), 3) == sorted(transform(m, expected))


@given(orthant_monoids(max_dim=3, max_gens=4))
@settings(max_examples=40, deadline=None)
def test_normality_against_box(data):
    gens, seed = data
    d = len(gens[0])
    m = random_unimodular(random.Random(seed), d)
    b = AffineMonoid(d, tuple(transform(m, gens)))
    top = [sum(g[i] for g in gens) for i in range(d)]
    bound = max(top)
    pts = O.monoid_points(gens, bound)
    lat = L.lattice_basis(gens)
    normal = all(
        x in pts
        for x in itertools.product(*(range(t + 1) for t in top))
        if L.in_lattice(lat, x) and O.in_rational_cone(gens, x)
    )
    r = is_maximal_order(b)
    assert bool(r) == normal
    if not r:
        w = tuple(L.matvec(L.inverse_unimodular(m), r.witness))
        assert w not in pts and O.in_rational_cone(gens, w) and L.in_lattice(lat, w)


def test_non_normal_witness():
    b = AffineMonoid(2, ((2, 0), (0, 1), (1, 1)))
    r = is_maximal_order(b)
    assert not r
    assert r.witness == (1, 0)


def test_even_sum_lattice():
    b = AffineMonoid(2, ((2, 0), (1, 1), (0, 2)))
    assert is_maximal_order(b)
    assert sorted(is_maximal_order(b).hilbert_basis) == [(0, 2), (1, 1), (2, 0)]


def test_units_do_not_break_normality():
    assert is_maximal_order(AffineMonoid(2, ((1, 0), (-1, 0), (0, 1))))
    assert is_maximal_order(AffineMonoid(2, ((2, 0), (-2, 0), (1, 1), (0, 2))))
    r = is_maximal_order(AffineMonoid(2, ((1, 0), (-1, 0), (0, 2), (0, 3))))
    assert not r and r.witness[1] == 1


@given(orthant_monoids(max_dim=3, max_gens=4))
@settings(max_examples=30, deadline=None)
def test_basis_change_invariance(data):
    gens, seed = data
    d = len(gens[0])
    m = random_unimodular(random.Random(seed), d)
    b1 = AffineMonoid(d, tuple(gens))
    b2 = AffineMonoid(d, tuple(transform(m, gens)))
    assert _face_sets(minimal_primes(b1)) == _face_sets(minimal_primes(b2))
    r1, r2 = is_maximal_order(b1), is_maximal_order(b2)
    assert bool(r1) == bool(r2)
    assert spectrum(b1).heights == spectrum(b2).heights


# -- bundled examples ----------------------------------------------------------------------

def test_example2_base(ex2):
    b = ex2.base
    assert b.ambient_rank == 8
    assert is_maximal_order(b)
    assert len(minimal_primes(b)) == 8
    assert spectrum(b).dim == 4


def test_example4_base(ex4):
    b = ex4.base
    assert is_maximal_order(b)
    labels = sorted(p.label(b) for p in minimal_primes(b))
    assert labels == sorted(
        f"({x},{y},{z})" for x in ("a1", "a2") for y in ("a3", "a4") for z in ("a5", "a6")
    )


# -- file format ---------------------------------------------------------------------------

def test_parse_affine():
    b, words = parse_affine("affine B rank 2\ngen p: 1 0 = x y\ngen q: 0 1\n")
    assert b.names == ("p", "q") and b.name == "B"
    assert words == {"p": "x y"}


@pytest.mark.parametrize(
    "text, line",
    [
        ("affine B rank 2\ngen p: 1 0 0\n", 2),
        ("gen p: 1 0\n", 1),
        ("affine B rank x\n", 1),
        ("affine B rank 2\ngen p: 1 0\ngen p: 0 1\n", 3),
        ("affine B rank 2\n\nfoo\n", 3),
    ],
)
def test_parse_affine_errors(text, line):
    with pytest.raises(AffineSyntaxError) as exc:
        parse_affine(text)
    assert exc.value.line == line
