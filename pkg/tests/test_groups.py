import itertools
from math import gcd

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from maxorders import lattice as L
from maxorders.groups import (
    ExtensionData,
    FiniteQuotientTable,
    GroupElement,
    GroupSyntaxError,
    abelian_invariants,
    change_basis,
    delta_plus_trivial,
    dihedral_free,
    format_abelian,
    format_group,
    parse_group,
    torsion_in_coset,
    trivial_extension,
    validate_extension,
)

from . import oracles as O

FINITE_ORDER = {
    1: [((1,),), ((-1,),)],
    2: [
        ((1, 0), (0, 1)),
        ((-1, 0), (0, -1)),
        ((0, 1), (1, 0)),
        ((1, 0), (0, -1)),
        ((0, -1), (1, 0)),
        ((0, -1), (1, -1)),
        ((1, 1), (0, -1)),
    ],
}


def mat_power(m, e):
    out = L.identity(len(m))
    for _ in range(e):
        out = L.matmul(m, out)
    return out


def cyclic_extension(m, sigma, v):
    """Z^k by Z_m: t acts by sigma and t^m = v (v fixed by sigma)."""
    k = len(sigma)
    q = FiniteQuotientTable.cyclic(m)
    action = tuple(mat_power(sigma, i) for i in range(m))
    coc = {(i, j): tuple(v) for i in range(m) for j in range(m) if i + j >= m}
    return ExtensionData(k, q, action, coc)


@st.composite
def cyclic_extensions(draw):
    k = draw(st.sampled_from([1, 2]))
    sigma = draw(st.sampled_from(FINITE_ORDER[k]))
    order = next(e for e in range(1, 7) if mat_power(sigma, e) == L.identity(k))
    m = order * draw(st.sampled_from([1, 2]))
    fixed = [
        w for w in itertools.product(range(-2, 3), repeat=k)
        if tuple(L.matvec(sigma, w)) == w
    ]
    v = draw(st.sampled_from(fixed))
    return cyclic_extension(m, sigma, v)


def elements(e, box=2):
    vec = st.tuples(*[st.integers(-box, box)] * e.rank)
    return st.builds(GroupElement, st.integers(0, e.quotient.size - 1), vec)


H_TEXT = """\
group H rank 1
quotient: e t
table: e*e=e e*t=t t*e=t t*t=e
cocycle t t: 2
"""

DINF_TEXT = """\
group D rank 1
quotient: e s
table: e*e=e e*s=s s*e=s s*s=e
action s: [[-1]]
"""


def test_parse_h():
    e = parse_group(H_TEXT)
    assert validate_extension(e)
    assert e.quotient.size == 2 and e.rank == 1
    assert e.c(1, 1) == (2,)
    assert parse_group(format_group(e)) == e


def test_h_is_z_times_z2():
    e = parse_group(H_TEXT)
    d = delta_plus_trivial(e)
    assert not d
    w = d.witness
    assert e.is_identity(e.power(w, 2)) and not e.is_identity(w)
    assert w == GroupElement(1, (-1,))
    assert format_abelian(abelian_invariants(e)) == "Z x Z2"
    assert dihedral_free(e)


def test_infinite_dihedral():
    e = parse_group(DINF_TEXT)
    assert validate_extension(e)
    assert delta_plus_trivial(e)
    r = dihedral_free(e)
    assert not r and r.axis in ((1,), (-1,))
    assert e.is_identity(e.power(r.witness, 2))
    assert abelian_invariants(e) is None


def test_free_abelian():
    e = trivial_extension(3)
    assert validate_extension(e)
    assert delta_plus_trivial(e) and dihedral_free(e)
    assert format_abelian(abelian_invariants(e)) == "Z^3"


def test_klein_bottle_group_is_not_dihedral():
    # t acts by diag(1, -1) and t^2 = (1, 0): torsion free
    e = cyclic_extension(2, ((1, 0), (0, -1)), (1, 0))
    assert validate_extension(e)
    assert delta_plus_trivial(e)
    assert dihedral_free(e)
    assert not torsion_in_coset(e, 1, 2).feasible


@pytest.mark.parametrize(
    "text, message",
    [
        (H_TEXT.replace("t*t=e", "t*t=t"), "no inverse"),
        (H_TEXT + "action t: [[2]]\n", "invertible"),
        (H_TEXT.replace("cocycle t t: 2", "cocycle e t: 1"), "normalized"),
    ],
)
def test_validation_failures(text, message):
    v = validate_extension(parse_group(text))
    assert not v
    assert message in v.violation


def test_cocycle_identity_failure():
    e = ExtensionData(1, FiniteQuotientTable.cyclic(3), (((1,),),) * 3, {(1, 1): (1,)})
    v = validate_extension(e)
    assert not v and "cocycle identity" in v.violation


@pytest.mark.parametrize(
    "text, line",
    [
        ("group H rank 1\nquotient: e e\n", 2),
        ("group H rank 1\nquotient: e t\ntable: e*e=q\n", 3),
        ("group H rank 1\nquotient: e t\naction u: [[1]]\n", 3),
        ("group H rank 1\nquotient: e t\naction t: [[1, 0]]\n", 3),
        ("group H rank 1\nquotient: e t\ncocycle t t: 1 2\n", 3),
        ("group H rank 1\nnonsense\n", 2),
    ],
)
def test_parse_errors(text, line):
    with pytest.raises(GroupSyntaxError) as exc:
        parse_group(text)
    assert exc.value.line == line


@given(cyclic_extensions(), st.data())
@settings(max_examples=80, deadline=None)
def test_associativity(e, data):
    assert validate_extension(e)
    x, y, z = (data.draw(elements(e)) for _ in range(3))
    assert e.multiply(e.multiply(x, y), z) == e.multiply(x, e.multiply(y, z))
    one = e.identity_element()
    assert e.multiply(one, x) == x == e.multiply(x, one)


@given(cyclic_extensions())
@settings(max_examples=60, deadline=None)
def test_torsion_solutions_are_torsion(e):
    q = e.quotient
    for f in range(q.size):
        m = q.order(f)
        sol = torsion_in_coset(e, f, m)
        if sol.feasible:
            for coeffs in itertools.product(range(-1, 2), repeat=len(sol.homogeneous_basis)):
                x = GroupElement(f, tuple(sol.point(coeffs)))
                assert e.is_identity(e.power(x, m))


@given(cyclic_extensions())
@settings(max_examples=60, deadline=None)
def test_delta_plus_against_brute_force(e):
    q = e.quotient
    ident = tuple(map(tuple, L.identity(e.rank)))
    found = [
        x for x in O.brute_torsion(e, box=4)
        if x.coset != q.identity and e.action[x.coset] == ident
    ]
    r = delta_plus_trivial(e)
    assert r.value == (not found)
    if not r:
        assert e.is_identity(e.power(r.witness, q.order(r.witness.coset)))


def _dihedral_oracle(e, box=3):
    """Search for an involution t = (n, f) and a vector a with σ_f a = -a
    such that (1 - σ_f) maps every basis vector into Q a; then N normalizes
    <t, a> and the normalizer has finite index."""
    k = e.rank
    invols = [x for x in O.brute_torsion(e, box, max_order=2) if e.is_identity(e.multiply(x, x))]
    for t in invols:
        s = e.action[t.coset]
        for a in itertools.product(range(-box, box + 1), repeat=k):
            if not any(a) or tuple(L.matvec(s, a)) != tuple(-x for x in a):
                continue
            ok = True
            for i in range(k):
                col = [int(i == j) - s[j][i] for j in range(k)]
                if L.rank([list(a), col]) > 1:
                    ok = False
            if ok:
                return t
    return None


@given(cyclic_extensions())
@settings(max_examples=60, deadline=None)
def test_dihedral_against_brute_force(e):
    t = _dihedral_oracle(e)
    r = dihedral_free(e)
    assert r.value == (t is None)
    if not r:
        assert e.is_identity(e.multiply(r.witness, r.witness))


@given(cyclic_extensions())
@settings(max_examples=60, deadline=None)
def test_abelian_invariants_formula(e):
    ident = tuple(map(tuple, L.identity(e.rank)))
    inv = abelian_invariants(e)
    if any(m != ident for m in e.action):
        assert inv is None
        return
    m = e.quotient.size
    v = e.c(m - 1, 1) if m > 1 else (0,) * e.rank
    # Z^k + Z t modulo m t = v
    g = m
    for x in v:
        g = gcd(g, x)
    assert inv == (e.rank, [g] if g > 1 else [])


UNIMODULAR = {
    1: [((1,),), ((-1,),)],
    2: [((1, 0), (0, 1)), ((2, 1), (1, 1)), ((0, 1), (-1, 3)), ((1, -2), (0, 1))],
}


@given(cyclic_extensions(), st.data())
@settings(max_examples=60, deadline=None)
def test_basis_change_invariance(e, data):
    u = data.draw(st.sampled_from(UNIMODULAR[e.rank]))
    e2 = change_basis(e, u)
    assert validate_extension(e2)
    assert delta_plus_trivial(e2).value == delta_plus_trivial(e).value
    assert dihedral_free(e2).value == dihedral_free(e).value
    assert abelian_invariants(e2) == abelian_invariants(e)
    # the coordinate change is a homomorphism
    x, y = data.draw(elements(e)), data.draw(elements(e))
    phi = lambda g: GroupElement(g.coset, tuple(L.matvec(u, g.vector)))  # noqa: E731
    assert phi(e.multiply(x, y)) == e2.multiply(phi(x), phi(y))


def test_example4_extension(ex4_cs):
    e = ex4_cs.extension
    assert validate_extension(e)
    assert e.quotient.size == 4
    assert all(e.quotient.order(f) <= 2 for f in range(4))
    assert delta_plus_trivial(e)
    assert dihedral_free(e)


def test_nonprime_group_file_matches(nonprime):
    cs = nonprime.crossed_system()
    e = cs.extension
    g = nonprime.group()
    assert g.action == e.action and g.cocycle == e.cocycle
    assert not delta_plus_trivial(e)
